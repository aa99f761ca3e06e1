#pragma once

#include <Eigen/Dense>

namespace rtcbf {

// Per pair-and-order trust bookkeeping: the safe-motion halfspace A v >= B
// for the neighbor's velocity, its margin at the observed velocity, and the
// resulting scores.
struct TrustState {
    Eigen::RowVectorXd A;
    double B = 0.0;
    double margin = 0.0;
    double rho_m = 0.0;
    double rho_gamma = 0.0;
    double rho = 0.0;
    bool incompatible = false;  // observed velocity outside the halfspace
};

struct BestCaseResult {
    bool feasible = false;
    double value = 0.0;
};

// Best ego-side contribution to d(psi^{k-1})/dt: maximizes
// drift_part + input_row * u over G u <= w (the other pairs' constraint rows
// plus the input polytope). Infeasible means the ego cannot satisfy the
// remaining constraints at all.
BestCaseResult best_case_ego(double drift_part,
                             const Eigen::RowVectorXd& input_row,
                             const Eigen::MatrixXd& G,
                             const Eigen::VectorXd& w);

// Halfspace of neighbor velocities keeping this pair's constraint
// satisfiable: A v >= B with A = d(psi^{k-1})/dx_j and
// B = -nu_k psi^{k-1} - param_rate - best_case. The margin is A xdot_j - B;
// a negative margin marks an incompatible observation.
TrustState neighbor_halfspace_and_margin(const Eigen::RowVectorXd& dpsi_dxj,
                                         double nu_k, double psi_prev,
                                         double param_rate, double best_case,
                                         const Eigen::VectorXd& xdot_j);

// Margin score rho_m = tanh(beta m), belief score
// rho_gamma = tanh(angle(b, s_hat) / angle(xdot_j, s_hat)), combined as
//   rho = (rho_m - rho_m_bar) * rho_gamma        if rho_m >= rho_m_bar
//   rho = (rho_m - rho_m_bar) * (1 - rho_gamma)  otherwise.
// A stationary neighbor gets rho_gamma = tanh(1). Fills the score fields of
// `state` in place and returns the combined rho.
double trust_scores(TrustState& state, const Eigen::VectorXd& belief,
                    const Eigen::VectorXd& s_hat,
                    const Eigen::VectorXd& xdot_j, double beta,
                    double rho_m_bar);

// Branch combination alone: (rho_m - rho_m_bar) scaled by rho_gamma above
// the threshold and by (1 - rho_gamma) below it. Both branches are exactly
// zero at rho_m == rho_m_bar.
double combine_trust(double rho_m, double rho_gamma, double rho_m_bar);

// Desired class-K rate from trust; linear in rho.
double alpha_rate_from_trust(double rho, double gain);

}  // namespace rtcbf
