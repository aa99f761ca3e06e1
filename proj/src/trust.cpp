#include "rtcbf/trust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rtcbf/lp.hpp"

namespace rtcbf {

namespace {

// Angle in [0, pi] between two vectors; zero vectors give 0.
double angle_between(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
    return std::acos(c);
}

}  // namespace

BestCaseResult best_case_ego(double drift_part,
                             const Eigen::RowVectorXd& input_row,
                             const Eigen::MatrixXd& G,
                             const Eigen::VectorXd& w) {
    BestCaseResult out;
    LinearProgram lp;
    lp.c = -input_row.transpose();
    lp.G = G;
    lp.w = w;
    const LpResult r = solve_lp(lp);
    if (r.status == LpStatus::Infeasible) return out;
    out.feasible = true;
    if (r.status == LpStatus::Unbounded) {
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    out.value = drift_part + input_row.dot(r.z);
    return out;
}

TrustState neighbor_halfspace_and_margin(const Eigen::RowVectorXd& dpsi_dxj,
                                         double nu_k, double psi_prev,
                                         double param_rate, double best_case,
                                         const Eigen::VectorXd& xdot_j) {
    if (dpsi_dxj.size() != xdot_j.size())
        throw std::invalid_argument(
            "neighbor_halfspace_and_margin: dimension mismatch");
    TrustState s;
    s.A = dpsi_dxj;
    s.B = -nu_k * psi_prev - param_rate - best_case;
    s.margin = s.A.dot(xdot_j) - s.B;
    s.incompatible = s.margin < 0.0;
    return s;
}

double trust_scores(TrustState& state, const Eigen::VectorXd& belief,
                    const Eigen::VectorXd& s_hat,
                    const Eigen::VectorXd& xdot_j, double beta,
                    double rho_m_bar) {
    state.rho_m = std::tanh(beta * std::max(state.margin, 0.0));
    if (xdot_j.norm() == 0.0) {
        state.rho_gamma = std::tanh(1.0);
    } else {
        const double gamma_b = angle_between(belief, s_hat);
        const double gamma_v = std::max(angle_between(xdot_j, s_hat), 1e-9);
        state.rho_gamma = std::tanh(gamma_b / gamma_v);
    }
    state.rho = combine_trust(state.rho_m, state.rho_gamma, rho_m_bar);
    if (state.incompatible) state.rho = -1.0;
    return state.rho;
}

double combine_trust(double rho_m, double rho_gamma, double rho_m_bar) {
    if (rho_m >= rho_m_bar) return (rho_m - rho_m_bar) * rho_gamma;
    return (rho_m - rho_m_bar) * (1.0 - rho_gamma);
}

double alpha_rate_from_trust(double rho, double gain) {
    if (rho < -1.0 || rho > 1.0)
        throw std::invalid_argument("alpha_rate_from_trust: rho out of range");
    return gain * rho;
}

}  // namespace rtcbf
