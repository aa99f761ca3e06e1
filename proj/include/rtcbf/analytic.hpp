#pragma once

#include <Eigen/Dense>

namespace rtcbf {

enum class AnalyticVariant {
    Kkt,     // exact projection u_r - Lgh' psi1 / ||Lgh||^2
    Scaled,  // closed form with the 1/sqrt(2) and ||Lgh|| scaling
};

struct AnalyticResult {
    bool feasible = true;
    Eigen::VectorXd u;
};

// Closed-form solution of  min ||u - u_r||^2  s.t.
//   dh/dt + Lfh + Lgh u >= -alpha_val
// over unconstrained input. Infeasible only when ||Lgh|| = 0 with the
// constraint violated at every u.
AnalyticResult analytic_cbf_qp(const Eigen::VectorXd& u_r, double dh_dt,
                               double lf_h, const Eigen::RowVectorXd& lg_h,
                               double alpha_val, AnalyticVariant variant);

}  // namespace rtcbf
