#include "rtcbf/analytic.hpp"

#include <cmath>

namespace rtcbf {

AnalyticResult analytic_cbf_qp(const Eigen::VectorXd& u_r, double dh_dt,
                               double lf_h, const Eigen::RowVectorXd& lg_h,
                               double alpha_val, AnalyticVariant variant) {
    AnalyticResult res;
    const double psi1 = dh_dt + lf_h + lg_h.dot(u_r) + alpha_val;
    const double norm = lg_h.norm();
    if (psi1 >= 0.0 || norm == 0.0) {
        res.feasible = (psi1 >= 0.0) || (norm > 0.0);
        res.u = u_r;
        return res;
    }
    if (variant == AnalyticVariant::Kkt) {
        res.u = u_r - lg_h.transpose() * (psi1 / (norm * norm));
    } else {
        res.u = u_r - (1.0 / std::sqrt(2.0)) * lg_h.transpose() * (psi1 / norm);
    }
    return res;
}

}  // namespace rtcbf
