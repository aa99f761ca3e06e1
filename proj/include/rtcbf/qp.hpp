#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rtcbf {

// min 1/2 z'Hz + q'z  s.t.  G z <= w, with H symmetric positive definite.
struct QuadraticProgram {
    Eigen::MatrixXd H;
    Eigen::VectorXd q;
    Eigen::MatrixXd G;
    Eigen::VectorXd w;

    int num_vars() const { return static_cast<int>(q.size()); }
};

enum class QpStatus { Optimal, Infeasible };

struct QpResult {
    QpStatus status = QpStatus::Infeasible;
    Eigen::VectorXd z;
    std::vector<int> active_set;   // rows with positive multiplier
    Eigen::VectorXd multipliers;   // one per row, zero when inactive
    double kkt_residual = 0.0;
    Eigen::VectorXd certificate;   // Farkas combination when infeasible
};

// Exact solver for small dense problems (active-set enumeration over the
// KKT systems). Throws std::invalid_argument on an indefinite or
// ill-conditioned (cond > 1e12) Hessian.
QpResult solve_qp(const QuadraticProgram& qp);

}  // namespace rtcbf
