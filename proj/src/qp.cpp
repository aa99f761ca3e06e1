#include "rtcbf/qp.hpp"

#include <cmath>
#include <stdexcept>

#include "rtcbf/lp.hpp"

namespace rtcbf {

namespace {

constexpr double kFeasTol = 1e-8;

double kkt_residual_at(const QuadraticProgram& qp, const Eigen::VectorXd& z,
                       const Eigen::VectorXd& mu) {
    // Stationarity: Hz + q + G'mu = 0 (rows are G z <= w).
    double res = (qp.H * z + qp.q + qp.G.transpose() * mu).lpNorm<Eigen::Infinity>();
    const Eigen::VectorXd slack = qp.w - qp.G * z;
    for (int i = 0; i < qp.G.rows(); ++i) {
        res = std::max(res, -slack(i));                       // primal feasibility
        res = std::max(res, -mu(i));                          // dual feasibility
        res = std::max(res, std::abs(mu(i) * slack(i)));      // complementarity
    }
    return res;
}

bool try_active_set(const QuadraticProgram& qp, const std::vector<int>& act,
                    QpResult* out) {
    const int p = qp.num_vars();
    const int na = static_cast<int>(act.size());
    Eigen::MatrixXd K(p + na, p + na);
    K.setZero();
    K.topLeftCorner(p, p) = qp.H;
    for (int i = 0; i < na; ++i) {
        K.block(p + i, 0, 1, p) = qp.G.row(act[i]);
        K.block(0, p + i, p, 1) = qp.G.row(act[i]).transpose();
    }
    Eigen::VectorXd rhs(p + na);
    rhs.head(p) = -qp.q;
    for (int i = 0; i < na; ++i) rhs(p + i) = qp.w(act[i]);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) return false;
    const Eigen::VectorXd sol = lu.solve(rhs);

    Eigen::VectorXd z = sol.head(p);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(qp.G.rows());
    for (int i = 0; i < na; ++i) {
        if (sol(p + i) < -kFeasTol) return false;  // dual infeasible
        mu(act[i]) = std::max(0.0, sol(p + i));
    }
    const Eigen::VectorXd slack = qp.w - qp.G * z;
    if (qp.G.rows() > 0 && slack.minCoeff() < -kFeasTol) return false;

    const double res = kkt_residual_at(qp, z, mu);
    if (res > 1e-7) return false;
    out->status = QpStatus::Optimal;
    out->z = std::move(z);
    out->multipliers = std::move(mu);
    out->active_set.clear();
    for (int i = 0; i < na; ++i)
        if (out->multipliers(act[i]) > kFeasTol) out->active_set.push_back(act[i]);
    out->kkt_residual = res;
    return true;
}

// Lexicographic enumeration of row subsets of a given size; degenerate ties
// resolve to the lowest row indices by construction.
bool enumerate_subsets(const QuadraticProgram& qp, int size, int start,
                       std::vector<int>& act, QpResult* out) {
    if (static_cast<int>(act.size()) == size) return try_active_set(qp, act, out);
    for (int i = start; i <= static_cast<int>(qp.G.rows()) - (size - static_cast<int>(act.size())); ++i) {
        act.push_back(i);
        if (enumerate_subsets(qp, size, i + 1, act, out)) return true;
        act.pop_back();
    }
    return false;
}

}  // namespace

QpResult solve_qp(const QuadraticProgram& qp) {
    const int p = qp.num_vars();
    if (qp.H.rows() != p || qp.H.cols() != p)
        throw std::invalid_argument("solve_qp: H dimension mismatch");
    if (qp.G.size() > 0 && (qp.G.cols() != p || qp.G.rows() != qp.w.size()))
        throw std::invalid_argument("solve_qp: constraint dimension mismatch");
    if ((qp.H - qp.H.transpose()).lpNorm<Eigen::Infinity>() >
        1e-10 * std::max(1.0, qp.H.lpNorm<Eigen::Infinity>()))
        throw std::invalid_argument("solve_qp: H not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qp.H);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0) throw std::invalid_argument("solve_qp: H not positive definite");
    if (hi / lo > 1e12) throw std::invalid_argument("solve_qp: H ill-conditioned");

    QpResult out;

    // Unconstrained minimizer first.
    Eigen::VectorXd z0 = qp.H.ldlt().solve(-qp.q);
    if (qp.G.rows() == 0 || (qp.w - qp.G * z0).minCoeff() >= -kFeasTol) {
        out.status = QpStatus::Optimal;
        out.z = std::move(z0);
        out.multipliers = Eigen::VectorXd::Zero(qp.G.rows());
        out.kkt_residual = kkt_residual_at(qp, out.z, out.multipliers);
        return out;
    }

    // Feasibility check with certificate.
    LinearProgram feas;
    feas.c = Eigen::VectorXd::Zero(p);
    feas.G = qp.G;
    feas.w = qp.w;
    const LpResult fr = solve_lp(feas);
    if (fr.status == LpStatus::Infeasible) {
        out.status = QpStatus::Infeasible;
        out.certificate = fr.certificate;
        return out;
    }

    const int max_size = std::min<int>(p, static_cast<int>(qp.G.rows()));
    std::vector<int> act;
    for (int size = 1; size <= max_size; ++size) {
        act.clear();
        if (enumerate_subsets(qp, size, 0, act, &out)) return out;
    }
    throw std::runtime_error("solve_qp: no KKT point found on feasible problem");
}

}  // namespace rtcbf
