#include "rtcbf/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rtcbf {

namespace {

constexpr double kEps = 1e-10;

// Dense two-phase tableau simplex on the standard form
//   min c'x  s.t.  A x = b,  x >= 0,
// with Bland's rule (lowest-index entering and leaving) for determinism
// and anti-cycling.
struct Simplex {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    int rows, cols;
    std::vector<int> basis;  // basis[r] = column basic in row r

    Simplex(Eigen::MatrixXd A_, Eigen::VectorXd b_)
        : A(std::move(A_)), b(std::move(b_)),
          rows(static_cast<int>(b.size())), cols(static_cast<int>(A.cols())),
          basis(rows, -1) {}

    void pivot(int r, int col) {
        const double piv = A(r, col);
        A.row(r) /= piv;
        b(r) /= piv;
        for (int i = 0; i < rows; ++i) {
            if (i == r || std::abs(A(i, col)) < kEps) continue;
            const double factor = A(i, col);
            A.row(i) -= factor * A.row(r);
            b(i) -= factor * b(r);
        }
        basis[r] = col;
    }

    // Minimizes cost'x from the current basis. Returns false if unbounded.
    // allowed(j) gates which columns may enter (used to lock out artificials).
    bool iterate(const Eigen::VectorXd& cost, const std::vector<bool>& allowed,
                 Eigen::VectorXd* multipliers = nullptr) {
        const int max_iter = 50 * (rows + cols) + 200;
        for (int iter = 0; iter < max_iter; ++iter) {
            // Reduced costs from the simplex multipliers y = cB' B^-1.
            Eigen::VectorXd y = Eigen::VectorXd::Zero(rows);
            for (int r = 0; r < rows; ++r) y(r) = cost(basis[r]);
            // Tableau rows are already B^-1 A, so reduced cost of column j is
            // cost(j) - sum_r cost(basis[r]) * A(r, j).
            int entering = -1;
            for (int j = 0; j < cols; ++j) {
                if (!allowed[j]) continue;
                double rc = cost(j);
                for (int r = 0; r < rows; ++r) rc -= cost(basis[r]) * A(r, j);
                if (rc < -1e-9) { entering = j; break; }  // Bland: lowest index
            }
            if (entering < 0) {
                if (multipliers) {
                    // Recover y from the artificial columns is done by caller.
                    *multipliers = y;
                }
                return true;  // optimal
            }
            int leaving = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (int r = 0; r < rows; ++r) {
                if (A(r, entering) > kEps) {
                    const double ratio = b(r) / A(r, entering);
                    if (ratio < best_ratio - kEps ||
                        (ratio < best_ratio + kEps &&
                         (leaving < 0 || basis[r] < basis[leaving]))) {
                        best_ratio = ratio;
                        leaving = r;
                    }
                }
            }
            if (leaving < 0) return false;  // unbounded
            pivot(leaving, entering);
        }
        throw std::runtime_error("simplex: iteration limit exceeded");
    }
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
    const int n = lp.num_vars();
    if (lp.G.size() > 0 &&
        (lp.G.cols() != n || lp.G.rows() != lp.w.size()))
        throw std::invalid_argument("solve_lp: inconsistent dimensions");
    if (!lp.c.allFinite()) throw std::invalid_argument("solve_lp: non-finite cost");

    // Fold bounds into inequality rows so a single row system G z <= w remains.
    std::vector<Eigen::RowVectorXd> rows_vec;
    std::vector<double> rhs_vec;
    for (int i = 0; i < lp.G.rows(); ++i) {
        rows_vec.emplace_back(lp.G.row(i));
        rhs_vec.push_back(lp.w(i));
    }
    // Bounds of huge magnitude act as "no bound"; folding them in as rows
    // would poison the tableau scaling.
    const double inf = 1e19;
    for (int j = 0; j < n; ++j) {
        if (lp.lo.size() == n && lp.lo(j) > -inf) {
            Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
            r(j) = -1.0;
            rows_vec.push_back(r);
            rhs_vec.push_back(-lp.lo(j));
        }
        if (lp.hi.size() == n && lp.hi(j) < inf) {
            Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
            r(j) = 1.0;
            rows_vec.push_back(r);
            rhs_vec.push_back(lp.hi(j));
        }
    }
    const int q = static_cast<int>(rows_vec.size());

    // Standard form: z = zp - zm, G(zp - zm) + s = w; columns [zp zm s art].
    const int nx = 2 * n + q;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(q, nx + q);
    Eigen::VectorXd b(q);
    Eigen::VectorXd flip = Eigen::VectorXd::Ones(q);
    for (int i = 0; i < q; ++i) {
        double f = (rhs_vec[i] < 0.0) ? -1.0 : 1.0;
        flip(i) = f;
        A.block(i, 0, 1, n) = f * rows_vec[i];
        A.block(i, n, 1, n) = -f * rows_vec[i];
        A(i, 2 * n + i) = f;           // slack
        A(i, nx + i) = 1.0;            // artificial
        b(i) = f * rhs_vec[i];
    }

    Simplex sx(A, b);
    for (int i = 0; i < q; ++i) sx.basis[i] = nx + i;

    // Phase 1: minimize the artificial sum.
    Eigen::VectorXd cost1 = Eigen::VectorXd::Zero(nx + q);
    cost1.tail(q).setOnes();
    std::vector<bool> allow_all(nx + q, true);
    sx.iterate(cost1, allow_all);

    double phase1 = 0.0;
    for (int r = 0; r < q; ++r)
        if (sx.basis[r] >= nx) phase1 += sx.b(r);
    if (phase1 > 1e-8) {
        // Farkas certificate: y_i = reduced multiplier on row i; the tableau's
        // artificial columns hold B^-1, so y = cB' B^-1 is read off directly.
        Eigen::VectorXd y(q);
        for (int i = 0; i < q; ++i) {
            double yi = 0.0;
            for (int r = 0; r < q; ++r)
                yi += (sx.basis[r] >= nx ? 1.0 : 0.0) * sx.A(r, nx + i);
            y(i) = yi;
        }
        LpResult res;
        res.status = LpStatus::Infeasible;
        res.certificate = -(flip.asDiagonal() * y);
        for (int i = 0; i < q; ++i)
            if (res.certificate(i) < 0.0 && res.certificate(i) > -1e-9)
                res.certificate(i) = 0.0;
        return res;
    }

    // Drive any residual artificials out of the basis.
    for (int r = 0; r < q; ++r) {
        if (sx.basis[r] < nx) continue;
        int col = -1;
        for (int j = 0; j < nx; ++j)
            if (std::abs(sx.A(r, j)) > 1e-8) { col = j; break; }
        if (col >= 0) sx.pivot(r, col);
        // else: redundant row, artificial stays basic at zero (harmless).
    }

    // Phase 2.
    Eigen::VectorXd cost2 = Eigen::VectorXd::Zero(nx + q);
    cost2.head(n) = lp.c;
    cost2.segment(n, n) = -lp.c;
    std::vector<bool> allow(nx + q, true);
    for (int j = nx; j < nx + q; ++j) allow[j] = false;
    if (!sx.iterate(cost2, allow)) {
        LpResult res;
        res.status = LpStatus::Unbounded;
        return res;
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(nx + q);
    for (int r = 0; r < q; ++r) x(sx.basis[r]) = sx.b(r);
    LpResult res;
    res.status = LpStatus::Optimal;
    res.z = x.head(n) - x.segment(n, n);
    res.objective = lp.c.dot(res.z);
    return res;
}

}  // namespace rtcbf
