#include "rtcbf/hocbf.hpp"

#include <cmath>
#include <stdexcept>

namespace rtcbf {

namespace {

double binom(int n, int k) {
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
    return v;
}

}  // namespace

DerivedBarrierStack derived_barriers(const BarrierSpec& barrier,
                                     const ClassKChain& chain, double t,
                                     const Eigen::VectorXd& state) {
    const int r = barrier.relative_degree;
    if (chain.relative_degree() != r)
        throw std::invalid_argument("derived_barriers: chain order mismatch");
    const BarrierSample s = barrier.oracle(t, state);
    if (static_cast<int>(s.h_derivs.size()) != r)
        throw std::invalid_argument("derived_barriers: oracle returned wrong count");
    if (!s.h_derivs.allFinite() || !std::isfinite(s.a) || !s.B.allFinite())
        throw std::invalid_argument("derived_barriers: non-finite oracle sample");

    // C[k] holds, at level k, the derivatives of the h^(j)-coefficients:
    // C[k](d, j) = d-th time derivative of coeff of h^(j) in psi^k, for
    // d <= r - k. Level recursion (Leibniz on nu^k * psi^{k-1}):
    //   C_k^(d)[j] = C_{k-1}^(d+1)[j] + C_{k-1}^(d)[j-1]
    //                + sum_e binom(d,e) (nu^k)^(e) C_{k-1}^(d-e)[j]
    std::vector<Eigen::MatrixXd> C(r);
    C[0] = Eigen::MatrixXd::Zero(r + 1, r);
    C[0](0, 0) = 1.0;
    for (int k = 1; k <= r - 1; ++k) {
        const Eigen::MatrixXd& P = C[k - 1];
        Eigen::MatrixXd N = Eigen::MatrixXd::Zero(r + 1, r);
        for (int d = 0; d <= r - k; ++d) {
            for (int j = 0; j <= k; ++j) {
                double v = P(d + 1, j);
                if (j > 0) v += P(d, j - 1);
                for (int e = 0; e <= d; ++e)
                    v += binom(d, e) * chain.nu_derivative(k, e) * P(d - e, j);
                N(d, j) = v;
            }
        }
        C[k] = std::move(N);
    }

    DerivedBarrierStack out;
    out.h_derivs = s.h_derivs;
    out.psi.resize(r);
    out.psi_dot.resize(std::max(0, r - 1));
    out.coeff.resize(r);
    out.coeff_dot.resize(r);
    for (int k = 0; k < r; ++k) {
        out.coeff[k] = C[k].row(0).head(r).transpose();
        out.coeff_dot[k] = C[k].row(1).head(r).transpose();
        out.psi(k) = out.coeff[k].dot(s.h_derivs);
        if (k < r - 1) {
            // Input-free since the highest h-derivative used is h^(k+1).
            double pd = 0.0;
            for (int j = 0; j <= k; ++j) {
                pd += out.coeff_dot[k](j) * s.h_derivs(j);
                pd += out.coeff[k](j) * s.h_derivs(j + 1);
            }
            out.psi_dot(k) = pd;
        }
    }
    // d(psi^{r-1})/dt picks up h^(r) = a + B u through the leading coefficient.
    double a_psi = 0.0;
    for (int j = 0; j < r; ++j) a_psi += out.coeff_dot[r - 1](j) * s.h_derivs(j);
    for (int j = 0; j + 1 < r; ++j) a_psi += out.coeff[r - 1](j) * s.h_derivs(j + 1);
    a_psi += out.coeff[r - 1](r - 1) * s.a;
    out.a_psi = a_psi;
    out.B_psi = out.coeff[r - 1](r - 1) * s.B;
    return out;
}

LinearConstraintRow hocbf_row(const DerivedBarrierStack& stack, double nu_top) {
    if (nu_top < 0.0)
        throw std::invalid_argument("hocbf_row: nu_top must be >= 0");
    LinearConstraintRow row;
    row.c = stack.B_psi;
    row.d = -stack.a_psi - nu_top * stack.psi(stack.order() - 1);
    row.sense = RowSense::Ge;
    return row;
}

LinearConstraintRow clf_row(const LyapunovSpec& lyap, double t,
                            const Eigen::VectorXd& state) {
    const LyapunovSample s = lyap.oracle(t, state);
    const int m = static_cast<int>(s.Q.size());
    LinearConstraintRow row;
    row.c.resize(m + 1);
    row.c.head(m) = s.Q;
    row.c(m) = -1.0;  // -delta
    row.d = -lyap.rate * s.V - s.p;
    row.sense = RowSense::Le;
    row.tag = "clf";
    return row;
}

}  // namespace rtcbf
