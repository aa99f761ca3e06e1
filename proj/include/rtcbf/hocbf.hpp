#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rtcbf/chain.hpp"
#include "rtcbf/system.hpp"

namespace rtcbf {

enum class RowSense { Ge, Le };

// One affine constraint row c * z  (>= or <=)  d over the decision vector.
struct LinearConstraintRow {
    Eigen::RowVectorXd c;
    double d = 0.0;
    RowSense sense = RowSense::Ge;
    std::string tag;
};

// Derived barrier stack psi^0..psi^{r-1} for linear class-K functions, with
// the input-affine split of d(psi^{r-1})/dt and the coefficient bookkeeping
// psi^k = sum_j coeff[k][j] * h^(j).
struct DerivedBarrierStack {
    Eigen::VectorXd psi;        // psi^0..psi^{r-1}
    Eigen::VectorXd psi_dot;    // d(psi^k)/dt for k = 0..r-2 (input-free)
    double a_psi = 0.0;         // drift part of d(psi^{r-1})/dt
    Eigen::RowVectorXd B_psi;   // input row of d(psi^{r-1})/dt
    // coeff[k](j): coefficient of h^(j) in psi^k. coeff_dot is its time
    // derivative under the stored parameter-chain motion.
    std::vector<Eigen::VectorXd> coeff;
    std::vector<Eigen::VectorXd> coeff_dot;
    Eigen::VectorXd h_derivs;   // the oracle's h, h^(1), .., h^(r-1)

    int order() const { return static_cast<int>(psi.size()); }
};

// Forward recursion psi^k = d(psi^{k-1})/dt + nu^k psi^{k-1} evaluated at
// (t, state). Throws on order mismatch or a non-finite oracle sample.
DerivedBarrierStack derived_barriers(const BarrierSpec& barrier,
                                     const ClassKChain& chain, double t,
                                     const Eigen::VectorXd& state);

// HOCBF row  B_psi u >= -a_psi - nu_top psi^{r-1}  over u.
LinearConstraintRow hocbf_row(const DerivedBarrierStack& stack, double nu_top);

// CLF row  p + Q u <= -k V + delta  over the augmented variable (u, delta).
LinearConstraintRow clf_row(const LyapunovSpec& lyap, double t,
                            const Eigen::VectorXd& state);

}  // namespace rtcbf
