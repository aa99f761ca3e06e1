#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rtcbf/chain.hpp"
#include "rtcbf/hocbf.hpp"
#include "rtcbf/system.hpp"

namespace rtcbf {

// The pointwise bounds diverge when the derived barrier reaches zero.
struct SingularBoundary : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Desired-parameter policy: (t, current nu) -> nu_d >= 0.
using NuPolicy = std::function<double(double, double)>;

NuPolicy constant_policy(double value);
// Proportional steering toward `nominal`, rate saturated at `saturation`.
NuPolicy steering_policy(double nominal, double gain, double saturation,
                         double dt);

struct AdaptationConfig {
    double k_margin = 1.2;           // >= 1
    double dt = 0.01;                // sampling time
    double top_derivative_clamp = 1e3;
    // One policy per barrier per order; missing entries behave as
    // "hold the current value".
    std::vector<std::vector<NuPolicy>> nu_desired;
};

// Eq-25-style inner bound: smallest admissible nu^k for orders k < r.
double nu_inner_bound(double psi_prev, double psi_dot_prev);

// Sampled-data target max(-k_margin * psi_dot/psi, nu_d).
double sampled_target(double psi_next, double psi_dot_next, double nu_d,
                      double k_margin);

// Top-derivative input that steers the integrator chain of order stack to
// nu_target over dt (exact when unclamped).
double top_derivative(const Eigen::VectorXd& order_stack, double nu_target,
                      double dt, double clamp);

// Worst-case final-order bound for a single constraint (LP over the input
// polytope inside).
double nu_final_bound_single(const DerivedBarrierStack& stack,
                             const Eigen::MatrixXd& input_A,
                             const Eigen::VectorXd& input_b);

// Joint final-order bounds: min sum nu_i s.t. a_i + B_i u >= -nu_i psi_i,
// nu_i >= 0, u in the polytope.
std::vector<double> nu_final_bounds_multi(
    const std::vector<const DerivedBarrierStack*>& stacks,
    const Eigen::MatrixXd& input_A, const Eigen::VectorXd& input_b);

// Response shaping (three-case piecewise alpha value).
double shape_alpha(const Eigen::VectorXd& u_r, const Eigen::VectorXd& u_d,
                   double dh_dt, double lf_h, const Eigen::RowVectorXd& lg_h);

// Linear-family slope realizing the shaped response; requires h > 0 and
// ||Lgh|| > 0.
double shape_nu(double h, double dh_dt, double lf_h,
                const Eigen::RowVectorXd& lg_h, const Eigen::VectorXd& u_r,
                const Eigen::VectorXd& u_d);

enum class FailureReason { None, Incompatible, Boundary };

struct ControlProblem {
    ControlAffineSystem system;
    std::vector<BarrierSpec> barriers;
    std::optional<LyapunovSpec> lyapunov;
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> reference;
    double input_cost_weight = 1.0;
};

struct StepResult {
    bool ok = false;
    FailureReason reason = FailureReason::None;
    Eigen::VectorXd u;
    double delta = 0.0;  // CLF slack at the optimum
    std::vector<ClassKChain> chains;
    std::vector<DerivedBarrierStack> stacks;  // at (t, state)
    bool clamped = false;  // some top derivative hit its clamp
};

// Solves the controller QP at (t, state). Shared by the fixed-parameter and
// adaptive paths.
StepResult controller_qp(const ControlProblem& problem,
                         const std::vector<ClassKChain>& chains, double t,
                         const Eigen::VectorXd& state);

// One sampled-data adaptation step: controller QP, one-step prediction,
// pointwise sufficient bounds, chain advance.
StepResult rtcbf_step(const ControlProblem& problem,
                      const std::vector<ClassKChain>& chains, double t,
                      const Eigen::VectorXd& state,
                      const AdaptationConfig& config);

}  // namespace rtcbf
