#include "rtcbf/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rtcbf/lp.hpp"
#include "rtcbf/qp.hpp"

namespace rtcbf {

namespace {
// Below this the diagnostic inner bound is treated as divergent. The
// sampled-data ops only reject the boundary itself: trajectories that ride a
// barrier legitimately pass through arbitrarily small positive values.
constexpr double kPsiEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

NuPolicy constant_policy(double value) {
    return [value](double, double) { return value; };
}

NuPolicy steering_policy(double nominal, double gain, double saturation,
                         double dt) {
    return [=](double, double nu) {
        const double rate =
            std::clamp(gain * (nominal - nu), -saturation, saturation);
        return std::max(0.0, nu + rate * dt);
    };
}

double nu_inner_bound(double psi_prev, double psi_dot_prev) {
    if (psi_prev <= kPsiEps)
        throw SingularBoundary("nu_inner_bound: psi at or below boundary");
    return std::max(-psi_dot_prev / psi_prev, 0.0);
}

double sampled_target(double psi_next, double psi_dot_next, double nu_d,
                      double k_margin) {
    if (psi_next <= 0.0)
        throw SingularBoundary("sampled_target: psi at or below boundary");
    return std::max(-k_margin * psi_dot_next / psi_next, nu_d);
}

double top_derivative(const Eigen::VectorXd& order_stack, double nu_target,
                      double dt, double clamp) {
    const int p = static_cast<int>(order_stack.size());
    double predicted = 0.0, pow_dt = 1.0, fact = 1.0;
    for (int j = 0; j < p; ++j) {
        predicted += order_stack(j) * pow_dt / fact;
        pow_dt *= dt;
        fact *= (j + 1);
    }
    const double w = (nu_target - predicted) * fact / pow_dt;
    return std::clamp(w, -clamp, clamp);
}

double nu_final_bound_single(const DerivedBarrierStack& stack,
                             const Eigen::MatrixXd& input_A,
                             const Eigen::VectorXd& input_b) {
    const double psi = stack.psi(stack.order() - 1);
    if (psi <= 0.0)
        throw SingularBoundary("nu_final_bound_single: psi at or below boundary");
    LinearProgram lp;
    lp.c = -stack.B_psi.transpose();  // maximize B_psi u
    lp.G = input_A;
    lp.w = input_b;
    const LpResult r = solve_lp(lp);
    if (r.status == LpStatus::Unbounded)
        throw std::invalid_argument("nu_final_bound_single: unbounded input set");
    if (r.status == LpStatus::Infeasible)
        throw std::invalid_argument("nu_final_bound_single: empty input set");
    const double sup = stack.a_psi + stack.B_psi.dot(r.z);
    return std::max(-sup / psi, 0.0);
}

std::vector<double> nu_final_bounds_multi(
    const std::vector<const DerivedBarrierStack*>& stacks,
    const Eigen::MatrixXd& input_A, const Eigen::VectorXd& input_b) {
    const int n = static_cast<int>(stacks.size());
    const int m = static_cast<int>(input_A.cols());
    for (const auto* s : stacks)
        if (s->psi(s->order() - 1) <= 0.0)
            throw SingularBoundary("nu_final_bounds_multi: psi at boundary");

    // Decision (u, nu_1..nu_n): min sum nu, rows
    //   -B_i u - psi_i nu_i <= a_i  and  A_u u <= b_u;  nu >= 0.
    LinearProgram lp;
    lp.c = Eigen::VectorXd::Zero(m + n);
    lp.c.tail(n).setOnes();
    lp.G = Eigen::MatrixXd::Zero(n + input_A.rows(), m + n);
    lp.w = Eigen::VectorXd::Zero(n + input_A.rows());
    for (int i = 0; i < n; ++i) {
        lp.G.block(i, 0, 1, m) = -stacks[i]->B_psi;
        lp.G(i, m + i) = -stacks[i]->psi(stacks[i]->order() - 1);
        lp.w(i) = stacks[i]->a_psi;
    }
    lp.G.bottomLeftCorner(input_A.rows(), m) = input_A;
    lp.w.tail(input_A.rows()) = input_b;
    lp.lo = Eigen::VectorXd::Constant(m + n, -kInf);
    lp.lo.tail(n).setZero();

    const LpResult r = solve_lp(lp);
    if (r.status != LpStatus::Optimal)
        throw std::runtime_error("nu_final_bounds_multi: LP did not solve");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = std::max(0.0, r.z(m + i));
    return out;
}

double shape_alpha(const Eigen::VectorXd& u_r, const Eigen::VectorXd& u_d,
                   double dh_dt, double lf_h, const Eigen::RowVectorXd& lg_h) {
    const double base = -dh_dt - lf_h - lg_h.dot(u_r);
    const double norm = lg_h.norm();
    if (norm == 0.0) return base;
    const double along_d = lg_h.dot(u_d);
    const double along_r = lg_h.dot(u_r);
    if (along_d >= along_r)
        return std::sqrt(2.0) * lg_h.dot(u_r - u_d) / norm + base;
    const Eigen::VectorXd u_prime =
        u_d + (1.0 / std::sqrt(2.0)) * lg_h.transpose() * (lg_h * (u_r - u_d));
    return std::sqrt(2.0) * lg_h.dot(u_r - u_prime) / norm + base;
}

double shape_nu(double h, double dh_dt, double lf_h,
                const Eigen::RowVectorXd& lg_h, const Eigen::VectorXd& u_r,
                const Eigen::VectorXd& u_d) {
    if (h <= 0.0) throw std::invalid_argument("shape_nu: requires h > 0");
    const double norm = lg_h.norm();
    if (norm == 0.0) throw std::invalid_argument("shape_nu: requires ||Lgh|| > 0");
    return (std::sqrt(2.0) * lg_h.dot(u_r - u_d) / norm - dh_dt + lf_h +
            lg_h.dot(u_d)) / h;
}

StepResult controller_qp(const ControlProblem& problem,
                         const std::vector<ClassKChain>& chains, double t,
                         const Eigen::VectorXd& state) {
    const int m = problem.system.input_dim;
    const int n_bar = static_cast<int>(problem.barriers.size());
    const bool has_clf = problem.lyapunov.has_value();
    const int p = m + (has_clf ? 1 : 0);

    StepResult res;
    res.chains = chains;
    res.stacks.reserve(n_bar);
    for (int i = 0; i < n_bar; ++i)
        res.stacks.push_back(
            derived_barriers(problem.barriers[i], chains[i], t, state));

    QuadraticProgram qp;
    qp.H = Eigen::MatrixXd::Zero(p, p);
    qp.H.topLeftCorner(m, m) =
        2.0 * problem.input_cost_weight * Eigen::MatrixXd::Identity(m, m);
    qp.q = Eigen::VectorXd::Zero(p);
    const Eigen::VectorXd u_ref =
        problem.reference ? problem.reference(t, state)
                          : Eigen::VectorXd::Zero(m);
    qp.q.head(m) = -2.0 * problem.input_cost_weight * u_ref;
    if (has_clf) qp.H(m, m) = 2.0 * problem.lyapunov->slack_weight;

    const int q_rows = static_cast<int>(problem.system.input_A.rows());
    qp.G = Eigen::MatrixXd::Zero(n_bar + (has_clf ? 1 : 0) + q_rows, p);
    qp.w = Eigen::VectorXd::Zero(qp.G.rows());
    int row = 0;
    for (int i = 0; i < n_bar; ++i, ++row) {
        const LinearConstraintRow r =
            hocbf_row(res.stacks[i], chains[i].nu(chains[i].relative_degree()));
        qp.G.block(row, 0, 1, m) = -r.c;  // flip >= to <=
        qp.w(row) = -r.d;
    }
    if (has_clf) {
        const LinearConstraintRow r = clf_row(*problem.lyapunov, t, state);
        qp.G.row(row) = r.c;
        qp.w(row) = r.d;
        ++row;
    }
    qp.G.block(row, 0, q_rows, m) = problem.system.input_A;
    qp.w.tail(q_rows) = problem.system.input_b;

    const QpResult sol = solve_qp(qp);
    if (sol.status != QpStatus::Optimal) {
        res.ok = false;
        res.reason = FailureReason::Incompatible;
        return res;
    }
    res.ok = true;
    res.u = sol.z.head(m);
    res.delta = has_clf ? sol.z(m) : 0.0;
    return res;
}

StepResult rtcbf_step(const ControlProblem& problem,
                      const std::vector<ClassKChain>& chains, double t,
                      const Eigen::VectorXd& state,
                      const AdaptationConfig& config) {
    StepResult res = controller_qp(problem, chains, t, state);
    if (!res.ok) return res;

    const double dt = config.dt;
    const int n_bar = static_cast<int>(problem.barriers.size());

    const auto desired = [&](int i, int k) {
        const double nu_now = res.chains[i].nu(k);
        if (i < static_cast<int>(config.nu_desired.size()) &&
            k - 1 < static_cast<int>(config.nu_desired[i].size()) &&
            config.nu_desired[i][k - 1])
            return config.nu_desired[i][k - 1](t, nu_now);
        return nu_now;
    };
    // Steers order k of chain i to nu_target over dt and advances only that
    // order's stack to its t+dt value (the other orders keep their time-t
    // stacks until their own turn).
    const auto advance_order = [&](int i, int k, double target) {
        const Eigen::VectorXd& stack = res.chains[i].stack(k);
        const double w =
            top_derivative(stack, target, dt, config.top_derivative_clamp);
        const double unclamped = top_derivative(
            stack, target, dt, std::numeric_limits<double>::infinity());
        if (std::abs(unclamped) > config.top_derivative_clamp)
            res.clamped = true;
        std::vector<double> ws(res.chains[i].relative_degree(), 0.0);
        ws[k - 1] = w;
        const ClassKChain adv = integrate_theta_chain(res.chains[i], ws, dt);
        res.chains[i].raw_stacks()[k - 1] = adv.stack(k);
    };

    try {
        const Eigen::VectorXd x_next =
            step_plant(problem.system, t, state, res.u, dt);

        // Orders update in sequence: psi^{k-1}(t+dt) depends only on orders
        // below k, so each bound is evaluated on the already-updated lower
        // part of the chain.
        for (int i = 0; i < n_bar; ++i) {
            const int r = problem.barriers[i].relative_degree;
            for (int k = 1; k < r; ++k) {
                const DerivedBarrierStack next = derived_barriers(
                    problem.barriers[i], res.chains[i], t + dt, x_next);
                const double target =
                    sampled_target(next.psi(k - 1), next.psi_dot(k - 1),
                                   desired(i, k), config.k_margin);
                advance_order(i, k, target);
            }
        }

        std::vector<DerivedBarrierStack> next_stacks;
        next_stacks.reserve(n_bar);
        for (int i = 0; i < n_bar; ++i)
            next_stacks.push_back(derived_barriers(
                problem.barriers[i], res.chains[i], t + dt, x_next));

        std::vector<double> final_bounds(n_bar);
        if (n_bar == 1) {
            final_bounds[0] = nu_final_bound_single(
                next_stacks[0], problem.system.input_A, problem.system.input_b);
        } else {
            std::vector<const DerivedBarrierStack*> ptrs;
            for (const auto& s : next_stacks) ptrs.push_back(&s);
            final_bounds = nu_final_bounds_multi(ptrs, problem.system.input_A,
                                                 problem.system.input_b);
        }

        for (int i = 0; i < n_bar; ++i) {
            const int r = problem.barriers[i].relative_degree;
            const double target = std::max(config.k_margin * final_bounds[i],
                                           desired(i, r));
            advance_order(i, r, target);
        }
    } catch (const SingularBoundary&) {
        res.ok = false;
        res.reason = FailureReason::Boundary;
    }
    return res;
}

}  // namespace rtcbf
