#include "rtcbf/system.hpp"

#include <stdexcept>

#include "rtcbf/lp.hpp"

namespace rtcbf {

void ControlAffineSystem::validate() const {
    if (state_dim < 1 || input_dim < 1)
        throw std::invalid_argument("system: dimensions must be positive");
    if (!drift || !input_map)
        throw std::invalid_argument("system: drift and input map required");
    if (input_A.rows() != input_b.size() || input_A.cols() != input_dim)
        throw std::invalid_argument("system: input polytope dimension mismatch");

    LinearProgram lp;
    lp.G = input_A;
    lp.w = input_b;
    lp.c = Eigen::VectorXd::Zero(input_dim);
    if (solve_lp(lp).status == LpStatus::Infeasible)
        throw std::invalid_argument("system: input polytope is empty");
    for (int j = 0; j < input_dim; ++j) {
        for (double sign : {1.0, -1.0}) {
            lp.c.setZero();
            lp.c(j) = sign;
            if (solve_lp(lp).status == LpStatus::Unbounded)
                throw std::invalid_argument("system: input polytope is unbounded");
        }
    }
}

void set_box_input(ControlAffineSystem& sys, const Eigen::VectorXd& lo,
                   const Eigen::VectorXd& hi) {
    const int m = sys.input_dim;
    sys.input_A = Eigen::MatrixXd::Zero(2 * m, m);
    sys.input_b = Eigen::VectorXd::Zero(2 * m);
    for (int j = 0; j < m; ++j) {
        sys.input_A(2 * j, j) = 1.0;
        sys.input_b(2 * j) = hi(j);
        sys.input_A(2 * j + 1, j) = -1.0;
        sys.input_b(2 * j + 1) = -lo(j);
    }
}

Eigen::VectorXd step_plant(const ControlAffineSystem& sys, double t,
                           const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_plant: dt must be > 0");
    auto field = [&](double tt, const Eigen::VectorXd& xx) -> Eigen::VectorXd {
        return sys.drift(tt, xx) + sys.input_map(tt, xx) * u;
    };
    const Eigen::VectorXd k1 = field(t, x);
    const Eigen::VectorXd k2 = field(t + 0.5 * dt, x + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = field(t + 0.5 * dt, x + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = field(t + dt, x + dt * k3);
    Eigen::VectorXd next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite())
        throw std::runtime_error("step_plant: non-finite state");
    return next;
}

ControlAffineSystem make_single_integrator(double u_max) {
    ControlAffineSystem sys;
    sys.state_dim = 1;
    sys.input_dim = 1;
    sys.drift = [](double, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(1);
    };
    sys.input_map = [](double, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Identity(1, 1);
    };
    set_box_input(sys, Eigen::VectorXd::Constant(1, -u_max),
                  Eigen::VectorXd::Constant(1, u_max));
    return sys;
}

ControlAffineSystem make_double_integrator(double u_max) {
    ControlAffineSystem sys;
    sys.state_dim = 2;  // (position, velocity)
    sys.input_dim = 1;
    sys.drift = [](double, const Eigen::VectorXd& x) {
        Eigen::VectorXd dx(2);
        dx << x(1), 0.0;
        return dx;
    };
    sys.input_map = [](double, const Eigen::VectorXd&) {
        Eigen::MatrixXd g(2, 1);
        g << 0.0, 1.0;
        return g;
    };
    set_box_input(sys, Eigen::VectorXd::Constant(1, -u_max),
                  Eigen::VectorXd::Constant(1, u_max));
    return sys;
}

}  // namespace rtcbf
