#pragma once

#include <Eigen/Dense>
#include <functional>

namespace rtcbf {

// Control-affine plant xdot = f(t,x) + g(t,x) u with a polytopic input set
// A_u u <= b_u. Value object; construct once and share.
struct ControlAffineSystem {
    int state_dim = 0;
    int input_dim = 0;
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> drift;
    std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> input_map;
    Eigen::MatrixXd input_A;  // q x m
    Eigen::VectorXd input_b;  // q

    // Checks the polytope is nonempty and bounded (by LP) and dimensions
    // are consistent. Throws std::invalid_argument otherwise.
    void validate() const;
};

ControlAffineSystem make_single_integrator(double u_max);
ControlAffineSystem make_double_integrator(double u_max);

// Box input polytope helper: -bound_i <= u_i <= bound_i.
void set_box_input(ControlAffineSystem& sys, const Eigen::VectorXd& lo,
                   const Eigen::VectorXd& hi);

// One RK4 step of xdot = f(t,x) + g(t,x) u with u held constant.
// Throws std::runtime_error on a non-finite result.
Eigen::VectorXd step_plant(const ControlAffineSystem& sys, double t,
                           const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           double dt);

// Oracle sample of one barrier at (t, x): input-free derivatives
// h, h^(1), ..., h^(r-1) and the affine split h^(r) = a + B u.
struct BarrierSample {
    Eigen::VectorXd h_derivs;  // r entries
    double a = 0.0;
    Eigen::RowVectorXd B;      // 1 x m
};

struct BarrierSpec {
    int relative_degree = 1;
    std::function<BarrierSample(double, const Eigen::VectorXd&)> oracle;
};

// CLF with affine derivative split Vdot = p + Q u.
struct LyapunovSample {
    double V = 0.0;
    double p = 0.0;
    Eigen::RowVectorXd Q;  // 1 x m
};

struct LyapunovSpec {
    std::function<LyapunovSample(double, const Eigen::VectorXd&)> oracle;
    double rate = 1.0;          // exponential convergence rate k
    double slack_weight = 100;  // M >> 1
};

}  // namespace rtcbf
