#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rtcbf {

// Per-order linear class-K slopes nu^k and their derivative stacks.
// For a barrier of relative degree r, order k in {1..r} stores
// [nu^k, d(nu^k)/dt, ..., (nu^k)^(r-k)] -- r-k+1 entries -- and the
// designed input is the (r-k+1)-th derivative.
class ClassKChain {
  public:
    ClassKChain() = default;

    // Initializes every order's stack to [nu_init[k-1], 0, ..., 0].
    ClassKChain(int relative_degree, const std::vector<double>& nu_init,
                double nu_min = 0.0);

    int relative_degree() const { return static_cast<int>(stacks_.size()); }
    double nu_min() const { return nu_min_; }

    // 1-based order accessors matching the nu^k notation.
    double nu(int order) const { return stacks_[order - 1](0); }
    // d-th derivative of nu^order (d = 0 is the value itself).
    double nu_derivative(int order, int d) const { return stacks_[order - 1](d); }
    const Eigen::VectorXd& stack(int order) const { return stacks_[order - 1]; }

    std::vector<Eigen::VectorXd>& raw_stacks() { return stacks_; }
    const std::vector<Eigen::VectorXd>& raw_stacks() const { return stacks_; }

    bool valid() const;

  private:
    std::vector<Eigen::VectorXd> stacks_;
    double nu_min_ = 0.0;
};

// Advances every order's integrator chain by dt with the given top
// derivative as input (exact polynomial update). If a slope lands below
// nu_min it is floored there and that order's stored derivatives reset to 0.
// Throws std::invalid_argument on non-finite inputs or dt <= 0.
ClassKChain integrate_theta_chain(const ClassKChain& chain,
                                  const std::vector<double>& top_inputs,
                                  double dt);

}  // namespace rtcbf
