#include "rtcbf/chain.hpp"

#include <cmath>
#include <stdexcept>

namespace rtcbf {

ClassKChain::ClassKChain(int relative_degree, const std::vector<double>& nu_init,
                         double nu_min)
    : nu_min_(nu_min) {
    if (relative_degree < 1)
        throw std::invalid_argument("ClassKChain: relative degree must be >= 1");
    if (static_cast<int>(nu_init.size()) != relative_degree)
        throw std::invalid_argument("ClassKChain: need one initial slope per order");
    if (nu_min < 0.0)
        throw std::invalid_argument("ClassKChain: nu_min must be >= 0");
    stacks_.resize(relative_degree);
    for (int k = 1; k <= relative_degree; ++k) {
        if (nu_init[k - 1] < nu_min)
            throw std::invalid_argument("ClassKChain: initial slope below nu_min");
        stacks_[k - 1] = Eigen::VectorXd::Zero(relative_degree - k + 1);
        stacks_[k - 1](0) = nu_init[k - 1];
    }
}

bool ClassKChain::valid() const {
    const int r = relative_degree();
    if (r < 1) return false;
    for (int k = 1; k <= r; ++k) {
        if (stacks_[k - 1].size() != r - k + 1) return false;
        if (!stacks_[k - 1].allFinite()) return false;
        if (stacks_[k - 1](0) < nu_min_) return false;
    }
    return true;
}

ClassKChain integrate_theta_chain(const ClassKChain& chain,
                                  const std::vector<double>& top_inputs,
                                  double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("integrate_theta_chain: dt must be > 0");
    if (!chain.valid())
        throw std::invalid_argument("integrate_theta_chain: invalid chain");
    const int r = chain.relative_degree();
    if (static_cast<int>(top_inputs.size()) != r)
        throw std::invalid_argument("integrate_theta_chain: one input per order");

    ClassKChain out = chain;
    for (int k = 1; k <= r; ++k) {
        const double input = top_inputs[k - 1];
        if (!std::isfinite(input))
            throw std::invalid_argument("integrate_theta_chain: non-finite input");
        const Eigen::VectorXd& s = chain.stack(k);
        const int p = static_cast<int>(s.size());
        Eigen::VectorXd next(p);
        for (int j = 0; j < p; ++j) {
            // Exact Taylor update of the pure integrator chain.
            double v = 0.0, pow_dt = 1.0, fact = 1.0;
            for (int l = j; l < p; ++l) {
                v += s(l) * pow_dt / fact;
                pow_dt *= dt;
                fact *= (l - j + 1);
            }
            v += input * pow_dt / fact;
            next(j) = v;
        }
        if (next(0) < chain.nu_min()) {
            next.setZero();
            next(0) = chain.nu_min();
        }
        out.raw_stacks()[k - 1] = next;
    }
    return out;
}

}  // namespace rtcbf
