#include "motorlab/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace motorlab {

bool adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, OptimizerState& state, const AdamConfig& cfg) {
    if (params.size() != grad.size() || state.m.size() != grad.size() || state.v.size() != grad.size()) {
        throw std::invalid_argument("adam_step: parameter, gradient and moment sizes differ");
    }
    if (!grad.allFinite()) return false;

    ++state.step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        const double g = grad[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
    return true;
}

}  // namespace motorlab
