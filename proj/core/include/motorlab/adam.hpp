#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace motorlab {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct OptimizerState {
    Eigen::VectorXd m;  // first moment
    Eigen::VectorXd v;  // second moment
    std::int64_t step = 0;

    static OptimizerState zeros(Eigen::Index n) { return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0}; }
};

/// Bias-corrected Adam update, elementwise. A gradient containing a non-finite entry leaves
/// parameters and state untouched and returns false.
bool adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, OptimizerState& state, const AdamConfig& cfg);

}  // namespace motorlab
