#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "motorlab/plant.hpp"

namespace motorlab {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Flat parameter or gradient vector in the order M, B, C, b1, b2 (matrices row-major).
using ParamVector = Eigen::VectorXd;
using GradientVector = Eigen::VectorXd;

/// Controller input z = (omega_ref, omega_e, i_d, i_q).
inline constexpr int kRnnInputs = 4;

/// ReLU RNN controller parameters. The recurrent matrix is never stored directly; it is
/// derived from M through the Lipschitz decomposition (see effective_A).
struct RnnParams {
    int hidden = 128;
    double beta = 0.85;
    double gamma = 0.01;
    std::uint64_t seed = 0;

    RowMatrix M;   // hidden x hidden
    RowMatrix B;   // hidden x 4
    RowMatrix C;   // 2 x hidden
    Eigen::VectorXd b1;
    Eigen::Vector2d b2 = Eigen::Vector2d::Zero();

    /// Zero-filled parameters of the given size.
    static RnnParams zeros(int hidden, double beta = 0.85, double gamma = 0.01);

    [[nodiscard]] Eigen::Index parameter_count() const;
    [[nodiscard]] ParamVector to_flat() const;
    void assign_flat(const ParamVector& flat);

    /// Throws DomainError on shape mismatch, beta outside [0,1], gamma <= 0 or non-finite entries.
    void validate() const;
};

/// A = (1 - beta)(M + M^T) + beta (M - M^T) - gamma I.
Eigen::MatrixXd effective_A(const RnnParams& rnn);

/// dL/dM given dL/dA (adjoint of effective_A).
RowMatrix effective_A_adjoint(const RnnParams& rnn, const Eigen::MatrixXd& grad_A);

/// Xavier-uniform M (gain 0.1, fans N_h/N_h) and B (gain 1e-6, fans 4/N_h), C ~ U[-1e-6, 1e-6],
/// zero biases. Bitwise deterministic in (seed, hidden).
RnnParams init_rnn(std::uint64_t seed, int hidden, double beta = 0.85, double gamma = 0.01);

struct RnnState {
    Eigen::VectorXd h;

    static RnnState zeros(int hidden) { return {Eigen::VectorXd::Zero(hidden)}; }
};

using RnnInput = Eigen::Vector4d;

inline RnnInput rnn_input(double omega_ref, const PlantState& s) { return {omega_ref, s.omega_e, s.i_d, s.i_q}; }

struct RnnStepResult {
    VoltageInput v;         // clamped output
    Eigen::Vector2d scaled; // V_max * (C h' + b2), before clamping
    RnnState next;
};

/// h' = ReLU(A h + B z + b1); v = clamp(V_max (C h' + b2)). `A` must be effective_A(rnn).
RnnStepResult rnn_step(const RnnParams& rnn, const Eigen::MatrixXd& A, const RnnState& state, const RnnInput& z,
                       double v_max);

/// Convenience overload that derives A on every call.
RnnStepResult rnn_step(const RnnParams& rnn, const RnnState& state, const RnnInput& z, double v_max);

/// Jacobian of clamp_voltage at w (row-major 2x2). Identity strictly inside the disc; on or
/// outside the boundary the radial-projection Jacobian (v_max/|w|)(I - w w^T/|w|^2).
std::array<double, 4> clamp_voltage_jacobian(const Eigen::Vector2d& w, double v_max);

/// Stateful controller for rollouts; shares read-only parameters across episodes.
class RnnController {
public:
    RnnController(std::shared_ptr<const RnnParams> params, double v_max);

    void reset() { state_ = RnnState::zeros(params_->hidden); }
    VoltageInput operator()(double omega_ref, const PlantState& plant);

    [[nodiscard]] const RnnParams& params() const { return *params_; }
    [[nodiscard]] const Eigen::MatrixXd& A() const { return *A_; }
    [[nodiscard]] const RnnState& state() const { return state_; }
    [[nodiscard]] double v_max() const { return v_max_; }

private:
    std::shared_ptr<const RnnParams> params_;
    std::shared_ptr<const Eigen::MatrixXd> A_;
    double v_max_;
    RnnState state_;
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kCheckpointFormatVersion = 1;

/// JSON checkpoint: format, format_version, hidden, beta, gamma, seed, and row-major arrays
/// M, B, C, b1, b2.
void save_checkpoint(const std::filesystem::path& path, const RnnParams& rnn);
RnnParams load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_to_string(const RnnParams& rnn);
RnnParams checkpoint_from_string(const std::string& text);

}  // namespace motorlab
