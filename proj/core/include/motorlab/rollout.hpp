#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "motorlab/pifoc.hpp"
#include "motorlab/plant.hpp"
#include "motorlab/reference.hpp"
#include "motorlab/rnn.hpp"

namespace motorlab {

/// Fixed-step simulation settings. The controller runs once per `dt`; the plant is advanced by
/// `plant_substeps` RK4 steps of dt/plant_substeps with the controller output held.
struct SimConfig {
    double dt = 2e-4;
    double t_sim = 2.0;
    int plant_substeps = 1;
    double divergence_limit = 1e6;

    /// N_time = t_sim / dt; throws DomainError unless it is (numerically) an integer.
    [[nodiscard]] int steps() const;
    void validate() const;
};

/// Classical four-stage Runge-Kutta step for dx/dt = f(x); inputs are captured by `f` and
/// therefore held constant across the stages.
template <class State, class Field>
State rk4_step(Field&& f, const State& x, double dt) {
    const State k1 = f(x);
    const State k2 = f(x + (0.5 * dt) * k1);
    const State k3 = f(x + (0.5 * dt) * k2);
    const State k4 = f(x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Advances the plant over one controller period (all substeps), inputs held.
PlantState advance_plant(const MotorParams& params, const PlantState& x, const VoltageInput& v, double load_torque,
                         const SimConfig& cfg);

/// Reverse-mode product through advance_plant: given dL/dx_next, returns dL/dx and
/// accumulates dL/dv into `grad_v`.
PlantState advance_plant_vjp(const MotorParams& params, const PlantState& x, const VoltageInput& v, double load_torque,
                             const SimConfig& cfg, const PlantState& grad_next, VoltageInput& grad_v);

/// Recorded episode. State-indexed arrays hold steps()+1 samples, input-indexed arrays hold
/// steps() samples. A diverged episode is truncated at the last finite state.
struct Trajectory {
    double dt = 0.0;
    int planned_steps = 0;
    bool diverged = false;

    std::vector<double> t, omega_ref, i_d, i_q, omega_e, P_cu, P_mech, T_e;  // state-indexed
    std::vector<double> v_d, v_q, T_L, P_elec;                               // input-indexed
    std::vector<double> i_d_ref, i_q_ref;  // PI-FOC current references (input-indexed) or empty

    [[nodiscard]] int steps() const { return static_cast<int>(v_d.size()); }
    [[nodiscard]] PlantState state(int k) const { return {i_d[k], i_q[k], omega_e[k]}; }
    [[nodiscard]] VoltageInput voltage(int k) const { return {v_d[k], v_q[k]}; }
    [[nodiscard]] PlantState final_state() const { return state(static_cast<int>(i_d.size()) - 1); }
};

/// One row per state sample; input columns are blank on the final row.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

struct ZeroController {
    void reset() {}
    VoltageInput operator()(double, const PlantState&) { return {}; }
};

using AnyController = std::variant<ZeroController, PiFocController, RnnController>;

/// Recipe for building fresh controller instances, one per episode.
struct ControllerSpec {
    enum class Kind { Zero, PiFoc, Rnn };

    Kind kind = Kind::Zero;
    PIGains gains;
    CurrentStrategy strategy = CurrentStrategy::MaxCurrent;
    MotorParams model;  // the controller's belief about the machine
    std::shared_ptr<const RnnParams> rnn;
    std::string id = "zero";

    static ControllerSpec zero();
    static ControllerSpec pifoc(const PIGains& gains, CurrentStrategy strategy, const MotorParams& model);
    static ControllerSpec rnn_controller(std::shared_ptr<const RnnParams> params, const MotorParams& model,
                                         std::string id = "rnn");

    [[nodiscard]] AnyController instantiate(const SimConfig& cfg) const;
};

/// Closed-loop simulation: at every step read (reference, state), emit v (held for dt),
/// advance the plant. `plant` is the simulated machine.
Trajectory simulate(AnyController& controller, const MotorParams& plant, const ReferenceProfile& reference,
                    const TorqueProfile& torque, const SimConfig& cfg, const PlantState& initial);

Trajectory simulate(const ControllerSpec& spec, const MotorParams& plant, const ReferenceProfile& reference,
                    const TorqueProfile& torque, const SimConfig& cfg, const PlantState& initial);

enum class TapeMode {
    Full,         // every hidden state stored
    Checkpointed  // hidden states every ~sqrt(N) steps, segments recomputed in reverse
};

/// RNN episode plus whatever the reverse pass needs. Plant states live in `traj`.
struct RnnRollout {
    Trajectory traj;
    TapeMode mode = TapeMode::Full;
    int stride = 1;     // steps between stored hidden states
    RowMatrix hidden;   // row r holds h at step r * stride
    TorqueProfile torque;
};

RnnRollout simulate_rnn(const RnnParams& rnn, const Eigen::MatrixXd& A, const MotorParams& plant,
                        const ReferenceProfile& reference, const TorqueProfile& torque, const SimConfig& cfg,
                        const PlantState& initial, TapeMode mode = TapeMode::Full);

/// Loss sensitivities with respect to the recorded signals of one trajectory.
struct TrajectorySeeds {
    std::vector<PlantState> d_state;      // dL/dx_k, k = 0..steps
    std::vector<VoltageInput> d_voltage;  // dL/dv_k, k = 0..steps-1

    static TrajectorySeeds zeros(const Trajectory& traj);
};

/// Exact reverse-mode gradient of a trajectory loss with respect to the flat RNN parameters.
/// Plant parameters are constants; ReLU uses 1[pre-activation > 0]; the clamp uses
/// clamp_voltage_jacobian. Throws std::logic_error on tape / seed / parameter mismatches.
GradientVector backward(const RnnParams& rnn, const Eigen::MatrixXd& A, const MotorParams& plant,
                        const RnnRollout& rollout, const TrajectorySeeds& seeds, const SimConfig& cfg);

}  // namespace motorlab
