#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "motorlab/config.hpp"
#include "motorlab/plant.hpp"

namespace motorlab {

/// Raised when a current-reference strategy cannot be evaluated for the given machine.
class StrategyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Cascaded PI gains, anti-windup bounds and current-reference limits (benchmark tuning by default).
/// Integral gains are k_i = k_p / T_i.
///
/// The d-axis reference window [-100, -5] A is kept as tabulated even though its "max" is negative;
/// with limiters enabled the d-axis reference therefore never rises above -5 A.
struct PIGains {
    double kp_w = 0.100;
    double Ti_w = 0.100;
    double kp_d = 5.60;
    double Ti_d = 0.0295;
    double kp_q = 9.50;
    double Ti_q = 0.0500;

    double s_w_max = 5.0;
    double s_w_min = -1.0;
    double s_id_max = 1.0;
    double s_id_min = -0.03;
    double s_iq_max = 0.02;
    double s_iq_min = -0.01;

    double id_ref_max = -5.0;
    double id_ref_min = -100.0;
    double iq_ref_max = 8.0;
    double iq_ref_min = -100.0;

    bool limiters_enabled = false;

    [[nodiscard]] double ki_w() const { return kp_w / Ti_w; }
    [[nodiscard]] double ki_d() const { return kp_d / Ti_d; }
    [[nodiscard]] double ki_q() const { return kp_q / Ti_q; }

    void validate() const;
};

/// Optional keys: kp_w, Ti_w, kp_d, Ti_d, kp_q, Ti_q, s_w_max, s_w_min, s_id_max, s_id_min,
/// s_iq_max, s_iq_min, id_ref_max, id_ref_min, iq_ref_max, iq_ref_min, limiters.
PIGains pi_gains_from_config(const KeyValueConfig& cfg, PIGains defaults = {});

/// Integrator states of the d-current, q-current and speed loops.
struct PIState {
    double s_id = 0.0;
    double s_iq = 0.0;
    double s_w = 0.0;
};

enum class CurrentStrategy { MaxCurrent, Mtpa };

std::string_view to_string(CurrentStrategy s);

struct CurrentReferences {
    double i_d = 0.0;
    double i_q = 0.0;
};

/// Radial projection onto the disc of radius v_max (direction preserving).
VoltageInput clamp_voltage(const VoltageInput& v, double v_max);

/// Maximum-current strategy: -sqrt(max(I_max^2 - iq_ref^2, 0)).
double max_current_d_reference(double iq_ref, double i_max);

/// Constant-magnitude torque maximising d-axis current for the given q-axis reference.
/// Throws StrategyError when L_d == L_q.
double mtpa_d_reference(const MotorParams& params, double iq_ref);

/// Speed PI -> q limiter -> strategy -> d limiter.
CurrentReferences pifoc_current_references(const PIGains& gains, CurrentStrategy strategy, const MotorParams& params,
                                           const PIState& pi, const PlantState& state, double omega_ref);

/// Current PIs with decoupling feed-forward, before the voltage clamp.
VoltageInput pifoc_current_loop(const PIGains& gains, const MotorParams& params, const PIState& pi,
                                const PlantState& state, const CurrentReferences& refs);

struct PifocStepResult {
    VoltageInput v;
    PIState next;
    CurrentReferences refs;
};

/// One controller period: references -> current loops -> clamp, then forward-Euler integrators
/// (clamped to the anti-windup window when limiters are enabled).
PifocStepResult pifoc_step(const PIGains& gains, CurrentStrategy strategy, const MotorParams& params,
                           const PIState& pi, const PlantState& state, double omega_ref, double dt);

/// Stateful wrapper used by the rollout. `model` is the controller's belief about the machine
/// and feeds the decoupling terms; it may differ from the simulated plant.
class PiFocController {
public:
    PiFocController(PIGains gains, CurrentStrategy strategy, MotorParams model, double dt);

    void reset() { state_ = {}; }
    VoltageInput operator()(double omega_ref, const PlantState& plant);

    [[nodiscard]] const PIState& state() const { return state_; }
    [[nodiscard]] const CurrentReferences& last_references() const { return refs_; }
    [[nodiscard]] const PIGains& gains() const { return gains_; }
    [[nodiscard]] CurrentStrategy strategy() const { return strategy_; }

private:
    PIGains gains_;
    CurrentStrategy strategy_;
    MotorParams model_;
    double dt_;
    PIState state_{};
    CurrentReferences refs_{};
};

}  // namespace motorlab
