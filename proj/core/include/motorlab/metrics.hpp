#pragma once

#include <optional>

#include "motorlab/plant.hpp"
#include "motorlab/rollout.hpp"

namespace motorlab {

/// Earliest time after which |omega - omega_final| <= band * omega_final holds until the end
/// of the record. The crossing is located by linear interpolation between samples.
/// Undefined (nullopt) when the last sample is outside the band or the episode diverged.
std::optional<double> settling_time(const Trajectory& traj, double omega_final, double band = 0.02);

inline std::optional<double> settling_time_2pct(const Trajectory& traj, double omega_final) {
    return settling_time(traj, omega_final, 0.02);
}

struct Efficiency {
    double value = 0.0;
    bool valid = false;  // false when the integrated input energy is <= 0
};

/// Integrated mechanical output over integrated electrical input (trapezoid rule; the input
/// voltage is held over each step).
Efficiency efficiency(const Trajectory& traj);

struct ResponseMetrics {
    std::optional<double> settling_time_2pct;
    double overshoot_rel = 0.0;    // max(omega - omega_final, 0) / omega_final
    double final_error_rel = 0.0;  // |omega(end) - omega_final| / omega_final
    double efficiency = 0.0;
    bool efficiency_valid = false;
    bool diverged = false;
    bool valid = false;  // settled, efficiency in [0, 1], not diverged

    [[nodiscard]] bool settled() const { return settling_time_2pct.has_value(); }
};

ResponseMetrics response_metrics(const Trajectory& traj, double omega_final);

}  // namespace motorlab
