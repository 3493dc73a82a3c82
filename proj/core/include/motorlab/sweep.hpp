#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "motorlab/metrics.hpp"
#include "motorlab/reference.hpp"
#include "motorlab/rollout.hpp"

namespace motorlab {

struct SweepOptions {
    int threads = 1;
    bool keep_trajectories = false;
};

struct SweepResult {
    std::string controller_id;
    double t_ramp = 0.0;
    std::vector<OperatingPoint> points;
    std::vector<ResponseMetrics> metrics;      // one per point, same order
    std::vector<VoltageInput> final_voltage;   // last applied input per point
    std::vector<PlantState> final_state;
    std::vector<Trajectory> trajectories;      // only with keep_trajectories

    [[nodiscard]] std::size_t settled_count() const;
    [[nodiscard]] double settled_fraction() const;
    [[nodiscard]] std::size_t valid_count() const;
    [[nodiscard]] std::size_t diverged_count() const;
};

/// Zero initial state and step load torque at each point's T_L. Points run independently;
/// output order is the input order regardless of `threads`.
SweepResult sweep(const ControllerSpec& controller, const MotorParams& plant, const std::vector<OperatingPoint>& points,
                  const SimConfig& cfg, const SweepOptions& options = {});

/// Columns: omega_final_rad_s, T_L_Nm, settling_time_s, overshoot_rel, final_error_rel, efficiency, valid.
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);

}  // namespace motorlab
