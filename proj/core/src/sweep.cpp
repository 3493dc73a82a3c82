#include "motorlab/sweep.hpp"

#include <algorithm>

#include "motorlab/csv.hpp"
#include "motorlab/parallel.hpp"

namespace motorlab {

std::size_t SweepResult::settled_count() const {
    return static_cast<std::size_t>(std::count_if(metrics.begin(), metrics.end(), [](const auto& m) { return m.settled(); }));
}

double SweepResult::settled_fraction() const {
    return metrics.empty() ? 0.0 : static_cast<double>(settled_count()) / static_cast<double>(metrics.size());
}

std::size_t SweepResult::valid_count() const {
    return static_cast<std::size_t>(std::count_if(metrics.begin(), metrics.end(), [](const auto& m) { return m.valid; }));
}

std::size_t SweepResult::diverged_count() const {
    return static_cast<std::size_t>(std::count_if(metrics.begin(), metrics.end(), [](const auto& m) { return m.diverged; }));
}

SweepResult sweep(const ControllerSpec& controller, const MotorParams& plant, const std::vector<OperatingPoint>& points,
                  const SimConfig& cfg, const SweepOptions& options) {
    if (points.empty()) throw DomainError("sweep: empty operating-point lattice");
    cfg.validate();
    SweepResult out;
    out.controller_id = controller.id;
    out.t_ramp = points.front().t_ramp;
    out.points = points;
    out.metrics.resize(points.size());
    out.final_voltage.resize(points.size());
    out.final_state.resize(points.size());
    if (options.keep_trajectories) out.trajectories.resize(points.size());

    parallel_for(points.size(), options.threads, [&](std::size_t i) {
        const auto& op = points[i];
        Trajectory traj = simulate(controller, plant, op.reference(), TorqueProfile::step(op.T_L), cfg, PlantState{});
        out.metrics[i] = response_metrics(traj, op.omega_final);
        if (traj.steps() > 0) out.final_voltage[i] = traj.voltage(traj.steps() - 1);
        out.final_state[i] = traj.final_state();
        if (options.keep_trajectories) out.trajectories[i] = std::move(traj);
    });
    return out;
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
    csv::Table table;
    table.header = {"omega_final_rad_s", "T_L_Nm", "settling_time_s", "overshoot_rel",
                    "final_error_rel",   "efficiency", "valid"};
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        const auto& m = result.metrics[i];
        table.rows.push_back({csv::number(result.points[i].omega_final), csv::number(result.points[i].T_L),
                              csv::number(m.settling_time_2pct), csv::number(m.overshoot_rel),
                              csv::number(m.final_error_rel), csv::number(m.efficiency), m.valid ? "1" : "0"});
    }
    csv::write(path, table);
}

}  // namespace motorlab
