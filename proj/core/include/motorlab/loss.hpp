#pragma once

#include <span>
#include <string>
#include <vector>

#include "motorlab/rollout.hpp"

namespace motorlab {

/// Denominator floors. The ramp reference starts at zero and the input power can be zero or
/// negative during transients, so every normalising denominator is max(value, floor).
struct LossFloors {
    double omega = 1.0;  // rad/s, for the speed-normalised terms
    double power = 1.0;  // W, for the copper-loss ratio
};

struct LossTerms {
    bool speed = true;
    bool copper = true;
    bool overshoot = true;
    bool final_value = true;

    /// Speed-only terms during warm-up, all four afterwards. `epoch` is 1-based.
    static LossTerms scheduled(int epoch, int warmup_epochs);

    [[nodiscard]] std::string describe() const;
};

struct LossBreakdown {
    double speed = 0.0;      // L_s
    double copper = 0.0;     // L_c
    double overshoot = 0.0;  // L_o
    double final_value = 0.0;  // L_f
    double total = 0.0;      // sum of active terms
    LossTerms active;
};

// Single-trajectory terms. When `seeds` is given, scale * d(term)/d(signal) is accumulated into it.
// The speed sum runs over state samples 1..N and is normalised by the planned N_time, so a
// truncated (diverged) episode contributes only its recorded part.

double speed_loss(const Trajectory& traj, const LossFloors& floors, TrajectorySeeds* seeds = nullptr,
                  double scale = 1.0);
double copper_loss(const Trajectory& traj, double resistance, const LossFloors& floors,
                   TrajectorySeeds* seeds = nullptr, double scale = 1.0);
double overshoot_loss(const Trajectory& traj, const LossFloors& floors, TrajectorySeeds* seeds = nullptr,
                      double scale = 1.0);
double final_value_loss(const Trajectory& traj, const LossFloors& floors, TrajectorySeeds* seeds = nullptr,
                        double scale = 1.0);

using TrajectoryBatch = std::vector<const Trajectory*>;

// Batch means over N_batch trajectories.
double loss_speed(const TrajectoryBatch& batch, const LossFloors& floors = {});
double loss_copper(const TrajectoryBatch& batch, double resistance, const LossFloors& floors = {});
double loss_overshoot(const TrajectoryBatch& batch, const LossFloors& floors = {});
double loss_final(const TrajectoryBatch& batch, const LossFloors& floors = {});

/// All four terms, with `total` summing the active ones. When `seeds` is non-null it is resized
/// to the batch and filled with the gradient of `total` for each trajectory.
LossBreakdown evaluate_losses(const TrajectoryBatch& batch, double resistance, const LossTerms& active,
                              const LossFloors& floors, std::vector<TrajectorySeeds>* seeds = nullptr);

}  // namespace motorlab
