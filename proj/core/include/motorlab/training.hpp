#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "motorlab/adam.hpp"
#include "motorlab/config.hpp"
#include "motorlab/loss.hpp"
#include "motorlab/rnn.hpp"
#include "motorlab/rollout.hpp"

namespace motorlab {

struct TrainConfig {
    int n_batch = 8;
    int epochs = 1000;
    int warmup_epochs = 50;
    AdamConfig adam;
    LossFloors floors;
    std::uint64_t seed = 0;

    int hidden = 128;
    double beta = 0.85;
    double gamma = 0.01;

    double t_ramp = 1.0;
    SimConfig sim;
    TapeMode tape = TapeMode::Full;

    int eval_every = 10;     // 0 disables the evaluation-lattice pass
    int eval_speeds = 5;
    int eval_torques = 5;
    int checkpoint_every = 0;  // 0 writes only the final checkpoint
    int threads = 1;

    void validate() const;
};

/// Reads optional training keys (n_batch, epochs, warmup_epochs, lr, adam_beta1, adam_beta2,
/// adam_eps, eps_omega, eps_power, seed, hidden, beta, gamma, t_ramp, dt, t_sim, plant_substeps,
/// eval_every, eval_speeds, eval_torques, checkpoint_every, threads, tape) on top of defaults.
TrainConfig train_config_from_config(const KeyValueConfig& cfg, TrainConfig defaults = {});

struct EpochRecord {
    int epoch = 0;
    LossBreakdown loss;
    std::optional<double> settled_fraction;  // evaluation-lattice indices, at eval cadence
    std::optional<double> mean_overshoot;
    std::optional<double> mean_efficiency;
    int diverged_count = 0;  // training batch
    bool step_skipped = false;
};

struct TrainResult {
    RnnParams final_params;
    RnnParams best_params;  // parameters that produced the lowest training total
    int best_epoch = 0;
    std::vector<EpochRecord> history;
};

struct TrainHooks {
    std::function<void(const EpochRecord&)> on_epoch;
    std::function<void(int epoch, const RnnParams&)> on_checkpoint;
    std::function<void(const std::string&)> log;
};

/// One Adam update per epoch on a freshly sampled batch. Epoch e (1-based) draws its operating
/// points from derive_seed(seed, e); initial states come from each point's seed. The result is
/// a pure function of (plant, config).
TrainResult train(const MotorParams& plant, const TrainConfig& config, const TrainHooks& hooks = {});

/// Scheduled loss and its parameter gradient for one batch; exposed for testing.
struct BatchGradient {
    LossBreakdown loss;
    GradientVector grad;
    int diverged = 0;
};

BatchGradient batch_gradient(const RnnParams& rnn, const MotorParams& plant, const std::vector<OperatingPoint>& points,
                             const std::vector<PlantState>& initial, const LossTerms& active, const LossFloors& floors,
                             const SimConfig& sim, TapeMode tape, int threads);

/// Columns: epoch, L_s, L_c, L_o, L_f, total, settled_fraction, mean_overshoot, mean_efficiency, diverged_count.
std::vector<std::string> metrics_csv_header();
std::vector<std::string> metrics_csv_row(const EpochRecord& r);

}  // namespace motorlab
