#include "motorlab/training.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "motorlab/csv.hpp"
#include "motorlab/parallel.hpp"
#include "motorlab/random.hpp"
#include "motorlab/sweep.hpp"

namespace motorlab {

void TrainConfig::validate() const {
    if (n_batch < 1) throw DomainError("n_batch must be >= 1");
    if (epochs < 1) throw DomainError("epochs must be >= 1");
    if (warmup_epochs < 0 || warmup_epochs > epochs) throw DomainError("warmup_epochs must lie in [0, epochs]");
    if (!(adam.lr > 0.0)) throw DomainError("learning rate must be > 0");
    if (!(floors.omega > 0.0) || !(floors.power > 0.0)) throw DomainError("loss floors must be > 0");
    if (hidden < 1) throw DomainError("hidden must be >= 1");
    if (!(t_ramp > 0.0)) throw DomainError("t_ramp must be > 0");
    if (eval_every < 0 || checkpoint_every < 0) throw DomainError("cadences must be >= 0");
    if (eval_every > 0 && (eval_speeds < 1 || eval_torques < 1)) throw DomainError("evaluation lattice must be nonempty");
    sim.validate();
}

TrainConfig train_config_from_config(const KeyValueConfig& cfg, TrainConfig c) {
    c.n_batch = cfg.get_int("n_batch", c.n_batch);
    c.epochs = cfg.get_int("epochs", c.epochs);
    c.warmup_epochs = cfg.get_int("warmup_epochs", c.warmup_epochs);
    c.adam.lr = cfg.get_double("lr", c.adam.lr);
    c.adam.beta1 = cfg.get_double("adam_beta1", c.adam.beta1);
    c.adam.beta2 = cfg.get_double("adam_beta2", c.adam.beta2);
    c.adam.eps = cfg.get_double("adam_eps", c.adam.eps);
    c.floors.omega = cfg.get_double("eps_omega", c.floors.omega);
    c.floors.power = cfg.get_double("eps_power", c.floors.power);
    c.seed = cfg.get_u64("seed", c.seed);
    c.hidden = cfg.get_int("hidden", c.hidden);
    c.beta = cfg.get_double("beta", c.beta);
    c.gamma = cfg.get_double("gamma", c.gamma);
    c.t_ramp = cfg.get_double("t_ramp", c.t_ramp);
    c.sim.dt = cfg.get_double("dt", c.sim.dt);
    c.sim.t_sim = cfg.get_double("t_sim", c.sim.t_sim);
    c.sim.plant_substeps = cfg.get_int("plant_substeps", c.sim.plant_substeps);
    c.eval_every = cfg.get_int("eval_every", c.eval_every);
    c.eval_speeds = cfg.get_int("eval_speeds", c.eval_speeds);
    c.eval_torques = cfg.get_int("eval_torques", c.eval_torques);
    c.checkpoint_every = cfg.get_int("checkpoint_every", c.checkpoint_every);
    c.threads = cfg.get_int("threads", c.threads);
    if (auto tape = cfg.get("tape")) {
        if (*tape == "full") {
            c.tape = TapeMode::Full;
        } else if (*tape == "checkpointed") {
            c.tape = TapeMode::Checkpointed;
        } else {
            throw ConfigError("tape", "expected 'full' or 'checkpointed'");
        }
    }
    return c;
}

BatchGradient batch_gradient(const RnnParams& rnn, const MotorParams& plant, const std::vector<OperatingPoint>& points,
                             const std::vector<PlantState>& initial, const LossTerms& active, const LossFloors& floors,
                             const SimConfig& sim, TapeMode tape, int threads) {
    const Eigen::MatrixXd A = effective_A(rnn);
    const std::size_t n = points.size();
    std::vector<RnnRollout> rollouts(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const auto& op = points[i];
        rollouts[i] = simulate_rnn(rnn, A, plant, op.reference(), TorqueProfile::step(op.T_L), sim, initial[i], tape);
    });

    TrajectoryBatch batch;
    BatchGradient out;
    for (const auto& r : rollouts) {
        batch.push_back(&r.traj);
        out.diverged += r.traj.diverged ? 1 : 0;
    }
    std::vector<TrajectorySeeds> seeds;
    out.loss = evaluate_losses(batch, plant.R, active, floors, &seeds);

    std::vector<GradientVector> grads(n);
    parallel_for(n, threads, [&](std::size_t i) { grads[i] = backward(rnn, A, plant, rollouts[i], seeds[i], sim); });
    out.grad = GradientVector::Zero(rnn.parameter_count());
    for (const auto& g : grads) out.grad += g;  // fixed order
    return out;
}

namespace {

struct EvalIndices {
    double settled_fraction = 0.0;
    double mean_overshoot = 0.0;
    std::optional<double> mean_efficiency;  // over valid points only
};

EvalIndices evaluate_indices(const RnnParams& rnn, const MotorParams& plant, const std::vector<OperatingPoint>& lattice,
                             const SimConfig& sim, int threads) {
    auto shared = std::make_shared<const RnnParams>(rnn);
    const auto result = sweep(ControllerSpec::rnn_controller(shared, plant), plant, lattice, sim, {threads, false});
    EvalIndices idx;
    idx.settled_fraction = result.settled_fraction();
    double eff = 0.0;
    int n_eff = 0;
    for (const auto& m : result.metrics) {
        idx.mean_overshoot += m.overshoot_rel / static_cast<double>(result.metrics.size());
        if (m.valid) {
            eff += m.efficiency;
            ++n_eff;
        }
    }
    if (n_eff > 0) idx.mean_efficiency = eff / n_eff;
    return idx;
}

}  // namespace

TrainResult train(const MotorParams& plant, const TrainConfig& config, const TrainHooks& hooks) {
    plant.validate();
    config.validate();
    auto log = [&](const std::string& msg) {
        if (hooks.log) hooks.log(msg);
    };

    RnnParams rnn = init_rnn(config.seed, config.hidden, config.beta, config.gamma);
    ParamVector theta = rnn.to_flat();
    OptimizerState opt = OptimizerState::zeros(theta.size());

    std::vector<OperatingPoint> lattice;
    if (config.eval_every > 0) {
        lattice = evaluation_lattice(plant, config.eval_speeds, config.eval_torques, config.t_ramp);
        if (lattice.empty()) throw DomainError("evaluation lattice has no point inside the operating region");
    }

    TrainResult result;
    double best_total = std::numeric_limits<double>::infinity();
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto points = sample_operating_points(plant, static_cast<std::size_t>(config.n_batch),
                                                    derive_seed(config.seed, static_cast<std::uint64_t>(epoch)),
                                                    config.t_ramp);
        std::vector<PlantState> initial;
        initial.reserve(points.size());
        for (const auto& op : points) initial.push_back(sample_initial_state(plant, op.seed, InitMode::Training));

        const LossTerms active = LossTerms::scheduled(epoch, config.warmup_epochs);
        BatchGradient bg =
            batch_gradient(rnn, plant, points, initial, active, config.floors, config.sim, config.tape, config.threads);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss = bg.loss;
        rec.diverged_count = bg.diverged;
        if (2 * bg.diverged > config.n_batch) {
            log("warning: epoch " + std::to_string(epoch) + ": " + std::to_string(bg.diverged) + " of " +
                std::to_string(config.n_batch) + " rollouts diverged");
        }
        if (config.eval_every > 0 && (epoch % config.eval_every == 0 || epoch == 1 || epoch == config.epochs)) {
            const auto idx = evaluate_indices(rnn, plant, lattice, config.sim, config.threads);
            rec.settled_fraction = idx.settled_fraction;
            rec.mean_overshoot = idx.mean_overshoot;
            rec.mean_efficiency = idx.mean_efficiency;
        }
        if (std::isfinite(bg.loss.total) && bg.loss.total < best_total) {
            best_total = bg.loss.total;
            result.best_epoch = epoch;
            result.best_params = rnn;
        }

        rec.step_skipped = !adam_step(theta, bg.grad, opt, config.adam);
        if (rec.step_skipped) log("warning: epoch " + std::to_string(epoch) + ": non-finite gradient, update skipped");
        rnn.assign_flat(theta);

        result.history.push_back(rec);
        if (hooks.on_epoch) hooks.on_epoch(rec);
        if (hooks.on_checkpoint && config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0) {
            hooks.on_checkpoint(epoch, rnn);
        }
    }
    if (result.best_epoch == 0) result.best_params = rnn;
    result.final_params = rnn;
    return result;
}

std::vector<std::string> metrics_csv_header() {
    return {"epoch", "L_s", "L_c", "L_o", "L_f", "total", "settled_fraction", "mean_overshoot", "mean_efficiency",
            "diverged_count"};
}

std::vector<std::string> metrics_csv_row(const EpochRecord& r) {
    return {std::to_string(r.epoch),          csv::number(r.loss.speed),       csv::number(r.loss.copper),
            csv::number(r.loss.overshoot),    csv::number(r.loss.final_value), csv::number(r.loss.total),
            csv::number(r.settled_fraction),  csv::number(r.mean_overshoot),   csv::number(r.mean_efficiency),
            std::to_string(r.diverged_count)};
}

}  // namespace motorlab
