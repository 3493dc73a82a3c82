#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "motorlab/config.hpp"
#include "motorlab/csv.hpp"
#include "motorlab/equilibria.hpp"
#include "motorlab/robustness.hpp"
#include "motorlab/sweep.hpp"
#include "motorlab/training.hpp"

namespace fs = std::filesystem;
using namespace motorlab;

namespace {

constexpr const char* kToolVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDiverged = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int steps = 0;
    double t_ramp = 0.0;
    bool limiters = false;
    std::string lattice = "5x5";
    std::string out = "out";
    std::string checkpoint;
    int threads = 1;
    double divergence_tolerance = 0.5;
    bool trajectories = false;
};

/// Everything a command needs, resolved once. `effective` records every value that went in,
/// including command-line overrides, and is what the manifest hash covers.
struct Resolved {
    KeyValueConfig effective;
    MotorParams plant;
    PIGains gains;
    SimConfig sim;
    double t_ramp = 1.0;
};

Resolved resolve(const CommonOptions& o) {
    Resolved r;
    if (!o.config_path.empty()) {
        r.effective = KeyValueConfig::load(o.config_path);
        r.plant = motor_params_from_config(r.effective);
    } else {
        motor_params_to_config(r.plant, r.effective);
    }
    r.plant.validate();
    r.gains = pi_gains_from_config(r.effective);
    if (o.limiters) r.gains.limiters_enabled = true;
    r.gains.validate();

    r.sim.dt = r.effective.get_double("dt", r.sim.dt);
    r.sim.t_sim = r.effective.get_double("t_sim", r.sim.t_sim);
    r.sim.plant_substeps = r.effective.get_int("plant_substeps", r.sim.plant_substeps);
    if (o.steps > 0) r.sim.t_sim = o.steps * r.sim.dt;
    r.sim.validate();
    r.t_ramp = o.t_ramp > 0.0 ? o.t_ramp : r.effective.get_double("t_ramp", r.t_ramp);
    if (!(r.t_ramp > 0.0)) throw ConfigError("t_ramp", "must be > 0");

    r.effective.set("dt", csv::number(r.sim.dt));
    r.effective.set("t_sim", csv::number(r.sim.t_sim));
    r.effective.set("plant_substeps", std::to_string(r.sim.plant_substeps));
    r.effective.set("t_ramp", csv::number(r.t_ramp));
    r.effective.set("limiters", r.gains.limiters_enabled ? "true" : "false");
    return r;
}

std::pair<int, int> parse_lattice(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos) throw UsageError("--lattice expects NxM, got '" + text + "'");
    int n = 0;
    int m = 0;
    const auto* s = text.data();
    const auto r1 = std::from_chars(s, s + x, n);
    const auto r2 = std::from_chars(s + x + 1, s + text.size(), m);
    if (r1.ec != std::errc{} || r1.ptr != s + x || r2.ec != std::errc{} || r2.ptr != s + text.size() || n < 1 ||
        m < 1) {
        throw UsageError("--lattice expects NxM with positive integers, got '" + text + "'");
    }
    return {n, m};
}

/// `pifoc:mc`, `pifoc:mtpa`, `zero`, or a path to an RNN checkpoint.
ControllerSpec resolve_controller(const std::string& token, const Resolved& r, std::string& checkpoint_out) {
    if (token == "pifoc:mc") return ControllerSpec::pifoc(r.gains, CurrentStrategy::MaxCurrent, r.plant);
    if (token == "pifoc:mtpa") return ControllerSpec::pifoc(r.gains, CurrentStrategy::Mtpa, r.plant);
    if (token == "zero") return ControllerSpec::zero();
    if (token.rfind("pifoc:", 0) == 0 || !fs::exists(token)) {
        throw UsageError("unknown controller '" + token + "' (expected pifoc:mc, pifoc:mtpa, zero or a checkpoint path)");
    }
    checkpoint_out = token;
    auto params = std::make_shared<const RnnParams>(load_checkpoint(token));
    return ControllerSpec::rnn_controller(params, r.plant, "rnn:" + fs::path(token).filename().string());
}

std::string file_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return hex64(fnv1a64(ss.str()));
}

void write_manifest(const fs::path& out, const std::string& command, const CommonOptions& o, const Resolved& r,
                    const std::string& checkpoint, const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json j;
    j["command"] = command;
    j["config_paths"] = o.config_path.empty() ? nlohmann::json::array() : nlohmann::json::array({o.config_path});
    j["seeds"] = {{"seed", o.seed}};
    j["checkpoint"] = checkpoint;
    if (!checkpoint.empty()) j["checkpoint_hash"] = file_hash(checkpoint);
    j["output_dir"] = out.string();
    j["tool_version"] = kToolVersion;
    j["config_hash"] = hex64(fnv1a64(r.effective.canonical()));
    j["config"] = r.effective.entries();
    j["parameters"] = extra;
    std::ofstream f(out / "manifest.json");
    f << j.dump(2) << "\n";
}

int divergence_status(std::size_t diverged, std::size_t total, double tolerance) {
    if (total == 0) return kExitOk;
    const double frac = static_cast<double>(diverged) / static_cast<double>(total);
    if (frac > tolerance) {
        std::cerr << "error: " << diverged << " of " << total << " episodes diverged (tolerance " << tolerance << ")\n";
        return kExitDiverged;
    }
    return kExitOk;
}

void write_trajectories(const fs::path& dir, const std::vector<Trajectory>& trajs) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%04zu.csv", i);
        write_trajectory_csv(dir / name, trajs[i]);
    }
}

void add_common(CLI::App* cmd, CommonOptions& o, bool sim_flags) {
    cmd->add_option("--config", o.config_path, "key = value config with motor, controller and simulation settings")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    if (!sim_flags) return;
    cmd->add_option("--steps", o.steps, "simulation steps N_time (t_sim = steps * dt)")->check(CLI::PositiveNumber);
    cmd->add_option("--t-ramp", o.t_ramp, "reference ramp duration [s]")->check(CLI::PositiveNumber);
    cmd->add_flag("--limiters", o.limiters, "enable the PI-FOC current-reference limiters");
    cmd->add_option("--lattice", o.lattice, "evaluation lattice, speeds x torques");
    cmd->add_option("--divergence-tolerance", o.divergence_tolerance,
                    "fraction of diverged episodes above which the exit status is 2");
}

int cmd_train(CommonOptions& o, int epochs, int hidden) {
    Resolved r = resolve(o);
    TrainConfig tc = train_config_from_config(r.effective);
    tc.sim = r.sim;
    tc.t_ramp = r.t_ramp;
    tc.threads = o.threads;
    if (o.seed_set) tc.seed = o.seed;
    if (epochs > 0) tc.epochs = epochs;
    if (hidden > 0) tc.hidden = hidden;
    if (tc.warmup_epochs > tc.epochs) tc.warmup_epochs = tc.epochs;
    const auto [ns, nt] = parse_lattice(o.lattice);
    tc.eval_speeds = ns;
    tc.eval_torques = nt;
    tc.validate();

    for (const auto& [k, v] : std::map<std::string, std::string>{{"seed", std::to_string(tc.seed)},
                                                                   {"epochs", std::to_string(tc.epochs)},
                                                                   {"hidden", std::to_string(tc.hidden)},
                                                                   {"warmup_epochs", std::to_string(tc.warmup_epochs)},
                                                                   {"n_batch", std::to_string(tc.n_batch)},
                                                                   {"lr", csv::number(tc.adam.lr)},
                                                                   {"beta", csv::number(tc.beta)},
                                                                   {"gamma", csv::number(tc.gamma)},
                                                                   {"eps_omega", csv::number(tc.floors.omega)},
                                                                   {"eps_power", csv::number(tc.floors.power)},
                                                                   {"lattice", o.lattice}}) {
        r.effective.set(k, v);
    }
    o.seed = tc.seed;

    const fs::path out = o.out;
    fs::create_directories(out / "checkpoints");
    write_manifest(out, "train", o, r, "");

    std::ofstream metrics(out / "metrics.csv");
    metrics << csv::join(metrics_csv_header()) << "\n";
    std::size_t diverged = 0;
    TrainHooks hooks;
    hooks.on_epoch = [&](const EpochRecord& rec) {
        metrics << csv::join(metrics_csv_row(rec)) << "\n" << std::flush;
        diverged += static_cast<std::size_t>(rec.diverged_count);
        if (rec.epoch == 1 || rec.epoch % 10 == 0 || rec.epoch == tc.epochs) {
            std::cerr << "epoch " << rec.epoch << " [" << rec.loss.active.describe() << "] total=" << rec.loss.total
                      << "\n";
        }
    };
    hooks.on_checkpoint = [&](int epoch, const RnnParams& p) {
        char name[32];
        std::snprintf(name, sizeof name, "epoch_%05d.json", epoch);
        save_checkpoint(out / "checkpoints" / name, p);
    };
    hooks.log = [](const std::string& msg) { std::cerr << msg << "\n"; };
    const TrainResult result = train(r.plant, tc, hooks);
    save_checkpoint(out / "checkpoint.json", result.final_params);
    save_checkpoint(out / "best.json", result.best_params);
    std::cerr << "best epoch " << result.best_epoch << "; wrote " << (out / "checkpoint.json").string() << "\n";
    return divergence_status(diverged, static_cast<std::size_t>(tc.epochs) * tc.n_batch, o.divergence_tolerance);
}

int cmd_eval(const CommonOptions& o, const std::string& token) {
    Resolved r = resolve(o);
    std::string checkpoint;
    const ControllerSpec spec = resolve_controller(token, r, checkpoint);
    const auto [ns, nt] = parse_lattice(o.lattice);
    r.effective.set("controller", spec.id);
    r.effective.set("lattice", o.lattice);
    const fs::path out = o.out;
    fs::create_directories(out);
    write_manifest(out, "eval", o, r, checkpoint);

    const auto lattice = evaluation_lattice(r.plant, ns, nt, r.t_ramp);
    const auto result = sweep(spec, r.plant, lattice, r.sim, {o.threads, o.trajectories});
    write_sweep_csv(out / "sweep.csv", result);
    if (o.trajectories) write_trajectories(out / "trajectories", result.trajectories);
    std::cerr << spec.id << ": settled " << result.settled_count() << "/" << lattice.size() << ", valid "
              << result.valid_count() << ", diverged " << result.diverged_count() << "\n";
    return divergence_status(result.diverged_count(), lattice.size(), o.divergence_tolerance);
}

int cmd_mismatch(const CommonOptions& o, const std::string& token) {
    Resolved r = resolve(o);
    std::string checkpoint;
    const ControllerSpec spec = resolve_controller(token, r, checkpoint);
    const auto [ns, nt] = parse_lattice(o.lattice);
    r.effective.set("controller", spec.id);
    r.effective.set("lattice", o.lattice);
    const fs::path out = o.out;
    fs::create_directories(out);
    write_manifest(out, "mismatch", o, r, checkpoint);

    MismatchOptions mo;
    mo.threads = o.threads;
    const auto table = mismatch_table(spec, r.plant, evaluation_lattice(r.plant, ns, nt, r.t_ramp), r.sim, mo);
    write_mismatch_csv(out / "mismatch.csv", table);
    return kExitOk;
}

int cmd_fluct(const CommonOptions& o, const std::string& token, double rel) {
    Resolved r = resolve(o);
    std::string checkpoint;
    const ControllerSpec spec = resolve_controller(token, r, checkpoint);
    const auto [ns, nt] = parse_lattice(o.lattice);
    r.effective.set("controller", spec.id);
    r.effective.set("lattice", o.lattice);
    r.effective.set("fluctuation_rel", csv::number(rel));
    r.effective.set("seed", std::to_string(o.seed));
    const fs::path out = o.out;
    fs::create_directories(out);
    write_manifest(out, "fluct", o, r, checkpoint);

    const auto points = evaluation_lattice(r.plant, ns, nt, r.t_ramp);
    const auto results = fluctuating_torque_eval(spec, r.plant, points, r.sim, rel, o.seed, o.threads);
    write_fluctuation_csv(out / "fluct.csv", results);
    std::vector<Trajectory> trajs;
    std::size_t diverged = 0;
    for (const auto& res : results) {
        trajs.push_back(res.trajectory);
        diverged += res.trajectory.diverged ? 1 : 0;
    }
    write_trajectories(out / "trajectories", trajs);
    return divergence_status(diverged, results.size(), o.divergence_tolerance);
}

int cmd_equilibria(const CommonOptions& o, double vd, double vq, double torque) {
    Resolved r = resolve(o);
    r.effective.set("v_d", csv::number(vd));
    r.effective.set("v_q", csv::number(vq));
    r.effective.set("T_L", csv::number(torque));
    const fs::path out = o.out;
    fs::create_directories(out);
    write_manifest(out, "equilibria", o, r, "");

    const VoltageInput v{vd, vq};
    const auto roots = find_equilibria(r.plant, v, torque, default_equilibrium_starts(r.plant));
    csv::Table t;
    t.header = {"i_d", "i_q", "omega_e", "residual"};
    for (const auto& x : roots) {
        const auto f = pmsm_derivative(r.plant, x, v, torque);
        const double res = std::sqrt(f.i_d * f.i_d + f.i_q * f.i_q + f.omega_e * f.omega_e);
        t.rows.push_back({csv::number(x.i_d), csv::number(x.i_q), csv::number(x.omega_e), csv::number(res)});
    }
    csv::write(out / "equilibria.csv", t);
    std::cerr << roots.size() << " equilibria\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differentiable IPMSM control lab: PI-FOC baseline and Lipschitz RNN controller"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    CommonOptions o;
    std::string controller;
    int epochs = 0;
    int hidden = 0;
    double fluctuation = 0.3;
    double vd = 0.0;
    double vq = 0.0;
    double torque = 0.0;

    auto* train_cmd = app.add_subcommand("train", "train the RNN controller");
    add_common(train_cmd, o, true);
    train_cmd->add_option("--seed", o.seed, "training seed");
    train_cmd->add_option("--epochs", epochs, "number of epochs")->check(CLI::PositiveNumber);
    train_cmd->add_option("--hidden", hidden, "RNN hidden size N_h")->check(CLI::PositiveNumber);

    auto* eval_cmd = app.add_subcommand("eval", "speed-torque sweep of one controller");
    add_common(eval_cmd, o, true);
    eval_cmd->add_option("controller", controller, "pifoc:mc | pifoc:mtpa | zero | checkpoint path");
    eval_cmd->add_option("--checkpoint", o.checkpoint, "RNN checkpoint (alternative to the positional token)");
    eval_cmd->add_flag("--trajectories", o.trajectories, "also export one trajectory CSV per point");

    auto* mismatch_cmd = app.add_subcommand("mismatch", "parameter-mismatch sustained-settling table");
    add_common(mismatch_cmd, o, true);
    mismatch_cmd->add_option("controller", controller, "pifoc:mc | pifoc:mtpa | checkpoint path");
    mismatch_cmd->add_option("--checkpoint", o.checkpoint, "RNN checkpoint");

    auto* fluct_cmd = app.add_subcommand("fluct", "ramped load torque with random fluctuation");
    add_common(fluct_cmd, o, true);
    fluct_cmd->add_option("controller", controller, "pifoc:mc | pifoc:mtpa | checkpoint path");
    fluct_cmd->add_option("--checkpoint", o.checkpoint, "RNN checkpoint");
    fluct_cmd->add_option("--fluctuation", fluctuation, "relative fluctuation amplitude")->check(CLI::Range(0.0, 0.999));
    fluct_cmd->add_option("--seed", o.seed, "torque-noise seed");

    auto* eq_cmd = app.add_subcommand("equilibria", "Newton multistart equilibria for a constant input");
    add_common(eq_cmd, o, false);
    eq_cmd->add_option("--vd", vd, "d-axis voltage [V]");
    eq_cmd->add_option("--vq", vq, "q-axis voltage [V]");
    eq_cmd->add_option("--torque", torque, "load torque [N m]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    o.seed_set = train_cmd->count("--seed") > 0;

    try {
        const std::string token = !controller.empty() ? controller : o.checkpoint;
        if (*train_cmd) return cmd_train(o, epochs, hidden);
        if (*eq_cmd) return cmd_equilibria(o, vd, vq, torque);
        if (token.empty()) throw UsageError("a controller token or --checkpoint is required");
        if (*eval_cmd) return cmd_eval(o, token);
        if (*mismatch_cmd) return cmd_mismatch(o, token);
        if (*fluct_cmd) return cmd_fluct(o, token, fluctuation);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CheckpointError& e) {
        std::cerr << "checkpoint error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        std::cerr << "invalid setting: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    }
    return kExitUsage;
}
