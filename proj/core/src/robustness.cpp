#include "motorlab/robustness.hpp"

#include <cmath>

#include "motorlab/csv.hpp"
#include "motorlab/parallel.hpp"
#include "motorlab/random.hpp"

namespace motorlab {

std::string to_string(MismatchParameter p) {
    switch (p) {
        case MismatchParameter::Phi: return "Phi";
        case MismatchParameter::R: return "R";
        case MismatchParameter::Ld: return "Ld";
        case MismatchParameter::Lq: return "Lq";
        case MismatchParameter::J: return "J";
    }
    return "?";
}

MismatchParameter parse_mismatch_parameter(const std::string& name) {
    for (auto p : {MismatchParameter::Phi, MismatchParameter::R, MismatchParameter::Ld, MismatchParameter::Lq,
                   MismatchParameter::J}) {
        if (to_string(p) == name) return p;
    }
    throw DomainError("unknown mismatch parameter '" + name + "'");
}

MotorParams perturb(const MotorParams& nominal, MismatchParameter which, double percent) {
    MotorParams p = nominal;
    const double f = 1.0 + percent / 100.0;
    switch (which) {
        case MismatchParameter::Phi: p.Phi *= f; break;
        case MismatchParameter::R: p.R *= f; break;
        case MismatchParameter::Ld: p.L_d *= f; break;
        case MismatchParameter::Lq: p.L_q *= f; break;
        case MismatchParameter::J: p.J *= f; break;
    }
    p.validate();
    return p;
}

std::vector<MismatchEntry> mismatch_table(const ControllerSpec& controller, const MotorParams& nominal,
                                          const std::vector<OperatingPoint>& lattice, const SimConfig& cfg,
                                          const MismatchOptions& options) {
    const SweepOptions sweep_options{options.threads, false};
    const SweepResult base = sweep(controller, nominal, lattice, cfg, sweep_options);
    std::vector<bool> settled0(lattice.size());
    for (std::size_t i = 0; i < lattice.size(); ++i) settled0[i] = base.metrics[i].settled();
    const std::size_t n0 = base.settled_count();

    std::vector<MismatchEntry> table;
    for (auto param : options.parameters) {
        for (double pct : options.percents) {
            MismatchEntry e{param, pct, 0.0, 0, n0};
            // The zero column is still simulated so the file reflects an actual run.
            const SweepResult r = sweep(controller, perturb(nominal, param, pct), lattice, cfg, sweep_options);
            for (std::size_t i = 0; i < lattice.size(); ++i) {
                if (settled0[i] && r.metrics[i].settled()) ++e.sustained;
            }
            if (pct == 0.0) {
                e.sustained_rate = 1.0;
            } else if (n0 > 0) {
                e.sustained_rate = static_cast<double>(e.sustained) / static_cast<double>(n0);
            }
            table.push_back(e);
        }
    }
    return table;
}

void write_mismatch_csv(const std::filesystem::path& path, const std::vector<MismatchEntry>& table) {
    csv::Table t;
    t.header = {"parameter", "perturbation_pct", "sustained_rate"};
    for (const auto& e : table) {
        t.rows.push_back({to_string(e.parameter), csv::number(e.percent), csv::number(e.sustained_rate)});
    }
    csv::write(path, t);
}

std::vector<FluctuationResult> fluctuating_torque_eval(const ControllerSpec& controller, const MotorParams& plant,
                                                       const std::vector<OperatingPoint>& points, const SimConfig& cfg,
                                                       double fluctuation_rel, std::uint64_t seed, int threads) {
    if (!(fluctuation_rel >= 0.0 && fluctuation_rel < 1.0)) {
        throw DomainError("fluctuation_rel must lie in [0, 1)");
    }
    std::vector<FluctuationResult> out(points.size());
    parallel_for(points.size(), threads, [&](std::size_t i) {
        const auto& op = points[i];
        auto& r = out[i];
        r.point = op;
        r.torque = TorqueProfile::ramp_fluctuation(op.T_L, op.t_ramp, fluctuation_rel,
                                                   derive_seed(seed, stream::kTorque, i));
        r.trajectory = simulate(controller, plant, op.reference(), r.torque, cfg, PlantState{});
        r.metrics = response_metrics(r.trajectory, op.omega_final);
        double sum = 0.0;
        int count = 0;
        for (std::size_t k = 0; k < r.trajectory.t.size(); ++k) {
            if (r.trajectory.t[k] < op.t_ramp) continue;
            sum += std::abs(r.trajectory.omega_ref[k] - r.trajectory.omega_e[k]);
            ++count;
        }
        r.mean_abs_error_after_ramp_rel = count > 0 ? sum / count / op.omega_final : std::nan("");
    });
    return out;
}

void write_fluctuation_csv(const std::filesystem::path& path, const std::vector<FluctuationResult>& results) {
    csv::Table t;
    t.header = {"omega_final_rad_s", "T_L_Nm", "torque_seed", "mean_abs_error_rel", "settling_time_s", "valid"};
    for (const auto& r : results) {
        t.rows.push_back({csv::number(r.point.omega_final), csv::number(r.point.T_L), std::to_string(r.torque.seed),
                          csv::number(r.mean_abs_error_after_ramp_rel), csv::number(r.metrics.settling_time_2pct),
                          r.metrics.valid ? "1" : "0"});
    }
    csv::write(path, t);
}

}  // namespace motorlab
