#include "motorlab/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "motorlab/csv.hpp"
#include "motorlab/random.hpp"

namespace motorlab {

double reference_at(const ReferenceProfile& profile, double t) {
    if (t <= 0.0) return 0.0;
    return std::min(profile.omega_final * t / profile.t_ramp, profile.omega_final);
}

bool within_operating_region(const MotorParams& p, double rpm, double load_torque) {
    if (rpm < p.f_min || rpm > p.f_max) return false;
    if (load_torque < p.T_Lmin || load_torque > p.T_Lmax) return false;
    const double omega_m = rpm * 2.0 * std::numbers::pi / 60.0;
    return omega_m * load_torque <= p.P_max;
}

std::vector<OperatingPoint> sample_operating_points(const MotorParams& p, std::size_t n, std::uint64_t seed,
                                                    double t_ramp) {
    std::vector<OperatingPoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t point_seed = derive_seed(seed, stream::kTrainPoints, i);
        Rng rng(point_seed);
        for (;;) {
            const double rpm = rng.uniform(p.f_min, p.f_max);
            const double tl = rng.uniform(p.T_Lmin, p.T_Lmax);
            if (!within_operating_region(p, rpm, tl)) continue;
            out.push_back({rpm_to_electrical(rpm, p.P), tl, t_ramp, point_seed});
            break;
        }
    }
    return out;
}

std::vector<OperatingPoint> evaluation_lattice(const MotorParams& p, int n_speed, int n_torque, double t_ramp) {
    if (n_speed < 1 || n_torque < 1) throw std::invalid_argument("evaluation_lattice: empty lattice");
    std::vector<OperatingPoint> out;
    std::uint64_t index = 0;
    for (int i = 0; i < n_speed; ++i) {
        const double rpm = p.f_min + (i + 0.5) * (p.f_max - p.f_min) / n_speed;
        for (int j = 0; j < n_torque; ++j) {
            const double tl = p.T_Lmin + (j + 0.5) * (p.T_Lmax - p.T_Lmin) / n_torque;
            if (within_operating_region(p, rpm, tl)) out.push_back({rpm_to_electrical(rpm, p.P), tl, t_ramp, index});
            ++index;
        }
    }
    return out;
}

PlantState sample_initial_state(const MotorParams& p, std::uint64_t seed, InitMode mode) {
    if (mode == InitMode::Evaluation) return {};
    Rng rng(derive_seed(seed, stream::kInitialState));
    const double w = rpm_to_electrical(100.0, p.P);
    PlantState s;
    s.i_d = rng.uniform(-2.5, 2.5);
    s.i_q = rng.uniform(-2.5, 2.5);
    s.omega_e = rng.uniform(-w, w);
    return s;
}

double torque_at(const TorqueProfile& profile, double t) {
    if (profile.kind == TorqueKind::Step) return profile.base;
    const double ramp = profile.t_ramp > 0.0 ? std::clamp(t / profile.t_ramp, 0.0, 1.0) : 1.0;
    double factor = 1.0;
    if (profile.fluctuation_rel != 0.0) {
        const auto cell = static_cast<std::uint64_t>(std::max(0.0, std::floor(t / profile.resample_period)));
        Rng rng(derive_seed(profile.seed, stream::kTorque, cell));
        factor = rng.uniform(1.0 - profile.fluctuation_rel, 1.0 + profile.fluctuation_rel);
    }
    return profile.base * ramp * factor;
}

void write_dataset_csv(const std::filesystem::path& path, const std::vector<OperatingPoint>& points) {
    csv::Table t;
    t.header = {"omega_final_rad_s", "T_L_Nm", "t_ramp_s", "seed"};
    for (const auto& pt : points) {
        t.rows.push_back({csv::number(pt.omega_final), csv::number(pt.T_L), csv::number(pt.t_ramp),
                          std::to_string(pt.seed)});
    }
    csv::write(path, t);
}

std::vector<OperatingPoint> read_dataset_csv(const std::filesystem::path& path) {
    const auto t = csv::read(path);
    const auto c_w = t.column("omega_final_rad_s");
    const auto c_t = t.column("T_L_Nm");
    const auto c_r = t.column("t_ramp_s");
    const auto c_s = t.column("seed");
    std::vector<OperatingPoint> out;
    for (const auto& row : t.rows) {
        out.push_back({std::stod(row[c_w]), std::stod(row[c_t]), std::stod(row[c_r]), std::stoull(row[c_s])});
    }
    return out;
}

}  // namespace motorlab
