#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "motorlab/sweep.hpp"

namespace motorlab {

/// Plant parameters that the mismatch study perturbs.
enum class MismatchParameter { Phi, R, Ld, Lq, J };

std::string to_string(MismatchParameter p);
MismatchParameter parse_mismatch_parameter(const std::string& name);

/// Copy of `nominal` with one parameter scaled by (1 + percent / 100).
MotorParams perturb(const MotorParams& nominal, MismatchParameter which, double percent);

struct MismatchEntry {
    MismatchParameter parameter;
    double percent = 0.0;
    double sustained_rate = 0.0;
    std::size_t sustained = 0;
    std::size_t nominal_settled = 0;
};

struct MismatchOptions {
    std::vector<MismatchParameter> parameters{MismatchParameter::Phi, MismatchParameter::R, MismatchParameter::Ld,
                                              MismatchParameter::Lq, MismatchParameter::J};
    std::vector<double> percents{-50, -20, -5, 0, 5, 20, 50, 100, 400};
    int threads = 1;
};

/// Fraction of the points settled on the nominal plant that are still settled when the
/// simulated plant is perturbed. The controller keeps its nominal model. The 0 % column is
/// 1 by definition; with no nominally settled points every other rate is 0.
std::vector<MismatchEntry> mismatch_table(const ControllerSpec& controller, const MotorParams& nominal,
                                          const std::vector<OperatingPoint>& lattice, const SimConfig& cfg,
                                          const MismatchOptions& options = {});

/// Columns: parameter, perturbation_pct, sustained_rate.
void write_mismatch_csv(const std::filesystem::path& path, const std::vector<MismatchEntry>& table);

struct FluctuationResult {
    OperatingPoint point;
    TorqueProfile torque;
    Trajectory trajectory;
    ResponseMetrics metrics;
    double mean_abs_error_after_ramp_rel = 0.0;  // mean |omega_ref - omega| / omega_final for t >= t_ramp
};

/// Runs every point with a ramped, randomly fluctuating load (zero initial state).
/// The torque seed of point i is derived from (seed, i).
std::vector<FluctuationResult> fluctuating_torque_eval(const ControllerSpec& controller, const MotorParams& plant,
                                                       const std::vector<OperatingPoint>& points, const SimConfig& cfg,
                                                       double fluctuation_rel = 0.3, std::uint64_t seed = 0,
                                                       int threads = 1);

/// Columns: omega_final_rad_s, T_L_Nm, torque_seed, mean_abs_error_rel, settling_time_s, valid.
void write_fluctuation_csv(const std::filesystem::path& path, const std::vector<FluctuationResult>& results);

}  // namespace motorlab
