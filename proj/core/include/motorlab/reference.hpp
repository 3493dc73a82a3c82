#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "motorlab/plant.hpp"

namespace motorlab {

/// Saturated ramp: rises linearly from 0 to omega_final over t_ramp, then holds.
struct ReferenceProfile {
    double omega_final = 0.0;  // electrical rad/s
    double t_ramp = 1.0;       // s
};

double reference_at(const ReferenceProfile& profile, double t);

/// Final speed / load torque pair defining one episode. Speeds are stored as electrical rad/s.
struct OperatingPoint {
    double omega_final = 0.0;  // electrical rad/s
    double T_L = 0.0;          // N m
    double t_ramp = 1.0;       // s
    std::uint64_t seed = 0;    // per-episode seed (initial state, torque fluctuation)

    [[nodiscard]] ReferenceProfile reference() const { return {omega_final, t_ramp}; }
};

/// Inside the speed and torque ranges and under the mechanical power limit; speed in mechanical rpm.
bool within_operating_region(const MotorParams& params, double rpm, double load_torque);

/// Uniform samples over [fmin, fmax] x [TLmin, TLmax] with omega_m * T_L > Pmax rejected.
/// Point i depends only on (seed, i).
std::vector<OperatingPoint> sample_operating_points(const MotorParams& params, std::size_t n, std::uint64_t seed,
                                                    double t_ramp = 1.0);

/// Regular n_speed x n_torque lattice of cell centres, keeping only points inside the region.
/// Ordered speed-major. Seeds are the lattice index.
std::vector<OperatingPoint> evaluation_lattice(const MotorParams& params, int n_speed, int n_torque,
                                               double t_ramp = 1.0);

enum class InitMode { Evaluation, Training };

/// Training: i_d, i_q ~ U[-2.5, 2.5) A, omega_e ~ U[-100 rpm, 100 rpm) in electrical rad/s.
/// Evaluation: the zero state.
PlantState sample_initial_state(const MotorParams& params, std::uint64_t seed, InitMode mode = InitMode::Training);

enum class TorqueKind { Step, RampFluctuation };

struct TorqueProfile {
    TorqueKind kind = TorqueKind::Step;
    double base = 0.0;             // T_L [N m]
    double t_ramp = 1.0;           // ramp duration for RampFluctuation
    double fluctuation_rel = 0.3;  // relative amplitude r of the multiplicative noise
    double resample_period = 0.01; // noise is piecewise constant on this grid [s]
    std::uint64_t seed = 0;

    static TorqueProfile step(double load_torque) { return {TorqueKind::Step, load_torque}; }
    static TorqueProfile ramp_fluctuation(double load_torque, double t_ramp, double rel, std::uint64_t seed) {
        return {TorqueKind::RampFluctuation, load_torque, t_ramp, rel, 0.01, seed};
    }
};

/// Step: constant base. RampFluctuation: base * min(t/t_ramp, 1) * m_k with
/// m_k ~ U[1-r, 1+r] drawn per resample cell k = floor(t / resample_period).
double torque_at(const TorqueProfile& profile, double t);

/// CSV columns: omega_final_rad_s, T_L_Nm, t_ramp_s, seed.
void write_dataset_csv(const std::filesystem::path& path, const std::vector<OperatingPoint>& points);
std::vector<OperatingPoint> read_dataset_csv(const std::filesystem::path& path);

}  // namespace motorlab
