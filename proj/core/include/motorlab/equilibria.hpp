#pragma once

#include <vector>

#include "motorlab/plant.hpp"

namespace motorlab {

struct NewtonOptions {
    int max_iterations = 100;
    double residual_tol = 1e-8;  // Euclidean norm of pmsm_derivative
    double dedupe_rel = 1e-6;
};

/// 27 starts on a 3x3x3 lattice spanning +-I_max in both currents and +-rated speed
/// (f_max, electrical rad/s).
std::vector<PlantState> default_equilibrium_starts(const MotorParams& params);

/// Newton iteration on pmsm_derivative(x; v, T_L) = 0 with the analytic Jacobian from each start.
/// Starts that do not converge are discarded; roots are deduplicated componentwise with a
/// relative tolerance.
std::vector<PlantState> find_equilibria(const MotorParams& params, const VoltageInput& v, double load_torque,
                                        const std::vector<PlantState>& starts, const NewtonOptions& options = {});

}  // namespace motorlab
