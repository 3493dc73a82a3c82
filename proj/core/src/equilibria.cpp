#include "motorlab/equilibria.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace motorlab {

std::vector<PlantState> default_equilibrium_starts(const MotorParams& p) {
    const double w = rpm_to_electrical(p.f_max, p.P);
    std::vector<PlantState> starts;
    for (double id : {-p.I_max, 0.0, p.I_max}) {
        for (double iq : {-p.I_max, 0.0, p.I_max}) {
            for (double we : {-w, 0.0, w}) starts.push_back({id, iq, we});
        }
    }
    return starts;
}

namespace {

double norm(const PlantState& s) { return std::sqrt(s.i_d * s.i_d + s.i_q * s.i_q + s.omega_e * s.omega_e); }

bool same_root(const PlantState& a, const PlantState& b, double rel) {
    auto close = [rel](double x, double y) { return std::abs(x - y) <= rel * std::max({1.0, std::abs(x), std::abs(y)}); };
    return close(a.i_d, b.i_d) && close(a.i_q, b.i_q) && close(a.omega_e, b.omega_e);
}

}  // namespace

std::vector<PlantState> find_equilibria(const MotorParams& p, const VoltageInput& v, double load_torque,
                                        const std::vector<PlantState>& starts, const NewtonOptions& opt) {
    std::vector<PlantState> roots;
    for (const auto& start : starts) {
        PlantState x = start;
        bool converged = false;
        for (int it = 0; it < opt.max_iterations; ++it) {
            const PlantState f = pmsm_derivative(p, x, v, load_torque);
            if (norm(f) < opt.residual_tol) {
                converged = true;
                break;
            }
            const auto jac = pmsm_state_jacobian(p, x);
            Eigen::Matrix3d J;
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) J(r, c) = jac[r][c];
            }
            const Eigen::FullPivLU<Eigen::Matrix3d> lu(J);
            if (!lu.isInvertible()) break;
            const Eigen::Vector3d dx = lu.solve(Eigen::Vector3d{f.i_d, f.i_q, f.omega_e});
            x = x - PlantState{dx[0], dx[1], dx[2]};
            if (!x.finite()) break;
        }
        if (!converged) continue;
        bool duplicate = false;
        for (const auto& r : roots) duplicate = duplicate || same_root(r, x, opt.dedupe_rel);
        if (!duplicate) roots.push_back(x);
    }
    return roots;
}

}  // namespace motorlab
