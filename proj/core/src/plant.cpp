#include "motorlab/plant.hpp"

#include <string>

namespace motorlab {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(std::string("invalid motor parameters: ") + what);
}

}  // namespace

void MotorParams::validate() const {
    require(std::isfinite(R) && R > 0, "R must be > 0");
    require(std::isfinite(L_d) && L_d > 0, "Ld must be > 0");
    require(std::isfinite(L_q) && L_q > 0, "Lq must be > 0");
    require(std::isfinite(Phi) && Phi > 0, "Phi must be > 0");
    require(P >= 1, "P must be >= 1");
    require(std::isfinite(J) && J > 0, "J must be > 0");
    require(std::isfinite(D) && D >= 0, "D must be >= 0");
    require(std::isfinite(V_max) && V_max > 0, "Vmax must be > 0");
    require(std::isfinite(I_max) && I_max > 0, "Imax must be > 0");
    require(std::isfinite(P_max) && P_max > 0, "Pmax must be > 0");
    require(std::isfinite(f_min) && std::isfinite(f_max) && f_min < f_max, "fmin must be < fmax");
    require(std::isfinite(T_Lmin) && std::isfinite(T_Lmax) && T_Lmin < T_Lmax, "TLmin must be < TLmax");
}

StateRate pmsm_derivative(const MotorParams& p, const PlantState& s, const VoltageInput& v, double load_torque) {
    if (!s.finite() || !std::isfinite(v.v_d) || !std::isfinite(v.v_q) || !std::isfinite(load_torque)) {
        throw DomainError("pmsm_derivative: non-finite input");
    }
    const double w = s.omega_e;
    StateRate rate;
    rate.i_d = (-p.R * s.i_d + p.L_q * w * s.i_q + v.v_d) / p.L_d;
    rate.i_q = (-p.L_d * w * s.i_d - p.R * s.i_q + v.v_q - p.Phi * w) / p.L_q;
    rate.omega_e = -p.D / p.J * w + static_cast<double>(p.P * p.P) / p.J * (p.Phi + (p.L_d - p.L_q) * s.i_d) * s.i_q
                   - p.P / p.J * load_torque;
    return rate;
}

Jacobian3 pmsm_state_jacobian(const MotorParams& p, const PlantState& s) {
    const double w = s.omega_e;
    const double pp_j = static_cast<double>(p.P * p.P) / p.J;
    const double dl = p.L_d - p.L_q;
    Jacobian3 jac{};
    jac[0] = {-p.R / p.L_d, p.L_q * w / p.L_d, p.L_q * s.i_q / p.L_d};
    jac[1] = {-p.L_d * w / p.L_q, -p.R / p.L_q, (-p.L_d * s.i_d - p.Phi) / p.L_q};
    jac[2] = {pp_j * dl * s.i_q, pp_j * (p.Phi + dl * s.i_d), -p.D / p.J};
    return jac;
}

double electrical_torque(const MotorParams& p, const PlantState& s) {
    return p.P * (p.Phi + (p.L_d - p.L_q) * s.i_d) * s.i_q;
}

PowerQuantities power_quantities(const MotorParams& p, const PlantState& s, const VoltageInput& v) {
    PowerQuantities out;
    out.electrical = v.v_d * s.i_d + v.v_q * s.i_q;
    out.copper = p.R * (s.i_d * s.i_d + s.i_q * s.i_q);
    out.mechanical = electrical_torque(p, s) * s.omega_e / p.P;
    return out;
}

DcMotorState dc_motor_derivative(double R, double L, double Phi, double J, const DcMotorState& s, double v,
                                 double load_torque) {
    return {(-R * s.i + v - Phi * s.omega) / L, (Phi * s.i - load_torque) / J};
}

}  // namespace motorlab
