#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace motorlab {

/// Raised when a numerical routine is handed a non-finite or out-of-domain input.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Physical constants and ratings of an interior permanent-magnet synchronous motor.
///
/// Speeds `f_min`/`f_max` are mechanical rpm. Torques are shaft torques in N·m.
struct MotorParams {
    double R = 0.38;       // winding resistance [Ohm]
    double L_d = 11.2e-3;  // d-axis inductance [H]
    double L_q = 19e-3;    // q-axis inductance [H]
    double Phi = 0.107;    // magnet flux linkage [Wb]
    int P = 2;             // pole pairs
    double J = 10e-4;      // rotor inertia [kg m^2]
    double D = 0.0;        // viscous friction [N m s/rad]
    double V_max = 233.0;  // voltage rating [V]
    double I_max = 13.0;   // current rating [A]
    double P_max = 800.0;  // power rating [W]
    double f_min = 1000.0; // [rpm]
    double f_max = 13000.0;
    double T_Lmin = 0.1;   // [N m]
    double T_Lmax = 1.83;

    /// Throws DomainError naming the first violated constraint.
    void validate() const;

    /// IEEJ D1-like benchmark machine.
    static MotorParams ipmsm_d1() { return {}; }
};

/// dq-frame plant state. Also used for its time derivative (A/s, A/s, rad/s^2).
struct PlantState {
    double i_d = 0.0;
    double i_q = 0.0;
    double omega_e = 0.0;  // electrical angular velocity [rad/s]

    [[nodiscard]] bool finite() const {
        return std::isfinite(i_d) && std::isfinite(i_q) && std::isfinite(omega_e);
    }
    [[nodiscard]] double max_abs() const {
        return std::max({std::abs(i_d), std::abs(i_q), std::abs(omega_e)});
    }

    PlantState& operator+=(const PlantState& o) {
        i_d += o.i_d;
        i_q += o.i_q;
        omega_e += o.omega_e;
        return *this;
    }
    friend PlantState operator+(PlantState a, const PlantState& b) { return a += b; }
    friend PlantState operator-(const PlantState& a, const PlantState& b) {
        return {a.i_d - b.i_d, a.i_q - b.i_q, a.omega_e - b.omega_e};
    }
    friend PlantState operator*(double s, const PlantState& a) {
        return {s * a.i_d, s * a.i_q, s * a.omega_e};
    }
    friend bool operator==(const PlantState&, const PlantState&) = default;
};

using StateRate = PlantState;

struct VoltageInput {
    double v_d = 0.0;
    double v_q = 0.0;

    [[nodiscard]] double norm() const { return std::hypot(v_d, v_q); }
    friend bool operator==(const VoltageInput&, const VoltageInput&) = default;
};

/// Row-major 3x3 Jacobian.
using Jacobian3 = std::array<std::array<double, 3>, 3>;

/// Right-hand side of the dq-axis IPMSM model (no clamping, no 3/2 factor).
StateRate pmsm_derivative(const MotorParams& params, const PlantState& state, const VoltageInput& v,
                          double load_torque);

/// d(pmsm_derivative)/d(state). The voltage Jacobian is the constant diag(1/L_d, 1/L_q, 0).
Jacobian3 pmsm_state_jacobian(const MotorParams& params, const PlantState& state);

/// Shaft torque T_e = P (Phi + (L_d - L_q) i_d) i_q.
double electrical_torque(const MotorParams& params, const PlantState& state);

struct PowerQuantities {
    double electrical = 0.0;  // v . i
    double copper = 0.0;      // R |i|^2
    double mechanical = 0.0;  // T_e * omega_m
};

PowerQuantities power_quantities(const MotorParams& params, const PlantState& state, const VoltageInput& v);

/// Magnetic co-energy stored in the winding inductances.
inline double magnetic_energy(const MotorParams& p, const PlantState& s) {
    return 0.5 * p.L_d * s.i_d * s.i_d + 0.5 * p.L_q * s.i_q * s.i_q;
}

/// Rotor kinetic energy, in terms of the mechanical speed omega_e / P.
inline double kinetic_energy(const MotorParams& p, const PlantState& s) {
    const double omega_m = s.omega_e / p.P;
    return 0.5 * p.J * omega_m * omega_m;
}

struct DcMotorState {
    double i = 0.0;
    double omega = 0.0;
};

/// Brushed DC motor: di/dt = (v - R i - Phi w)/L, dw/dt = (Phi i - T_L)/J.
DcMotorState dc_motor_derivative(double R, double L, double Phi, double J, const DcMotorState& state, double v,
                                 double load_torque);

inline double rpm_to_electrical(double rpm, int pole_pairs) {
    return rpm * pole_pairs * 2.0 * std::numbers::pi / 60.0;
}

inline double electrical_to_rpm(double omega_e, int pole_pairs) {
    return omega_e * 60.0 / (2.0 * std::numbers::pi * pole_pairs);
}

}  // namespace motorlab
