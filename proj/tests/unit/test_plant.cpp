#include <cmath>

#include <gtest/gtest.h>

#include "checks.hpp"
#include "motorlab/plant.hpp"
#include "motorlab/rollout.hpp"

using namespace motorlab;

namespace {

const MotorParams kD1 = MotorParams::ipmsm_d1();

}  // namespace

TEST(PmsmDerivative, OriginIsEquilibrium) {
    const auto f = pmsm_derivative(kD1, {0, 0, 0}, {0, 0}, 0.0);
    EXPECT_EQ(f.i_d, 0.0);
    EXPECT_EQ(f.i_q, 0.0);
    EXPECT_EQ(f.omega_e, 0.0);
}

TEST(PmsmDerivative, QAxisCurrentAlone) {
    const auto f = pmsm_derivative(kD1, {0, 1, 0}, {0, 0}, 0.0);
    EXPECT_EQ(f.i_d, 0.0);
    EXPECT_NEAR(f.i_q, -20.0, 20.0 * 1e-12);
    EXPECT_NEAR(f.omega_e, 428.0, 428.0 * 1e-12);
}

TEST(PmsmDerivative, LoadTorqueDecelerates) {
    const auto f = pmsm_derivative(kD1, {0, 0, 0}, {0, 0}, 1.0);
    EXPECT_NEAR(f.omega_e, -2000.0, 2000.0 * 1e-12);
}

TEST(PmsmDerivative, HandExamplesWithinTolerance) { EXPECT_LT(checks::derivative_example_error(), 1e-12); }

TEST(PmsmDerivative, NonFiniteInputThrows) {
    EXPECT_THROW(pmsm_derivative(kD1, {NAN, 0, 0}, {0, 0}, 0.0), DomainError);
    EXPECT_THROW(pmsm_derivative(kD1, {0, 0, 0}, {INFINITY, 0}, 0.0), DomainError);
    EXPECT_THROW(pmsm_derivative(kD1, {0, 0, 0}, {0, 0}, NAN), DomainError);
}

TEST(PmsmDerivative, LinearInVoltage) {
    const PlantState s{-2.0, 3.0, 150.0};
    const VoltageInput v{12.0, -7.0};
    const auto f0 = pmsm_derivative(kD1, s, {0, 0}, 0.3);
    const auto f1 = pmsm_derivative(kD1, s, v, 0.3);
    for (double a : {-3.0, 0.5, 2.0, 10.0}) {
        const auto fa = pmsm_derivative(kD1, s, {a * v.v_d, a * v.v_q}, 0.3);
        EXPECT_NEAR(fa.i_d - f0.i_d, a * (f1.i_d - f0.i_d), 1e-9 * std::abs(a * (f1.i_d - f0.i_d)) + 1e-9);
        EXPECT_NEAR(fa.i_q - f0.i_q, a * (f1.i_q - f0.i_q), 1e-9 * std::abs(a * (f1.i_q - f0.i_q)) + 1e-9);
        EXPECT_DOUBLE_EQ(fa.omega_e, f0.omega_e);
    }
}

TEST(PmsmDerivative, JacobianMatchesFiniteDifferences) {
    MotorParams p = kD1;
    p.D = 2e-4;
    const PlantState s{-1.5, 2.5, 300.0};
    const VoltageInput v{5.0, 30.0};
    const auto jac = pmsm_state_jacobian(p, s);
    const double steps[] = {1e-6, 1e-6, 1e-4};
    for (int c = 0; c < 3; ++c) {
        PlantState sp = s, sm = s;
        double* xp[] = {&sp.i_d, &sp.i_q, &sp.omega_e};
        double* xm[] = {&sm.i_d, &sm.i_q, &sm.omega_e};
        *xp[c] += steps[c];
        *xm[c] -= steps[c];
        const auto fp = pmsm_derivative(p, sp, v, 0.4);
        const auto fm = pmsm_derivative(p, sm, v, 0.4);
        const double fd[] = {(fp.i_d - fm.i_d) / (2 * steps[c]), (fp.i_q - fm.i_q) / (2 * steps[c]),
                             (fp.omega_e - fm.omega_e) / (2 * steps[c])};
        for (int r = 0; r < 3; ++r) EXPECT_NEAR(jac[r][c], fd[r], 1e-6 * std::max(1.0, std::abs(fd[r])));
    }
}

TEST(ElectricalTorque, HandExamples) {
    EXPECT_NEAR(electrical_torque(kD1, {0, 1, 0}), 0.214, 1e-12);
    EXPECT_EQ(electrical_torque(kD1, {-7.0, 0, 0}), 0.0);
    EXPECT_NEAR(electrical_torque(kD1, {-5, 1, 0}), 0.292, 1e-12);
}

TEST(ElectricalTorque, SurfaceMagnetHasNoReluctanceTorque) {
    MotorParams p = kD1;
    p.L_q = p.L_d;
    EXPECT_DOUBLE_EQ(electrical_torque(p, {-8.0, 2.0, 0}), electrical_torque(p, {3.0, 2.0, 0}));
}

TEST(ElectricalTorque, ConsistentWithMechanicalRow) {
    MotorParams p = kD1;
    p.D = 1e-4;
    const PlantState s{-3.0, 4.0, 250.0};
    const double tl = 0.7;
    const auto f = pmsm_derivative(p, s, {0, 0}, tl);
    const double expected = -(p.D / p.J) * s.omega_e + (p.P / p.J) * electrical_torque(p, s) - (p.P / p.J) * tl;
    EXPECT_NEAR(f.omega_e, expected, 1e-9 * std::abs(expected));
}

TEST(PowerQuantities, HandExamples) {
    const auto zero = power_quantities(kD1, {0, 0, 0}, {100, -50});
    EXPECT_EQ(zero.electrical, 0.0);
    EXPECT_EQ(zero.copper, 0.0);
    EXPECT_EQ(zero.mechanical, 0.0);

    const auto stall = power_quantities(kD1, {0, 1, 0}, {0, 0.38});
    EXPECT_NEAR(stall.electrical, 0.38, 1e-15);
    EXPECT_NEAR(stall.copper, 0.38, 1e-15);
    EXPECT_EQ(stall.mechanical, 0.0);

    EXPECT_NEAR(power_quantities(kD1, {3, 4, 0}, {0, 0}).copper, 9.5, 1e-12);
}

TEST(PowerBalance, FineStepTrajectory) {
    const auto pb = checks::power_balance(kD1);
    EXPECT_LT(pb.electrical, 1e-3);
    EXPECT_LT(pb.mechanical, 1e-3);
}

TEST(PowerBalance, WithViscousFriction) {
    MotorParams p = kD1;
    p.D = 5e-4;
    const auto pb = checks::power_balance(p, 0.05);
    EXPECT_LT(pb.electrical, 1e-3);
    EXPECT_LT(pb.mechanical, 1e-3);
}

TEST(PlantFixedPoint, ConstantInputLeavesEquilibriumUnchanged) {
    // Pick omega, solve the steady d/q voltages for chosen currents, then the matching load.
    const PlantState x{-2.0, 3.0, 400.0};
    const VoltageInput v{kD1.R * x.i_d - kD1.L_q * x.omega_e * x.i_q,
                         kD1.L_d * x.omega_e * x.i_d + kD1.R * x.i_q + kD1.Phi * x.omega_e};
    const double tl = electrical_torque(kD1, x);
    const auto f = pmsm_derivative(kD1, x, v, tl);
    EXPECT_NEAR(f.i_d, 0.0, 1e-9);
    EXPECT_NEAR(f.i_q, 0.0, 1e-9);
    EXPECT_NEAR(f.omega_e, 0.0, 1e-9);
    PlantState y = x;
    for (int k = 0; k < 1000; ++k) y = advance_plant(kD1, y, v, tl, SimConfig{});
    EXPECT_NEAR(y.i_d, x.i_d, 1e-9);
    EXPECT_NEAR(y.i_q, x.i_q, 1e-9);
    EXPECT_NEAR(y.omega_e, x.omega_e, 1e-7);
}

TEST(MotorParams, ValidationRejectsBadValues) {
    EXPECT_NO_THROW(kD1.validate());
    MotorParams p = kD1;
    p.R = 0.0;
    EXPECT_THROW(p.validate(), DomainError);
    p = kD1;
    p.f_min = p.f_max;
    EXPECT_THROW(p.validate(), DomainError);
    p = kD1;
    p.P = 0;
    EXPECT_THROW(p.validate(), DomainError);
    p = kD1;
    p.D = -1.0;
    EXPECT_THROW(p.validate(), DomainError);
}

TEST(DcMotor, HandExamples) {
    const auto rest = dc_motor_derivative(1, 1, 1, 1, {0, 0}, 0, 0);
    EXPECT_EQ(rest.i, 0.0);
    EXPECT_EQ(rest.omega, 0.0);
    const auto f = dc_motor_derivative(1, 1, 1, 1, {1, 0}, 0, 0);
    EXPECT_DOUBLE_EQ(f.i, -1.0);
    EXPECT_DOUBLE_EQ(f.omega, 1.0);
}

TEST(DcMotor, SpeedStepFollowsMechanicalTimeConstant) {
    // Electrically fast machine: L much smaller than R * (R J / Phi^2).
    const double R = 1.0, L = 1e-4, Phi = 0.5, J = 0.05, v = 10.0;
    const double tau = R * J / (Phi * Phi);
    const double w_inf = v / Phi;
    DcMotorState s{};
    const double h = 1e-5;
    auto field = [&](const DcMotorState& x) { return dc_motor_derivative(R, L, Phi, J, x, v, 0.0); };
    double t = 0.0;
    double worst = 0.0;
    for (int k = 0; k < static_cast<int>(5 * tau / h); ++k) {
        const auto k1 = field(s);
        const DcMotorState s2{s.i + 0.5 * h * k1.i, s.omega + 0.5 * h * k1.omega};
        const auto k2 = field(s2);
        const DcMotorState s3{s.i + 0.5 * h * k2.i, s.omega + 0.5 * h * k2.omega};
        const auto k3 = field(s3);
        const DcMotorState s4{s.i + h * k3.i, s.omega + h * k3.omega};
        const auto k4 = field(s4);
        s.i += h / 6 * (k1.i + 2 * k2.i + 2 * k3.i + k4.i);
        s.omega += h / 6 * (k1.omega + 2 * k2.omega + 2 * k3.omega + k4.omega);
        t += h;
        if (t > 10 * L / R) worst = std::max(worst, std::abs(s.omega - w_inf * (1 - std::exp(-t / tau))) / w_inf);
    }
    EXPECT_LT(worst, 5e-3);
}

TEST(Units, RpmConversionRoundTrip) {
    EXPECT_NEAR(rpm_to_electrical(100.0, 2), 100.0 * 2 * 2 * M_PI / 60.0, 1e-12);
    EXPECT_NEAR(electrical_to_rpm(rpm_to_electrical(1234.5, 2), 2), 1234.5, 1e-9);
}
