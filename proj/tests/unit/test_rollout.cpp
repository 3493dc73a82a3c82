#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "checks.hpp"
#include "motorlab/csv.hpp"
#include "motorlab/rollout.hpp"

using namespace motorlab;

namespace {

const MotorParams kD1 = MotorParams::ipmsm_d1();

double rk4_decay(double dt, int steps) {
    double x = 1.0;
    for (int k = 0; k < steps; ++k) x = rk4_step([](double y) { return -y; }, x, dt);
    return x;
}

}  // namespace

TEST(Rk4, ScalarDecayMatchesTaylorPolynomial) { EXPECT_NEAR(rk4_decay(0.1, 1), 0.90483750, 1e-8); }

TEST(Rk4, ScalarGlobalErrorIsFourthOrder) {
    const double e1 = std::abs(rk4_decay(0.1, 10) - std::exp(-1.0));
    const double e2 = std::abs(rk4_decay(0.05, 20) - std::exp(-1.0));
    EXPECT_NEAR(e1 / e2, 16.0, 1.0);
}

TEST(Rk4, ClosedLoopPlantStepRefinement) {
    const auto study = checks::rk4_closed_loop_order();
    EXPECT_GE(study.ratio(), 12.0) << study.error_coarse << " " << study.error_fine;
    EXPECT_LE(study.ratio(), 20.0) << study.error_coarse << " " << study.error_fine;
}

TEST(SimConfig, StepsAndValidation) {
    EXPECT_EQ(SimConfig{}.steps(), 10000);
    EXPECT_EQ((SimConfig{2e-4, 0.5, 1, 1e6}).steps(), 2500);
    EXPECT_THROW((SimConfig{2e-4, 0.00031, 1, 1e6}).validate(), DomainError);
    EXPECT_THROW((SimConfig{0.0, 1.0, 1, 1e6}).validate(), DomainError);
    EXPECT_THROW((SimConfig{2e-4, 1.0, 0, 1e6}).validate(), DomainError);
}

TEST(Simulate, ArraySizesAndDerivedSignals) {
    const SimConfig cfg{2e-4, 0.02, 1, 1e6};
    const auto spec = ControllerSpec::pifoc(PIGains{}, CurrentStrategy::MaxCurrent, kD1);
    const auto t = simulate(spec, kD1, {300.0, 0.01}, TorqueProfile::step(0.5), cfg, {});
    EXPECT_FALSE(t.diverged);
    EXPECT_EQ(t.planned_steps, 100);
    EXPECT_EQ(t.steps(), 100);
    EXPECT_EQ(t.i_d.size(), 101u);
    EXPECT_EQ(t.t.size(), 101u);
    EXPECT_EQ(t.P_elec.size(), 100u);
    EXPECT_EQ(t.i_d_ref.size(), 100u);
    EXPECT_DOUBLE_EQ(t.t.back(), 0.02);
    EXPECT_DOUBLE_EQ(t.omega_ref.back(), 300.0);
    for (int k = 0; k < t.steps(); ++k) {
        EXPECT_LE(std::hypot(t.v_d[k], t.v_q[k]), kD1.V_max * (1 + 1e-12));
        EXPECT_DOUBLE_EQ(t.P_elec[k], t.v_d[k] * t.i_d[k] + t.v_q[k] * t.i_q[k]);
        EXPECT_EQ(t.T_L[k], 0.5);
    }
    EXPECT_DOUBLE_EQ(t.T_e[7], electrical_torque(kD1, t.state(7)));
}

TEST(Simulate, DeterministicBitwise) {
    const SimConfig cfg{2e-4, 0.05, 2, 1e6};
    const auto spec = ControllerSpec::pifoc(PIGains{}, CurrentStrategy::Mtpa, kD1);
    const auto a = simulate(spec, kD1, {500.0, 0.02}, TorqueProfile::ramp_fluctuation(1.0, 0.02, 0.3, 4), cfg, {1, 2, 3});
    const auto b = simulate(spec, kD1, {500.0, 0.02}, TorqueProfile::ramp_fluctuation(1.0, 0.02, 0.3, 4), cfg, {1, 2, 3});
    EXPECT_EQ(a.omega_e, b.omega_e);
    EXPECT_EQ(a.i_d, b.i_d);
    EXPECT_EQ(a.v_q, b.v_q);
}

TEST(Simulate, DivergenceTruncatesAndFlags) {
    const SimConfig cfg{2e-4, 0.1, 1, 1e6};
    const auto t = simulate(ControllerSpec::zero(), kD1, {100.0, 0.1}, TorqueProfile::step(1e4), cfg, {});
    EXPECT_TRUE(t.diverged);
    EXPECT_LT(t.steps(), t.planned_steps);
    EXPECT_EQ(t.i_d.size(), static_cast<std::size_t>(t.steps()) + 1);
    for (double w : t.omega_e) {
        EXPECT_TRUE(std::isfinite(w));
        EXPECT_LE(std::abs(w), 1e6);
    }
}

TEST(Simulate, ZeroControllerAtRestStaysAtRest) {
    const auto t = simulate(ControllerSpec::zero(), kD1, {100.0, 0.1}, TorqueProfile::step(0.0), {2e-4, 0.01, 1, 1e6}, {});
    for (double w : t.omega_e) EXPECT_EQ(w, 0.0);
}

TEST(Simulate, RnnControllerMatchesTapedRollout) {
    const RnnParams r = checks::exercising_rnn(5, 6);
    const SimConfig cfg{2e-4, 0.01, 1, 1e6};
    const PlantState x0{0.3, -0.2, 4.0};
    const auto spec = ControllerSpec::rnn_controller(std::make_shared<const RnnParams>(r), kD1);
    const auto a = simulate(spec, kD1, {250.0, 0.005}, TorqueProfile::step(0.4), cfg, x0);
    const auto b = simulate_rnn(r, effective_A(r), kD1, {250.0, 0.005}, TorqueProfile::step(0.4), cfg, x0);
    EXPECT_EQ(a.omega_e, b.traj.omega_e);
    EXPECT_EQ(a.v_d, b.traj.v_d);
}

TEST(Simulate, CheckpointedTapeStoresSqrtStates) {
    const RnnParams r = checks::exercising_rnn(5, 4);
    const SimConfig cfg{2e-4, 0.2, 1, 1e6};  // 1000 steps
    const auto full = simulate_rnn(r, effective_A(r), kD1, {250.0, 0.1}, TorqueProfile::step(0.4), cfg, {},
                                   TapeMode::Full);
    const auto ckpt = simulate_rnn(r, effective_A(r), kD1, {250.0, 0.1}, TorqueProfile::step(0.4), cfg, {},
                                   TapeMode::Checkpointed);
    EXPECT_EQ(full.hidden.rows(), 1001);
    EXPECT_EQ(ckpt.stride, 32);
    EXPECT_LE(ckpt.hidden.rows(), 33);
    EXPECT_EQ(full.traj.omega_e, ckpt.traj.omega_e);
    for (Eigen::Index r_i = 0; r_i < ckpt.hidden.rows(); ++r_i) {
        if (r_i * ckpt.stride > 1000) break;
        EXPECT_TRUE((ckpt.hidden.row(r_i).array() == full.hidden.row(r_i * ckpt.stride).array()).all());
    }
}

TEST(AdvancePlantVjp, MatchesFiniteDifferences) {
    const SimConfig cfg{2e-4, 2e-4, 3, 1e6};
    const PlantState x{-1.0, 2.0, 350.0};
    const VoltageInput v{-20.0, 60.0};
    const PlantState g{0.3, -1.2, 0.01};
    VoltageInput gv{};
    const PlantState gx = advance_plant_vjp(kD1, x, v, 0.6, cfg, g, gv);
    auto objective = [&](const PlantState& s, const VoltageInput& u) {
        const auto y = advance_plant(kD1, s, u, 0.6, cfg);
        return g.i_d * y.i_d + g.i_q * y.i_q + g.omega_e * y.omega_e;
    };
    const double e = 1e-5;
    EXPECT_NEAR(gx.i_d, (objective({x.i_d + e, x.i_q, x.omega_e}, v) - objective({x.i_d - e, x.i_q, x.omega_e}, v)) / (2 * e), 1e-7);
    EXPECT_NEAR(gx.i_q, (objective({x.i_d, x.i_q + e, x.omega_e}, v) - objective({x.i_d, x.i_q - e, x.omega_e}, v)) / (2 * e), 1e-7);
    EXPECT_NEAR(gx.omega_e, (objective({x.i_d, x.i_q, x.omega_e + e}, v) - objective({x.i_d, x.i_q, x.omega_e - e}, v)) / (2 * e), 1e-7);
    EXPECT_NEAR(gv.v_d, (objective(x, {v.v_d + e, v.v_q}) - objective(x, {v.v_d - e, v.v_q})) / (2 * e), 1e-8);
    EXPECT_NEAR(gv.v_q, (objective(x, {v.v_d, v.v_q + e}) - objective(x, {v.v_d, v.v_q - e})) / (2 * e), 1e-8);
}

TEST(TrajectoryCsv, HeaderNamesEveryColumn) {
    const auto spec = ControllerSpec::pifoc(PIGains{}, CurrentStrategy::MaxCurrent, kD1);
    const auto t = simulate(spec, kD1, {300.0, 0.01}, TorqueProfile::step(0.5), {2e-4, 0.004, 1, 1e6}, {});
    const auto path = std::filesystem::temp_directory_path() / "motorlab_traj.csv";
    write_trajectory_csv(path, t);
    const auto table = csv::read(path);
    const std::vector<std::string> expected{"t",      "omega_ref", "i_d",    "i_q",  "omega_e", "v_d",     "v_q",
                                            "T_L",    "P_elec",    "P_cu",   "P_mech", "T_e",   "i_d_ref", "i_q_ref"};
    EXPECT_EQ(table.header, expected);
    EXPECT_EQ(table.rows.size(), 21u);
    EXPECT_EQ(table.rows.back()[table.column("v_d")], "");
    EXPECT_EQ(std::stod(table.rows[3][table.column("omega_e")]), t.omega_e[3]);
    EXPECT_THROW((void)table.column("nope"), std::runtime_error);
    std::filesystem::remove(path);
}
