#include <gtest/gtest.h>

#include "motorlab/config.hpp"
#include "motorlab/pifoc.hpp"
#include "motorlab/training.hpp"

using namespace motorlab;

namespace {

KeyValueConfig full_config() {
    KeyValueConfig cfg;
    motor_params_to_config(MotorParams::ipmsm_d1(), cfg);
    return cfg;
}

}  // namespace

TEST(KeyValueConfig, ParsesCommentsAndWhitespace) {
    const auto cfg = KeyValueConfig::parse("# header\n  R = 0.5  # trailing\n\nname=abc\n");
    EXPECT_DOUBLE_EQ(cfg.require_double("R"), 0.5);
    EXPECT_EQ(cfg.get("name").value(), "abc");
    EXPECT_FALSE(cfg.contains("missing"));
}

TEST(KeyValueConfig, MalformedLineNamesLocation) {
    try {
        KeyValueConfig::parse("R = 1\nthis line has no equals\n", "motor.cfg");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("motor.cfg:2"), std::string::npos);
    }
}

TEST(KeyValueConfig, BadNumberNamesKey) {
    const auto cfg = KeyValueConfig::parse("Vmax = fast\n");
    try {
        (void)cfg.require_double("Vmax");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "Vmax");
    }
}

TEST(MotorParamsConfig, RoundTrip) {
    const MotorParams p = motor_params_from_config(full_config());
    const MotorParams d = MotorParams::ipmsm_d1();
    EXPECT_EQ(p.R, d.R);
    EXPECT_EQ(p.L_d, d.L_d);
    EXPECT_EQ(p.L_q, d.L_q);
    EXPECT_EQ(p.Phi, d.Phi);
    EXPECT_EQ(p.P, d.P);
    EXPECT_EQ(p.J, d.J);
    EXPECT_EQ(p.V_max, d.V_max);
    EXPECT_EQ(p.T_Lmax, d.T_Lmax);
}

TEST(MotorParamsConfig, MissingVmaxNamesTheKey) {
    KeyValueConfig cfg;
    const KeyValueConfig full = full_config();
    for (const auto& [k, v] : full.entries()) {
        if (k != "Vmax") cfg.set(k, v);
    }
    try {
        (void)motor_params_from_config(cfg);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "Vmax");
        EXPECT_NE(std::string(e.what()).find("Vmax"), std::string::npos);
    }
}

TEST(MotorParamsConfig, InvalidValueRejected) {
    auto cfg = full_config();
    cfg.set("J", "-1");
    EXPECT_THROW((void)motor_params_from_config(cfg), std::exception);
}

TEST(PiGainsConfig, OverridesAndLimiterFlag) {
    const auto cfg = KeyValueConfig::parse("kp_w = 0.2\nlimiters = true\n");
    const PIGains g = pi_gains_from_config(cfg);
    EXPECT_DOUBLE_EQ(g.kp_w, 0.2);
    EXPECT_DOUBLE_EQ(g.Ti_d, 0.0295);
    EXPECT_TRUE(g.limiters_enabled);
}

TEST(TrainConfigFromConfig, ReadsKeys) {
    const auto cfg = KeyValueConfig::parse("epochs = 30\nlr = 0.002\ntape = checkpointed\nhidden = 16\n");
    const TrainConfig tc = train_config_from_config(cfg);
    EXPECT_EQ(tc.epochs, 30);
    EXPECT_DOUBLE_EQ(tc.adam.lr, 0.002);
    EXPECT_EQ(tc.tape, TapeMode::Checkpointed);
    EXPECT_EQ(tc.hidden, 16);
    EXPECT_EQ(tc.n_batch, 8);
    EXPECT_EQ(tc.warmup_epochs, 50);
    EXPECT_THROW(train_config_from_config(KeyValueConfig::parse("tape = sometimes\n")), ConfigError);
}

TEST(ConfigHash, CanonicalFormIsOrderIndependent) {
    const auto a = KeyValueConfig::parse("b = 2\na = 1\n");
    const auto b = KeyValueConfig::parse("a = 1\n# note\nb = 2\n");
    EXPECT_EQ(a.canonical(), b.canonical());
    EXPECT_EQ(fnv1a64(a.canonical()), fnv1a64(b.canonical()));
    EXPECT_NE(fnv1a64("a=1\n"), fnv1a64("a=2\n"));
    EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(ShippedConfigs, ParseAndValidate) {
    for (const char* name : {"ipmsm_d1.cfg", "reduced.cfg"}) {
        const auto cfg = KeyValueConfig::load(std::string(MOTORLAB_SOURCE_DIR) + "/configs/" + name);
        EXPECT_NO_THROW(motor_params_from_config(cfg).validate()) << name;
        EXPECT_NO_THROW(train_config_from_config(cfg).validate()) << name;
    }
}
