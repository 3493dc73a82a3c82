#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "checks.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("motorlab_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

Run cli(const std::string& args, const fs::path& dir) {
    const auto err = dir / "stderr.txt";
    const std::string cmd = std::string(MOTORLAB_CLI) + " " + args + " > /dev/null 2> " + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

std::string reduced() { return motorlab::checks::reduced_config_path().string(); }

std::size_t data_rows(const fs::path& csv) {
    std::ifstream in(csv);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n - 1;
}

}  // namespace

TEST(Cli, MissingRequiredKeyIsNamed) {
    const auto d = scratch("missing");
    std::ofstream(d / "bad.cfg") << "R = 0.38\nLd = 11.2e-3\nLq = 19e-3\nPhi = 0.107\nP = 2\nJ = 1e-3\nD = 0\nImax = 13\n"
                                 "Pmax = 800\nfmin = 1000\nfmax = 13000\nTLmin = 0.1\nTLmax = 1.83\n";
    const auto r = cli("eval pifoc:mc --config " + (d / "bad.cfg").string() + " --out " + (d / "o").string(), d);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("Vmax"), std::string::npos) << r.err;
}

TEST(Cli, UnknownControllerTokenIsUsageError) {
    const auto d = scratch("token");
    EXPECT_EQ(cli("eval pid:fast --out " + (d / "o").string(), d).code, 1);
}

TEST(Cli, EquilibriaOfZeroInputContainOrigin) {
    const auto d = scratch("eq");
    ASSERT_EQ(cli("equilibria --vd 0 --vq 0 --torque 0 --out " + d.string(), d).code, 0);
    const auto text = slurp(d / "equilibria.csv");
    EXPECT_EQ(text.substr(0, text.find('\n')), "i_d,i_q,omega_e,residual");
    EXPECT_TRUE(fs::exists(d / "manifest.json"));
}

TEST(Cli, EvalWritesSweepAndManifest) {
    const auto d = scratch("eval");
    ASSERT_EQ(cli("eval pifoc:mc --config " + reduced() + " --lattice 2x2 --trajectories --out " + d.string(), d).code, 0);
    EXPECT_GE(data_rows(d / "sweep.csv"), 1u);
    const auto m = json::parse(slurp(d / "manifest.json"));
    EXPECT_EQ(m["command"], "eval");
    EXPECT_FALSE(m["config_hash"].get<std::string>().empty());
    EXPECT_EQ(m["config"]["controller"], "pifoc:mc");
    EXPECT_TRUE(fs::exists(d / "trajectories" / "point_0000.csv"));
}

TEST(Cli, TrainSmokeIsReproducible) {
    const auto d = scratch("train");
    const std::string args = "train --config " + reduced() + " --epochs 3 --hidden 4 --steps 50 --t-ramp 0.005 --seed 2 --lattice 2x2";
    ASSERT_EQ(cli(args + " --out " + (d / "a").string(), d).code, 0);
    ASSERT_EQ(cli(args + " --threads 2 --out " + (d / "b").string(), d).code, 0);
    EXPECT_EQ(slurp(d / "a" / "checkpoint.json"), slurp(d / "b" / "checkpoint.json"));
    EXPECT_EQ(slurp(d / "a" / "metrics.csv"), slurp(d / "b" / "metrics.csv"));
    EXPECT_EQ(data_rows(d / "a" / "metrics.csv"), 3u);
    EXPECT_TRUE(fs::exists(d / "a" / "best.json"));
    const auto m = json::parse(slurp(d / "a" / "manifest.json"));
    EXPECT_EQ(m["config"]["epochs"], "3");
    EXPECT_EQ(m["config"]["hidden"], "4");
}

TEST(Cli, MismatchOnCheckpointHasFullTable) {
    const auto d = scratch("mismatch");
    motorlab::save_checkpoint(d / "rnn.json", motorlab::init_rnn(3, 4));
    ASSERT_EQ(cli("mismatch " + (d / "rnn.json").string() + " --config " + reduced() +
                      " --lattice 2x2 --steps 100 --out " + (d / "o").string(),
                  d)
                  .code,
              0);
    EXPECT_EQ(data_rows(d / "o" / "mismatch.csv"), 45u);
}

TEST(Cli, FluctuationDefaultsRecorded) {
    const auto d = scratch("fluct");
    ASSERT_EQ(cli("fluct pifoc:mtpa --config " + reduced() + " --lattice 2x2 --steps 200 --out " + d.string(), d).code, 0);
    const auto m = json::parse(slurp(d / "manifest.json"));
    EXPECT_EQ(std::stod(m["config"]["fluctuation_rel"].get<std::string>()), 0.3);
    EXPECT_GE(data_rows(d / "fluct.csv"), 1u);
}

TEST(Cli, CheckpointVersionMismatchRejected) {
    const auto d = scratch("version");
    auto j = json::parse(motorlab::checkpoint_to_string(motorlab::init_rnn(1, 4)));
    j["format_version"] = 999;
    std::ofstream(d / "old.json") << j.dump();
    const auto r = cli("eval " + (d / "old.json").string() + " --lattice 2x2 --steps 10 --out " + (d / "o").string(), d);
    EXPECT_EQ(r.code, 1);
}
