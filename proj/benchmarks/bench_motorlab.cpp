#include <memory>

#include <benchmark/benchmark.h>

#include "motorlab/loss.hpp"
#include "motorlab/rnn.hpp"
#include "motorlab/rollout.hpp"

using namespace motorlab;

namespace {

const MotorParams kD1 = MotorParams::ipmsm_d1();

void BM_Rk4PlantStep(benchmark::State& state) {
    const SimConfig cfg{2e-4, 1.0, static_cast<int>(state.range(0)), 1e6};
    PlantState x{-1.0, 3.0, 500.0};
    for (auto _ : state) {
        x = advance_plant(kD1, x, {-20.0, 80.0}, 0.5, cfg);
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(BM_Rk4PlantStep)->Arg(1)->Arg(4);

void BM_RnnStep(benchmark::State& state) {
    const int hidden = static_cast<int>(state.range(0));
    const RnnParams rnn = init_rnn(1, hidden);
    const Eigen::MatrixXd A = effective_A(rnn);
    RnnState h = RnnState::zeros(hidden);
    const RnnInput z = rnn_input(300.0, {1.0, 2.0, 250.0});
    for (auto _ : state) {
        auto r = rnn_step(rnn, A, h, z, kD1.V_max);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_RnnStep)->Arg(8)->Arg(32)->Arg(128);

// One training episode: rollout, loss seeds and the reverse pass.
void BM_RolloutAndBackward(benchmark::State& state) {
    const int hidden = static_cast<int>(state.range(0));
    const auto mode = state.range(1) == 0 ? TapeMode::Full : TapeMode::Checkpointed;
    const RnnParams rnn = init_rnn(2, hidden);
    const Eigen::MatrixXd A = effective_A(rnn);
    const SimConfig cfg{2e-4, 0.5, 1, 1e6};
    for (auto _ : state) {
        const auto ro = simulate_rnn(rnn, A, kD1, {600.0, 0.25}, TorqueProfile::step(0.5), cfg, {}, mode);
        std::vector<TrajectorySeeds> seeds;
        evaluate_losses({&ro.traj}, kD1.R, LossTerms{}, LossFloors{}, &seeds);
        auto g = backward(rnn, A, kD1, ro, seeds[0], cfg);
        benchmark::DoNotOptimize(g);
    }
    state.SetItemsProcessed(state.iterations() * cfg.steps());
}
BENCHMARK(BM_RolloutAndBackward)->Args({32, 0})->Args({32, 1})->Args({128, 0})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
