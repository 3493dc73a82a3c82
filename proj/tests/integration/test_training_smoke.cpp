#include <cmath>

#include <gtest/gtest.h>

#include "checks.hpp"

using namespace motorlab;

TEST(TrainingSmoke, LossDropsOnTheFirstBatch) {
    const auto run = checks::smoke_training(0);
    ASSERT_EQ(run.result.history.size(), 20u);
    EXPECT_TRUE(std::isfinite(run.after_loss));
    EXPECT_GE(run.reduction(), 0.2) << "epoch 1 " << run.epoch1_loss << " after " << run.after_loss;
    for (const auto& h : run.result.history) EXPECT_FALSE(h.loss.active.copper);
}

TEST(TrainingSmoke, RerunIsBitwiseIdentical) {
    const auto a = checks::smoke_training(4);
    const auto b = checks::smoke_training(4);
    EXPECT_EQ(checkpoint_to_string(a.result.final_params), checkpoint_to_string(b.result.final_params));
    EXPECT_EQ(a.after_loss, b.after_loss);
}
