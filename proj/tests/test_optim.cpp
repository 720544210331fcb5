// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "egtsyn/optim.hpp"

namespace egtsyn {
namespace {

TEST(Adam, ZeroGradientLeavesParameters) {
  Tensor p = Tensor::row({1.0, -2.0, 3.0});
  p.set_requires_grad(true);
  const Tensor before = p;
  Adam opt({&p}, AdamConfig{});
  for (int i = 0; i < 5; ++i) opt.step();
  EXPECT_EQ(p.values()[0], before.values()[0]);
  EXPECT_EQ(p.values()[1], before.values()[1]);
  EXPECT_EQ(p.values()[2], before.values()[2]);
}

TEST(Adam, FirstStepMovesByLearningRateAgainstGradientSign) {
  Tensor p = Tensor::row({0.0, 0.0, 0.0});
  p.set_requires_grad(true);
  p.grad()[0] = 0.3;
  p.grad()[1] = -50.0;
  p.grad()[2] = 1e-3;
  AdamConfig cfg;
  cfg.lr = 0.01;
  AdamState state;
  adam_step(p, state, cfg);
  // At t=1 the bias-corrected update is lr * g / (|g| + eps).
  for (std::size_t i = 0; i < 3; ++i) {
    const double g = p.grad()[i];
    EXPECT_NEAR(p[i], -cfg.lr * g / (std::abs(g) + cfg.eps), 1e-15);
    EXPECT_NEAR(std::abs(p[i]), cfg.lr, 1e-7);
  }
}

TEST(Adam, SecondStepMatchesHandRecurrence) {
  Tensor p = Tensor::row({1.0});
  p.set_requires_grad(true);
  AdamConfig cfg;
  cfg.lr = 0.1;
  AdamState state;
  const double g1 = 2.0, g2 = -1.0;
  p.grad()[0] = g1;
  adam_step(p, state, cfg);
  p.grad()[0] = g2;
  adam_step(p, state, cfg);
  double m = 0, v = 0, x = 1.0;
  for (auto [t, g] : {std::pair{1, g1}, std::pair{2, g2}}) {
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    const double mh = m / (1 - std::pow(cfg.beta1, t));
    const double vh = v / (1 - std::pow(cfg.beta2, t));
    x -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
  }
  EXPECT_NEAR(p[0], x, 1e-14);
  EXPECT_EQ(state.step, 2u);
}

TEST(Adam, DeterministicAcrossRuns) {
  auto run = [] {
    Tensor p = Tensor::row({0.5, -0.25});
    p.set_requires_grad(true);
    Adam opt({&p}, AdamConfig{.lr = 0.05});
    for (int i = 0; i < 20; ++i) {
      opt.zero_grad();
      p.grad()[0] = 2 * p[0] - 1;
      p.grad()[1] = std::sin(p[1]);
      opt.step();
    }
    return p;
  };
  EXPECT_EQ(run(), run());
}

TEST(Adam, MinimisesAQuadratic) {
  Tensor p = Tensor::row({4.0});
  p.set_requires_grad(true);
  Adam opt({&p}, AdamConfig{.lr = 0.1});
  for (int i = 0; i < 500; ++i) {
    opt.zero_grad();
    p.grad()[0] = 2 * (p[0] - 1.5);
    opt.step();
  }
  EXPECT_NEAR(p[0], 1.5, 1e-2);
}

}  // namespace
}  // namespace egtsyn
