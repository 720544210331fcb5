// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "egtsyn/errors.hpp"
#include "egtsyn/training.hpp"
#include "test_support.hpp"

namespace egtsyn::training {
namespace {

model::ModelConfig small_config(model::Variant v = model::Variant::kGSyn) {
  model::ModelConfig cfg = model::tiny_config(v, 16, 5);
  cfg.dropout_rate = 0.0;
  return cfg;
}

double squared_norm(model::SynergyModel& m) {
  double s = 0;
  for (Tensor* t : m.parameter_tensors()) {
    for (double x : t->values()) s += x * x;
  }
  return s;
}

TrainOptions quick(std::size_t epochs, double lr = 1e-2) {
  TrainOptions o;
  o.epochs = epochs;
  o.batch_size = 8;
  o.lr = lr;
  o.seed = 4;
  return o;
}

TEST(Options, Validation) {
  TrainOptions o;
  EXPECT_NO_THROW(o.validate());
  o.batch_size = 0;
  EXPECT_THROW(o.validate(), ParameterError);
  o = {};
  o.delta = 0;
  EXPECT_THROW(o.validate(), ParameterError);
  o = {};
  o.lr = -1;
  EXPECT_THROW(o.validate(), ParameterError);
}

TEST(Train, ZeroLearningRateLeavesParameters) {
  const data::DatasetBundle b = test::separable_bundle();
  model::SynergyModel m(small_config());
  const model::SynergyModel before = m;
  train(m, b, b.labeled_indices(), {}, quick(3, 0.0));
  for (const std::string& name : m.parameter_names()) {
    EXPECT_EQ(m.parameter(name), before.parameter(name)) << name;
  }
}

TEST(Train, SameSeedSameHistory) {
  const data::DatasetBundle b = test::separable_bundle();
  const auto idx = b.labeled_indices();
  model::SynergyModel m1(small_config(model::Variant::kEGSyn));
  model::SynergyModel m2(small_config(model::Variant::kEGSyn));
  const auto h1 = train(m1, b, idx, idx, quick(4)).history;
  const auto h2 = train(m2, b, idx, idx, quick(4)).history;
  EXPECT_EQ(history_to_csv(h1), history_to_csv(h2));
  ASSERT_TRUE(h1.back().val_loss.has_value());
  EXPECT_EQ(*h1.back().val_loss, evaluation_loss(m1, b, idx));
}

TEST(Train, LossDecreasesOnSeparableSet) {
  const data::DatasetBundle b = test::separable_bundle();
  model::SynergyModel m(small_config());
  const TrainResult r = train(m, b, b.labeled_indices(), {}, quick(40));
  EXPECT_LT(r.final_loss(), r.history.front().train_loss);
}

TEST(Train, CallbackCanStopEarly) {
  const data::DatasetBundle b = test::separable_bundle();
  model::SynergyModel m(small_config());
  const TrainResult r = train(m, b, b.labeled_indices(), {}, quick(50),
                              [](const EpochStats& s) { return s.epoch < 3; });
  EXPECT_EQ(r.history.size(), 3u);
}

TEST(Train, DivergenceIsNumericError) {
  const data::DatasetBundle b = test::separable_bundle();
  model::SynergyModel m(small_config());
  m.parameter_tensors().front()->values()[0] = std::nan("");
  try {
    train(m, b, b.labeled_indices(), {}, quick(1));
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("learning rate"), std::string::npos);
  }
}

TEST(Train, WeakerPenaltyKeepsLargerWeights) {
  const data::DatasetBundle b = test::separable_bundle();
  TrainOptions strong = quick(30), weak = quick(30);
  strong.delta = 1.0;
  weak.delta = 1e12;
  model::SynergyModel ms(small_config()), mw(small_config());
  train(ms, b, b.labeled_indices(), {}, strong);
  train(mw, b, b.labeled_indices(), {}, weak);
  EXPECT_GT(squared_norm(mw), squared_norm(ms));
}

TEST(Evaluate, EmptySetAndWidthMismatch) {
  const data::DatasetBundle b = test::separable_bundle();
  model::SynergyModel m(small_config());
  EXPECT_THROW(evaluate(m, b, std::vector<std::size_t>{}), ProtocolError);
  EXPECT_NO_THROW(check_compatible(m.config(), b));
  EXPECT_THROW(check_compatible(model::tiny_config(model::Variant::kGSyn, 7, 5), b), ConfigError);
}

TEST(Evaluate, ConstantModelHasChanceAuc) {
  const data::DatasetBundle b = test::separable_bundle();
  model::SynergyModel m(small_config());
  for (Tensor* t : m.parameter_tensors()) {
    for (double& x : t->values()) x = 0.0;
  }
  const auto idx = b.labeled_indices();
  for (double p : predict_records(m, b, idx)) EXPECT_EQ(p, 0.5);
  const metrics::MetricsReport r = evaluate(m, b, idx);
  EXPECT_EQ(*r.roc_auc, 0.5);
  EXPECT_EQ(r.n, idx.size());
  EXPECT_NEAR(evaluation_loss(m, b, idx), std::log(2.0), 1e-12);
}

TEST(History, CsvFormat) {
  const std::vector<EpochStats> h{{1, 0.5, 0.25}, {2, 0.125, std::nullopt}};
  EXPECT_EQ(history_to_csv(h), "epoch,train_loss,val_loss\n1,0.5,0.25\n2,0.125,\n");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(TrainResult{h}.final_loss(), 0.125);
}

}  // namespace
}  // namespace egtsyn::training
