// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "egtsyn/errors.hpp"
#include "egtsyn/gradcheck.hpp"

namespace egtsyn {
namespace {

TEST(GradCheck, LinearModelIsExact) {
  Tensor w = Tensor::row({0.3, -1.2, 2.0});
  const Tensor x = Tensor::from_rows({{1.5}, {-0.5}, {4.0}});
  const LossClosure loss = [&](Tape& t) { return matmul(t.parameter(w), t.constant(x)); };
  GradCheckOptions opt;
  opt.tolerance = 1e-8;
  const GradCheckReport report = grad_check(loss, {{"w", &w}}, opt);
  ASSERT_TRUE(report.passed);
  ASSERT_EQ(report.parameters.size(), 1u);
  EXPECT_EQ(report.parameters[0].checked, 3u);
  EXPECT_LT(report.parameters[0].max_rel_error, 1e-8);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(w.grad()[i], x[i]);
}

TEST(GradCheck, ReportsTheFaultyParameter) {
  Tensor a = Tensor::from_rows({{0.4, -0.3}, {0.2, 0.9}});
  Tensor b = Tensor::from_rows({{1.1}, {-0.7}});
  const LossClosure loss = [&](Tape& t) {
    return sum(relu(matmul(t.parameter(a), t.parameter(b))));
  };
  ASSERT_TRUE(grad_check(loss, {{"a", &a}, {"b", &b}}).passed);
  testing::set_fault(testing::Fault::kMatmulBackward);
  const GradCheckReport report = grad_check(loss, {{"a", &a}, {"b", &b}});
  testing::set_fault(testing::Fault::kNone);
  EXPECT_FALSE(report.passed);
  ASSERT_NE(report.worst(), nullptr);
  EXPECT_EQ(report.worst()->name, "b");
}

TEST(GradCheck, RejectsNondeterministicClosure) {
  Tensor w = Tensor::row({1.0});
  int calls = 0;
  const LossClosure loss = [&](Tape& t) { return scale(t.parameter(w), 1.0 + ++calls); };
  EXPECT_THROW(grad_check(loss, {{"w", &w}}), ContractError);
}

TEST(GradCheck, SamplingLimitsCheckedElements) {
  Tensor w(10, 10, 0.1);
  const LossClosure loss = [&](Tape& t) {
    Var p = t.parameter(w);
    return sum(mul(p, p));
  };
  GradCheckOptions opt;
  opt.max_elements_per_tensor = 7;
  const GradCheckReport report = grad_check(loss, {{"w", &w}}, opt);
  EXPECT_TRUE(report.passed);
  EXPECT_EQ(report.parameters[0].checked, 7u);
}

TEST(GradCheck, RelativeErrorFloor) {
  EXPECT_DOUBLE_EQ(relative_error(1.0, 0.5, 1e-6), 0.5);
  EXPECT_DOUBLE_EQ(relative_error(1e-9, 0.0, 1e-6), 1e-3);
  EXPECT_EQ(relative_error(0.0, 0.0, 1e-6), 0.0);
}

}  // namespace
}  // namespace egtsyn
