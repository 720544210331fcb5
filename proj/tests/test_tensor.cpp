// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <set>

#include "egtsyn/errors.hpp"
#include "egtsyn/tensor.hpp"

namespace egtsyn {
namespace {

TEST(Tensor, ConstructsFilledAndRowMajor) {
  Tensor t(2, 3, 1.5);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t.size(), 6u);
  for (double v : t.values()) EXPECT_EQ(v, 1.5);

  Tensor m(2, 2, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(m(0, 1), 2.0);
  EXPECT_EQ(m(1, 0), 3.0);
  EXPECT_EQ(m[3], 4.0);
  EXPECT_EQ(m.shape_string(), "(2x2)");
}

TEST(Tensor, RejectsMismatchedData) {
  EXPECT_THROW(Tensor(2, 2, std::vector<double>{1, 2, 3}), DimensionError);
  EXPECT_THROW(Tensor::from_rows({{1, 2}, {3}}), DimensionError);
}

TEST(Tensor, FactoriesAndTranspose) {
  const Tensor r = Tensor::row({1, 2, 3});
  EXPECT_EQ(r.rows(), 1u);
  EXPECT_EQ(r.cols(), 3u);
  const Tensor i = Tensor::identity(3);
  EXPECT_EQ(i(1, 1), 1.0);
  EXPECT_EQ(i(1, 2), 0.0);
  const Tensor m = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
  const Tensor t = m.transposed();
  EXPECT_EQ(t.rows(), 3u);
  EXPECT_EQ(t(2, 1), 6.0);
  EXPECT_EQ(t.transposed(), m);
  const auto row = m.row_view(1);
  EXPECT_EQ(row[0], 4.0);
  EXPECT_EQ(row.size(), 3u);
}

TEST(Tensor, GradBufferFollowsRequiresGrad) {
  Tensor t(2, 2, 1.0);
  EXPECT_TRUE(t.grad().empty());
  t.set_requires_grad(true);
  ASSERT_EQ(t.grad().size(), 4u);
  t.grad()[2] = 5.0;
  t.zero_grad();
  EXPECT_EQ(t.grad()[2], 0.0);
}

TEST(Tensor, FiniteCheck) {
  Tensor t(1, 2, 0.0);
  EXPECT_TRUE(t.all_finite());
  t[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(t.all_finite());
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs = differs || x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(1);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(Rng, BelowCoversRangeWithoutBias) {
  Rng rng(9);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
  EXPECT_THROW(rng.below(0), ParameterError);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(5);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  rng.shuffle(v);
  EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 10u);
  Rng again(5);
  std::vector<int> w{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  again.shuffle(w);
  EXPECT_EQ(v, w);
}

}  // namespace
}  // namespace egtsyn
