// Copyright 2026 The vqalab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vqalab/metrics.h"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "oracles/rank_oracle.h"
#include "vqalab/error.h"

namespace vqalab::eval {
namespace {

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kUsageError;
}

TEST(Srocc, IdentityAndReversal) {
  const std::vector<double> x{0.3, 1.7, -2.0, 5.5, 4.0};
  EXPECT_DOUBLE_EQ(Srocc(x, x), 1.0);
  std::vector<double> rev = x;
  for (auto& v : rev) v = -v;
  EXPECT_DOUBLE_EQ(Srocc(x, rev), -1.0);
}

TEST(Srocc, HandRankedTies) {
  // Midranks: x -> (1, 2.5, 2.5, 4), y -> (1, 3, 2, 4).
  const std::vector<double> x{1, 2, 2, 4}, y{1, 3, 2, 4};
  EXPECT_EQ(MidRanks(x), (std::vector<double>{1, 2.5, 2.5, 4}));
  // Centered: (-1.5, 0, 0, 1.5) and (-1.5, 0.5, -0.5, 1.5).
  const double expected = 4.5 / std::sqrt(4.5 * 5.0);
  EXPECT_NEAR(Srocc(x, y), expected, 1e-15);
  EXPECT_NEAR(Srocc(x, y), oracle::SpearmanOracle(x, y), 1e-15);
}

TEST(Krcc, ConcordantDiscordantAndTies) {
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  std::vector<double> y{10, 20, 30, 40, 50, 60};
  EXPECT_DOUBLE_EQ(Krcc(x, y), 1.0);
  std::reverse(y.begin(), y.end());
  EXPECT_DOUBLE_EQ(Krcc(x, y), -1.0);
  // One tie on each side; 15 pairs enumerated by the oracle.
  const std::vector<double> a{1, 2, 2, 4, 5, 6}, b{3, 1, 4, 4, 6, 5};
  EXPECT_NEAR(Krcc(a, b), oracle::KendallOracle(a, b), 1e-15);
  // C = 11, D = 2, one tie each side: 9 / 14.
  EXPECT_NEAR(Krcc(a, b), 9.0 / 14.0, 1e-15);
}

TEST(RankCorrelations, ExhaustivePairOraclesOnRandomTiedInputs) {
  std::mt19937_64 g(2024);
  int checked = 0;
  while (checked < 10000) {
    const size_t n = 3 + g() % 6;
    std::vector<double> x(n), y(n);
    for (size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(g() % 5);
      y[i] = static_cast<double>(g() % 5);
    }
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
        std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
      EXPECT_EQ(CodeOf([&] { Srocc(x, y); }), ErrorCode::kConstantInput);
      continue;
    }
    ASSERT_NEAR(Srocc(x, y), oracle::SpearmanOracle(x, y), 1e-12);
    ASSERT_NEAR(Krcc(x, y), oracle::KendallOracle(x, y), 1e-12);
    ++checked;
  }
}

TEST(RankCorrelations, MonotoneTransformInvariance) {
  std::mt19937_64 g(5);
  std::normal_distribution<double> n(0, 1);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> x(20), y(20), ex(20);
    for (size_t i = 0; i < 20; ++i) {
      x[i] = n(g);
      y[i] = x[i] + n(g);
      ex[i] = std::exp(x[i]);
    }
    EXPECT_NEAR(Srocc(ex, y), Srocc(x, y), 1e-12);
    EXPECT_NEAR(Krcc(ex, y), Krcc(x, y), 1e-12);
  }
}

TEST(Correlations, Errors) {
  const std::vector<double> a{1, 2, 3}, b{1, 2}, c{4, 4, 4};
  EXPECT_EQ(CodeOf([&] { Srocc(a, b); }), ErrorCode::kLengthMismatch);
  EXPECT_EQ(CodeOf([&] { Krcc(a, c); }), ErrorCode::kConstantInput);
  EXPECT_EQ(CodeOf([&] { Plcc(b, b); }), ErrorCode::kTooFewItems);
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(Median({3, 1, 2}), 2);
  EXPECT_EQ(Median({4, 1, 3, 2}), 2.5);
  EXPECT_EQ(CodeOf([] { Median({}); }), ErrorCode::kTooFewItems);
}

}  // namespace
}  // namespace vqalab::eval
