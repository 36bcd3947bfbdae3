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

#include "vqalab/evaluation.h"

#include <cmath>
#include <random>
#include <set>

#include "gtest/gtest.h"
#include "vqalab/error.h"
#include "vqalab/metrics.h"

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

std::vector<double> LinSpace(double lo, double hi, size_t n) {
  std::vector<double> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return v;
}

TEST(FitLogistic, RecoversPlantedCurve) {
  const std::vector<double> pred = LinSpace(-6, 6, 40);
  for (LogisticForm form : {LogisticForm::kStandard, LogisticForm::kLiteral}) {
    const LogisticParams truth{90, 10, 0, 1, form};
    const std::vector<double> mos = Logistic(truth, pred);
    const LogisticParams fit = FitLogistic(pred, mos, form);
    EXPECT_LT(Rmse(Logistic(fit, pred), mos), 1e-3);
  }
}

TEST(FitLogistic, IdentityIsNearlyLinear) {
  const std::vector<double> mos = LinSpace(20, 80, 30);
  const LogisticParams fit = FitLogistic(mos, mos);
  // The best linear fit is exact here; the logistic can only approach it.
  EXPECT_LT(Rmse(Logistic(fit, mos), mos), 0.005 * 60);
}

TEST(FitLogistic, Errors) {
  const std::vector<double> flat(8, 3.0), mos = LinSpace(0, 1, 8);
  EXPECT_EQ(CodeOf([&] { FitLogistic(flat, mos); }), ErrorCode::kConstantInput);
  const std::vector<double> four{1, 2, 3, 4};
  EXPECT_EQ(CodeOf([&] { FitLogistic(four, four); }), ErrorCode::kTooFewItems);
}

TEST(EvaluatePredictions, IdentityAndReflection) {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(20, 80);
  std::vector<double> mos(60);
  for (auto& v : mos) v = u(g);
  const MetricReport same = EvaluatePredictions(mos, mos);
  EXPECT_DOUBLE_EQ(same.srocc, 1.0);
  EXPECT_DOUBLE_EQ(same.krcc, 1.0);
  EXPECT_GT(same.plcc, 0.999);
  EXPECT_LT(same.rmse, 1.0);
  std::vector<double> neg = mos;
  for (auto& v : neg) v = -v;
  const MetricReport flipped = EvaluatePredictions(neg, mos);
  EXPECT_DOUBLE_EQ(flipped.srocc, -1.0);
  EXPECT_DOUBLE_EQ(flipped.krcc, -1.0);
  EXPECT_GE(std::abs(flipped.plcc), 0.99);
}

TEST(EvaluatePredictions, RandomPredictionsAreUncorrelated) {
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(0, 100);
  int within = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::vector<double> a(600), b(600);
    for (auto& v : a) v = u(g);
    for (auto& v : b) v = u(g);
    within += std::abs(Srocc(a, b)) < 0.15;
  }
  EXPECT_GE(within, 99);
}

TEST(EvaluatePredictions, PlccAbsorbsAffineMaps) {
  std::mt19937_64 g(3);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> pred(50), mos(50);
  for (size_t i = 0; i < 50; ++i) {
    pred[i] = n(g);
    mos[i] = 50 + 30 * std::tanh(pred[i]) + 4 * n(g);
  }
  std::vector<double> affine = pred;
  for (auto& v : affine) v = 3.0 * v + 7.0;
  EXPECT_NEAR(EvaluatePredictions(pred, mos).plcc, EvaluatePredictions(affine, mos).plcc, 1e-6);
}

TEST(MakeSplits, SizesDisjointnessAndDeterminism) {
  const auto splits = MakeSplits(10, {.n_splits = 20, .train_fraction = 0.8, .seed = 4});
  for (const Split& s : splits) {
    EXPECT_EQ(s.train.size(), 8u);
    EXPECT_EQ(s.test.size(), 2u);
    std::set<size_t> all(s.train.begin(), s.train.end());
    for (size_t t : s.test) EXPECT_TRUE(all.insert(t).second);
    EXPECT_EQ(all.size(), 10u);
  }
  const auto again = MakeSplits(10, {.n_splits = 20, .train_fraction = 0.8, .seed = 4});
  for (size_t i = 0; i < splits.size(); ++i) {
    EXPECT_EQ(splits[i].train, again[i].train);
    EXPECT_EQ(splits[i].test, again[i].test);
  }
  EXPECT_EQ(CodeOf([] { MakeSplits(4, {}); }), ErrorCode::kTooFewItems);
}

TEST(MakeSplits, DefaultPlanCoversEveryItem) {
  std::vector<int> seen(600, 0);
  for (const Split& s : MakeSplits(600, SplitPlan{}))
    for (size_t t : s.test) ++seen[t];
  EXPECT_EQ(std::count(seen.begin(), seen.end(), 0), 0);
}

TEST(KernelRidge, MatchesDenseSolve) {
  Eigen::MatrixXd x(5, 2);
  x << 0.1, 0.3, -1.2, 0.8, 0.5, -0.4, 2.0, 1.1, -0.7, -0.9;
  Eigen::VectorXd y(5);
  y << 1.0, -2.0, 0.5, 3.0, 0.25;
  for (double lambda : {1e-3, 0.1, 2.0}) {
    const Eigen::MatrixXd k = RbfKernel(x, x, 0.7);
    const Eigen::MatrixXd a = k + lambda * Eigen::MatrixXd::Identity(5, 5);
    const Eigen::VectorXd direct = a.partialPivLu().solve(y);
    EXPECT_LT((SolveKernelRidge(k, y, lambda) - direct).cwiseAbs().maxCoeff(), 1e-8);
  }
  Eigen::MatrixXd dup = x;
  dup.row(3) = dup.row(1);
  EXPECT_EQ(CodeOf([&] { SolveKernelRidge(RbfKernel(dup, dup, 0.7), y, 0.0); }),
            ErrorCode::kSingularKernel);
}

// Worst violation of the epsilon-SVR optimality conditions given the
// returned multipliers and bias.
double KktViolation(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double c, double eps,
                    const SvrSolution& s) {
  const Eigen::VectorXd f = (k * (s.alpha - s.alpha_star)).array() + s.bias;
  double worst = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double r = y(i) - f(i);
    if (s.alpha(i) > 0) worst = std::max(worst, eps - r);
    if (s.alpha(i) < c) worst = std::max(worst, r - eps);
    if (s.alpha_star(i) > 0) worst = std::max(worst, eps + r);
    if (s.alpha_star(i) < c) worst = std::max(worst, -r - eps);
  }
  return worst;
}

// Exhaustive search over alpha, alpha* in {0, C/2, C}^6 with sum(a - a*) = 0.
double GridOptimum(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double c, double eps) {
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd a(6), as(6);
  for (int code = 0; code < 531441; ++code) {
    int rest = code, units = 0;
    for (int i = 0; i < 6; ++i) {
      const int u = rest % 3, v = (rest / 3) % 3;
      rest /= 9;
      a(i) = u * c / 2;
      as(i) = v * c / 2;
      units += u - v;
    }
    if (units != 0) continue;
    best = std::min(best, SvrDualObjective(k, y, eps, a, as));
  }
  return best;
}

TEST(Svr, SmoMatchesBruteForceDual) {
  Eigen::MatrixXd x(6, 1);
  x << -1.0, -0.6, -0.1, 0.3, 0.7, 1.2;
  Eigen::VectorXd y(6);
  // Large alternating targets saturate every multiplier, so the optimum
  // lies on the grid.
  y << 8, -8, 8, -8, 8, -8;
  const Eigen::MatrixXd k = RbfKernel(x, x, 2.0);
  const double c = 0.5, eps = 0.1;
  const SvrSolution s = SolveSvrDual(k, y, c, eps);
  const double smo = SvrDualObjective(k, y, eps, s.alpha, s.alpha_star);
  EXPECT_NEAR(smo, GridOptimum(k, y, c, eps), 1e-3);
  EXPECT_LT(KktViolation(k, y, c, eps, s), 1e-3);

  Eigen::VectorXd y2(6);
  y2 << 0.3, -0.2, 1.1, 0.4, -0.9, 0.8;
  const SvrSolution s2 = SolveSvrDual(k, y2, 1.0, 0.1);
  EXPECT_LE(SvrDualObjective(k, y2, 0.1, s2.alpha, s2.alpha_star), GridOptimum(k, y2, 1.0, 0.1) + 1e-3);
  EXPECT_LT(KktViolation(k, y2, 1.0, 0.1, s2), 1e-3);
}

TEST(Svr, DualFeasibilityAndKktOnRandomProblems) {
  std::mt19937_64 g(6);
  std::normal_distribution<double> n(0, 1);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd x(30, 3);
    Eigen::VectorXd y(30);
    for (Eigen::Index i = 0; i < 30; ++i) {
      for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = n(g);
      y(i) = 10 * std::sin(x(i, 0)) + x(i, 1) + n(g);
    }
    const double c = std::ldexp(1.0, rep % 8), eps = 0.1 * (1 + rep % 3);
    const Eigen::MatrixXd k = RbfKernel(x, x, 0.5);
    const SvrSolution s = SolveSvrDual(k, y, c, eps);
    EXPECT_TRUE(s.converged);
    EXPECT_NEAR((s.alpha - s.alpha_star).sum(), 0.0, 1e-6);
    EXPECT_GE(std::min(s.alpha.minCoeff(), s.alpha_star.minCoeff()), 0.0);
    EXPECT_LE(std::max(s.alpha.maxCoeff(), s.alpha_star.maxCoeff()), c);
    EXPECT_LT(KktViolation(k, y, c, eps, s), 1e-3);
  }
}

TEST(Svr, TargetShiftMovesPredictions) {
  std::mt19937_64 g(7);
  std::normal_distribution<double> n(0, 1);
  Eigen::MatrixXd x(40, 2), xq(10, 2);
  Eigen::VectorXd y(40);
  for (Eigen::Index i = 0; i < 40; ++i) {
    x(i, 0) = n(g);
    x(i, 1) = n(g);
    y(i) = 3 * x(i, 0) - x(i, 1) * x(i, 1) + 0.3 * n(g);
  }
  for (Eigen::Index i = 0; i < 10; ++i) xq.row(i) << n(g), n(g);
  const Hyperparams hp{.c = 4, .epsilon = 0.1, .gamma = 0.5};
  const KernelRegressor a = FitRegressor(x, y, RegressorKind::kSvrRbf, hp);
  const KernelRegressor b = FitRegressor(x, (y.array() + 25.0).matrix(), RegressorKind::kSvrRbf, hp);
  EXPECT_LT(((b.Predict(xq).array() - 25.0) - a.Predict(xq).array()).abs().maxCoeff(), 1e-6);
}

TEST(TrainRegressor, NoiselessRbfTargetsAreInterpolated) {
  std::mt19937_64 g(8);
  std::normal_distribution<double> n(0, 1);
  Eigen::MatrixXd x(40, 2);
  for (Eigen::Index i = 0; i < 40; ++i) x.row(i) << n(g), n(g);
  // Targets are an RBF expansion in standardized coordinates.
  const Standardizer st = Standardizer::Fit(x);
  const Eigen::MatrixXd xs = st.Apply(x);
  Eigen::VectorXd w(5);
  w << 3, -2, 1.5, 4, -1;
  const Eigen::VectorXd y = RbfKernel(xs, xs.topRows(5), 0.5) * w;
  TrainOptions ridge;
  ridge.grid.gamma = {0.25, 0.5, 1.0};
  const KernelRegressor kr = TrainRegressor(x, y, RegressorKind::kKernelRidge, ridge);
  EXPECT_LT(std::sqrt((kr.Predict(x) - y).squaredNorm() / 40), 1e-2);
  TrainOptions svr;
  svr.grid = {.c = {64, 1024}, .gamma = {0.25, 0.5, 1.0}, .epsilon = {0.001}, .lambda = {}};
  const KernelRegressor sv = TrainRegressor(x, y, RegressorKind::kSvrRbf, svr);
  const Eigen::VectorXd p = sv.Predict(x);
  EXPECT_LT(std::sqrt((p - y).squaredNorm() / 40), 1e-2);
}

TEST(TrainRegressor, PlantedMonotoneQualityGeneralizes) {
  std::mt19937_64 g(9);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> u(20, 80);
  const int total = 150;
  Eigen::MatrixXd x(total, 4);
  Eigen::VectorXd y(total);
  for (int i = 0; i < total; ++i) {
    y(i) = u(g);
    x.row(i) << std::log(y(i)) + 0.05 * n(g), y(i) * y(i) / 1000 + 0.3 * n(g), n(g), n(g);
  }
  TrainOptions opts;
  opts.grid = {.c = {1, 16, 256}, .gamma = {1.0 / 16, 0.25, 1}, .epsilon = {0.1, 1}, .lambda = {}};
  const KernelRegressor r = TrainRegressor(x.topRows(120), y.head(120), RegressorKind::kSvrRbf, opts);
  const Eigen::VectorXd p = r.Predict(x.bottomRows(30));
  const Eigen::VectorXd t = y.tail(30);
  EXPECT_GE(Srocc(std::vector<double>(p.data(), p.data() + 30),
                  std::vector<double>(t.data(), t.data() + 30)),
            0.8);
}

TEST(TrainRegressor, TooFewSamples) {
  EXPECT_EQ(CodeOf([] {
              TrainRegressor(Eigen::MatrixXd::Ones(9, 2), Eigen::VectorXd::Ones(9),
                             RegressorKind::kKernelRidge);
            }),
            ErrorCode::kTooFewItems);
}

BenchmarkOptions SmallBenchmark() {
  BenchmarkOptions o;
  o.plan = {.n_splits = 40, .train_fraction = 0.8, .seed = 11};
  o.train.grid = {.c = {1, 8}, .gamma = {0.25, 1}, .epsilon = {0.5}, .lambda = {}};
  return o;
}

TEST(RunBenchmark, OracleNoiseAndTrainingFree) {
  std::mt19937_64 g(12);
  std::uniform_real_distribution<double> u(20, 80);
  std::normal_distribution<double> n(0, 1);
  const int total = 80;
  std::vector<double> mos(total);
  ModelInput oracle{"oracle", Eigen::MatrixXd(total, 1), false};
  ModelInput noise{"noise", Eigen::MatrixXd(total, 3), false};
  ModelInput free{"free", Eigen::MatrixXd(total, 1), true};
  for (int i = 0; i < total; ++i) {
    mos[i] = u(g);
    oracle.features(i, 0) = mos[i];
    noise.features.row(i) << n(g), n(g), n(g);
    free.features(i, 0) = -mos[i];
  }
  const auto results = RunBenchmark({oracle, noise, free}, mos, SmallBenchmark());
  ASSERT_EQ(results.size(), 3u);
  EXPECT_EQ(results[0].median.srocc, 1.0);
  EXPECT_LT(std::abs(results[1].median.srocc), 0.15);
  EXPECT_EQ(results[2].median.srocc, -1.0);
  EXPECT_EQ(results[0].per_split.size(), 40u);
  const auto again = RunBenchmark({oracle, noise, free}, mos, SmallBenchmark());
  EXPECT_EQ(BenchmarkReportJson(results, SmallBenchmark()),
            BenchmarkReportJson(again, SmallBenchmark()));
}

}  // namespace
}  // namespace vqalab::eval
