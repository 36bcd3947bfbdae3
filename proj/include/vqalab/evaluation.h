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

#ifndef VQALAB_EVALUATION_H_
#define VQALAB_EVALUATION_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vqalab::eval {

// kStandard: b2 + (b1 - b2) / (1 + exp(-(x - b3) / |b4|)).
// kLiteral:  b2 + (b1 - b2) / (1 + exp(-x + b3 / |b4|)), kept for comparison
// with published numbers that used that form.
enum class LogisticForm { kStandard, kLiteral };

struct LogisticParams {
  double beta1 = 0, beta2 = 0, beta3 = 0, beta4 = 1;
  LogisticForm form = LogisticForm::kStandard;
};

double Logistic(const LogisticParams& p, double x);
std::vector<double> Logistic(const LogisticParams& p, std::span<const double> x);

// Least squares by Nelder-Mead. Throws kTooFewItems (< 5 points),
// kConstantInput, kFitDiverged.
LogisticParams FitLogistic(std::span<const double> pred, std::span<const double> mos,
                           LogisticForm form = LogisticForm::kStandard);

struct MetricReport {
  double srocc = 0, krcc = 0, plcc = 0, rmse = 0;
};

// Rank correlations on raw predictions; PLCC and RMSE after the logistic map.
MetricReport EvaluatePredictions(std::span<const double> pred, std::span<const double> mos,
                                 LogisticForm form = LogisticForm::kStandard);

struct SplitPlan {
  int n_splits = 1000;
  double train_fraction = 0.8;
  uint64_t seed = 0;
};

struct Split {
  std::vector<size_t> train;  // sorted
  std::vector<size_t> test;   // sorted
};

// Split i depends only on (seed, i). Throws kTooFewItems below 5 items.
std::vector<Split> MakeSplits(size_t n_items, const SplitPlan& plan);

// Per-dimension z-scoring with statistics from the fitting rows only;
// zero-spread columns keep unit scale.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer Fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd Apply(const Eigen::MatrixXd& x) const;
};

Eigen::MatrixXd SquaredDistances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
Eigen::MatrixXd RbfKernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma);

struct SvrSolution {
  Eigen::VectorXd alpha;       // multipliers of the upper tube constraints
  Eigen::VectorXd alpha_star;  // multipliers of the lower tube constraints
  double bias = 0;
  int iterations = 0;
  double kkt_gap = 0;  // maximal violating pair gap at exit
  bool converged = false;
};

// Epsilon-SVR dual, minimized by SMO with second-order working-set
// selection:
//   1/2 (a - a*)' K (a - a*) + eps sum(a + a*) - y'(a - a*)
//   s.t. sum(a - a*) = 0, 0 <= a, a* <= C.
// Prediction is sum_i (a_i - a*_i) k(x_i, x) + bias. A warm start is used
// when its multipliers are feasible for `c`.
SvrSolution SolveSvrDual(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double c,
                         double epsilon, double tol = 1e-3, int max_iter = 1000000,
                         const SvrSolution* warm_start = nullptr);

double SvrDualObjective(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double epsilon,
                        const Eigen::VectorXd& alpha, const Eigen::VectorXd& alpha_star);

// Solves (K + lambda I) c = y. Throws kSingularKernel when the system is
// singular (lambda = 0 with duplicate rows).
Eigen::VectorXd SolveKernelRidge(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                                 double lambda);

enum class RegressorKind { kSvrRbf, kKernelRidge };

struct Hyperparams {
  double c = 1, epsilon = 0.1, gamma = 1, lambda = 1e-3;
};

struct RegressorGrid {
  std::vector<double> c, gamma, epsilon, lambda;

  // C in 2^-3..2^10, gamma in 2^-10..2^3, epsilon in {0.1, 0.5, 1},
  // lambda in 10^-6..10^1.
  static RegressorGrid Default();
  std::vector<Hyperparams> Expand(RegressorKind kind) const;
};

struct KernelRegressor {
  RegressorKind kind = RegressorKind::kSvrRbf;
  Hyperparams params;
  Standardizer standardizer;
  Eigen::MatrixXd support;  // standardized training inputs
  Eigen::VectorXd coef;
  double bias = 0;

  Eigen::VectorXd Predict(const Eigen::MatrixXd& x) const;
};

// Fit with fixed hyperparameters. Ridge fits the centered targets and
// stores their mean as the bias.
KernelRegressor FitRegressor(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             RegressorKind kind, const Hyperparams& params);

struct TrainOptions {
  int cv_folds = 5;
  RegressorGrid grid = RegressorGrid::Default();
  uint64_t seed = 0;
};

// Grid search by mean k-fold CV RMSE, then refit on all rows.
KernelRegressor TrainRegressor(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               RegressorKind kind, const TrainOptions& options = {});

struct ModelInput {
  std::string name;
  Eigen::MatrixXd features;  // one row per video
  // Scores used as-is on each test set (single column), no training.
  bool training_free = false;
};

struct BenchmarkOptions {
  SplitPlan plan;
  RegressorKind kind = RegressorKind::kSvrRbf;
  TrainOptions train;
  LogisticForm form = LogisticForm::kStandard;
};

struct ModelResult {
  std::string name;
  MetricReport median;
  std::vector<MetricReport> per_split;
};

std::vector<ModelResult> RunBenchmark(const std::vector<ModelInput>& models,
                                      std::span<const double> mos,
                                      const BenchmarkOptions& options);

std::string BenchmarkReportJson(const std::vector<ModelResult>& results,
                                const BenchmarkOptions& options);

}  // namespace vqalab::eval

#endif  // VQALAB_EVALUATION_H_
