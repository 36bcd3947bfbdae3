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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "vqalab/error.h"
#include "vqalab/evaluation.h"
#include "vqalab/metrics.h"
#include "vqalab/random.h"

namespace vqalab::eval {
namespace {

// Metrics for one test set; constant predictions carry no ranking signal and
// score zero correlation with the best constant as the RMSE reference.
MetricReport TestSetMetrics(const std::vector<double>& pred, const std::vector<double>& mos,
                            LogisticForm form) {
  const auto [lo, hi] = std::minmax_element(pred.begin(), pred.end());
  if (*lo == *hi) {
    const double mean = std::accumulate(mos.begin(), mos.end(), 0.0) / static_cast<double>(mos.size());
    return {0.0, 0.0, 0.0, Rmse(std::vector<double>(mos.size(), mean), mos)};
  }
  return EvaluatePredictions(pred, mos, form);
}

MetricReport MedianReport(const std::vector<MetricReport>& runs) {
  std::vector<double> s, k, p, r;
  for (const MetricReport& m : runs) {
    s.push_back(m.srocc);
    k.push_back(m.krcc);
    p.push_back(m.plcc);
    r.push_back(m.rmse);
  }
  return {Median(s), Median(k), Median(p), Median(r)};
}

}  // namespace

std::vector<Split> MakeSplits(size_t n_items, const SplitPlan& plan) {
  if (n_items < 5) throw Error(ErrorCode::kTooFewItems, "splits need at least 5 items");
  const size_t n_train = static_cast<size_t>(std::lround(plan.train_fraction * static_cast<double>(n_items)));
  std::vector<Split> out;
  out.reserve(static_cast<size_t>(std::max(plan.n_splits, 0)));
  for (int s = 0; s < plan.n_splits; ++s) {
    std::vector<size_t> order(n_items);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 g = rng::DerivedEngine(plan.seed, static_cast<uint64_t>(s));
    rng::Shuffle(order, g);
    Split split;
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    out.push_back(std::move(split));
  }
  return out;
}

std::vector<ModelResult> RunBenchmark(const std::vector<ModelInput>& models,
                                      std::span<const double> mos,
                                      const BenchmarkOptions& options) {
  const size_t n = mos.size();
  for (const ModelInput& m : models) {
    if (static_cast<size_t>(m.features.rows()) != n) {
      throw Error(ErrorCode::kShapeMismatch, m.name + " is not aligned with the MOS list");
    }
    if (m.training_free && m.features.cols() != 1) {
      throw Error(ErrorCode::kShapeMismatch, m.name + " must be a single score column");
    }
  }
  const std::vector<Split> splits = MakeSplits(n, options.plan);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = mos[i];

  std::vector<ModelResult> results;
  for (const ModelInput& m : models) {
    ModelResult r;
    r.name = m.name;
    for (size_t s = 0; s < splits.size(); ++s) {
      const Split& sp = splits[s];
      std::vector<double> pred, truth;
      for (size_t i : sp.test) truth.push_back(mos[i]);
      if (m.training_free) {
        for (size_t i : sp.test) pred.push_back(m.features(static_cast<Eigen::Index>(i), 0));
      } else {
        Eigen::MatrixXd xtr(static_cast<Eigen::Index>(sp.train.size()), m.features.cols());
        Eigen::VectorXd ytr(static_cast<Eigen::Index>(sp.train.size()));
        for (size_t i = 0; i < sp.train.size(); ++i) {
          xtr.row(static_cast<Eigen::Index>(i)) = m.features.row(static_cast<Eigen::Index>(sp.train[i]));
          ytr(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(sp.train[i]));
        }
        Eigen::MatrixXd xte(static_cast<Eigen::Index>(sp.test.size()), m.features.cols());
        for (size_t i = 0; i < sp.test.size(); ++i) {
          xte.row(static_cast<Eigen::Index>(i)) = m.features.row(static_cast<Eigen::Index>(sp.test[i]));
        }
        TrainOptions train = options.train;
        train.seed = rng::DeriveSeed(options.plan.seed, s);
        const Eigen::VectorXd p = TrainRegressor(xtr, ytr, options.kind, train).Predict(xte);
        pred.assign(p.data(), p.data() + p.size());
      }
      r.per_split.push_back(TestSetMetrics(pred, truth, options.form));
    }
    r.median = MedianReport(r.per_split);
    results.push_back(std::move(r));
  }
  return results;
}

std::string BenchmarkReportJson(const std::vector<ModelResult>& results,
                                const BenchmarkOptions& options) {
  nlohmann::ordered_json j;
  j["splits"] = options.plan.n_splits;
  j["train_fraction"] = options.plan.train_fraction;
  j["seed"] = options.plan.seed;
  j["regressor"] = options.kind == RegressorKind::kSvrRbf ? "svr-rbf" : "kernel-ridge";
  j["logistic"] = options.form == LogisticForm::kStandard ? "standard" : "literal";
  auto& models = j["models"];
  models = nlohmann::ordered_json::array();
  for (const ModelResult& r : results) {
    nlohmann::ordered_json m;
    m["name"] = r.name;
    m["median"] = {{"srocc", r.median.srocc}, {"krcc", r.median.krcc},
                   {"plcc", r.median.plcc}, {"rmse", r.median.rmse}};
    auto& per = m["per_split"];
    for (const char* key : {"srocc", "krcc", "plcc", "rmse"}) per[key] = nlohmann::ordered_json::array();
    for (const MetricReport& s : r.per_split) {
      per["srocc"].push_back(s.srocc);
      per["krcc"].push_back(s.krcc);
      per["plcc"].push_back(s.plcc);
      per["rmse"].push_back(s.rmse);
    }
    models.push_back(std::move(m));
  }
  return j.dump(2) + "\n";
}

}  // namespace vqalab::eval
