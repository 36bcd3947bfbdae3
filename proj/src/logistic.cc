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

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vqalab/error.h"
#include "vqalab/evaluation.h"
#include "vqalab/metrics.h"

namespace vqalab::eval {
namespace {

struct FitData {
  std::span<const double> pred;
  std::span<const double> mos;
  LogisticForm form;
};

LogisticParams FromVector(const gsl_vector* v, LogisticForm form) {
  return {gsl_vector_get(v, 0), gsl_vector_get(v, 1), gsl_vector_get(v, 2),
          gsl_vector_get(v, 3), form};
}

double SumSquares(const LogisticParams& p, const FitData& d) {
  double s = 0;
  for (size_t i = 0; i < d.pred.size(); ++i) {
    const double r = Logistic(p, d.pred[i]) - d.mos[i];
    s += r * r;
  }
  return std::isfinite(s) ? s : std::numeric_limits<double>::max();
}

double Objective(const gsl_vector* v, void* data) {
  const auto* d = static_cast<const FitData*>(data);
  if (gsl_vector_get(v, 3) == 0) return std::numeric_limits<double>::max();
  return SumSquares(FromVector(v, d->form), *d);
}

// One Nelder-Mead run from `start`; returns the best point found.
LogisticParams Simplex(const LogisticParams& start, const double step[4], FitData& data) {
  gsl_multimin_function fn{&Objective, 4, &data};
  gsl_vector* x = gsl_vector_alloc(4);
  gsl_vector* ss = gsl_vector_alloc(4);
  const double init[4] = {start.beta1, start.beta2, start.beta3, start.beta4};
  for (size_t i = 0; i < 4; ++i) {
    gsl_vector_set(x, i, init[i]);
    gsl_vector_set(ss, i, step[i]);
  }
  gsl_multimin_fminimizer* m =
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 4);
  gsl_multimin_fminimizer_set(m, &fn, x, ss);
  const double scale = std::max({std::abs(start.beta1), std::abs(start.beta2),
                                 std::abs(start.beta3), std::abs(start.beta4), 1.0});
  for (int iter = 0; iter < 5000; ++iter) {
    if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-9 * scale) == GSL_SUCCESS) {
      break;
    }
  }
  const LogisticParams out = FromVector(gsl_multimin_fminimizer_x(m), data.form);
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(ss);
  gsl_vector_free(x);
  return out;
}

}  // namespace

double Logistic(const LogisticParams& p, double x) {
  const double s = std::abs(p.beta4);
  const double arg = p.form == LogisticForm::kStandard ? -(x - p.beta3) / s : -x + p.beta3 / s;
  return p.beta2 + (p.beta1 - p.beta2) / (1.0 + std::exp(arg));
}

std::vector<double> Logistic(const LogisticParams& p, std::span<const double> x) {
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = Logistic(p, x[i]);
  return out;
}

LogisticParams FitLogistic(std::span<const double> pred, std::span<const double> mos,
                           LogisticForm form) {
  if (pred.size() != mos.size()) {
    throw Error(ErrorCode::kLengthMismatch, "prediction and MOS lengths differ");
  }
  if (pred.size() < 5) throw Error(ErrorCode::kTooFewItems, "logistic fit needs 5 points");
  const auto [lo, hi] = std::minmax_element(pred.begin(), pred.end());
  if (*lo == *hi) throw Error(ErrorCode::kConstantInput, "constant predictions");

  const double n = static_cast<double>(pred.size());
  const double mean = std::accumulate(pred.begin(), pred.end(), 0.0) / n;
  double ss = 0;
  for (double v : pred) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  const auto [mlo, mhi] = std::minmax_element(mos.begin(), mos.end());

  const LogisticParams init{*mhi, *mlo, mean, sd / 4.0, form};
  FitData data{pred, mos, form};
  const double initial = SumSquares(init, data);
  const double mos_range = std::max(*mhi - *mlo, 1e-3);
  const double step[4] = {0.1 * mos_range, 0.1 * mos_range, sd / 2.0, sd / 8.0};

  // Restarting from the incumbent lets the simplex recover from collapse.
  LogisticParams best = init;
  double best_ss = initial;
  for (int round = 0; round < 4; ++round) {
    const LogisticParams cand = Simplex(best, step, data);
    const double cand_ss = SumSquares(cand, data);
    if (!(cand_ss < best_ss)) break;
    const bool stalled = best_ss - cand_ss <= 1e-15 * std::max(1.0, best_ss);
    best = cand;
    best_ss = cand_ss;
    if (stalled) break;
  }
  if (!std::isfinite(best_ss) || best_ss > initial || best.beta4 == 0) {
    throw Error(ErrorCode::kFitDiverged, "logistic fit did not improve on its start");
  }
  return best;
}

MetricReport EvaluatePredictions(std::span<const double> pred, std::span<const double> mos,
                                 LogisticForm form) {
  MetricReport r;
  r.srocc = Srocc(pred, mos);
  r.krcc = Krcc(pred, mos);
  const LogisticParams p = FitLogistic(pred, mos, form);
  const std::vector<double> mapped = Logistic(p, pred);
  const auto [lo, hi] = std::minmax_element(mapped.begin(), mapped.end());
  r.plcc = *lo == *hi ? 0.0 : Plcc(mapped, mos);
  r.rmse = Rmse(mapped, mos);
  return r;
}

}  // namespace vqalab::eval
