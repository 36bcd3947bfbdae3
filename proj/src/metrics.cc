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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vqalab/error.h"

namespace vqalab::eval {
namespace {

void CheckPair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch, "vectors differ in length");
  }
  if (x.size() < 3) {
    throw Error(ErrorCode::kTooFewItems, "correlation needs at least 3 points");
  }
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v[0]; });
  };
  if (constant(x) || constant(y)) {
    throw Error(ErrorCode::kConstantInput, "constant input");
  }
}

int Sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

std::vector<double> MidRanks(std::span<const double> x) {
  std::vector<size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

double Plcc(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double Srocc(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  const std::vector<double> rx = MidRanks(x), ry = MidRanks(y);
  return Plcc(rx, ry);
}

double Krcc(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  long long s = 0, nx = 0, ny = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    for (size_t j = i + 1; j < x.size(); ++j) {
      const int a = Sign(x[i] - x[j]), b = Sign(y[i] - y[j]);
      s += a * b;
      nx += a != 0;
      ny += b != 0;
    }
  }
  return static_cast<double>(s) /
         std::sqrt(static_cast<double>(nx) * static_cast<double>(ny));
}

double Rmse(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch, "vectors differ in length");
  }
  if (x.empty()) return 0.0;
  double s = 0;
  for (size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s / static_cast<double>(x.size()));
}

double Median(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorCode::kTooFewItems, "median of empty list");
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (v.size() % 2) return v[mid];
  const double hi = v[mid];
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

}  // namespace vqalab::eval
