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

// Pair-counting and rank-counting references for the rank correlations.

#ifndef VQALAB_TESTS_ORACLES_RANK_ORACLE_H_
#define VQALAB_TESTS_ORACLES_RANK_ORACLE_H_

#include <cmath>
#include <vector>

namespace vqalab::oracle {

inline std::vector<long double> CountRanks(const std::vector<double>& x) {
  std::vector<long double> r(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    long double below = 0, equal = 0;
    for (size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) below += 1;
      if (j != i && x[j] == x[i]) equal += 1;
    }
    r[i] = 1 + below + equal / 2;
  }
  return r;
}

inline double PearsonOracle(const std::vector<long double>& x,
                            const std::vector<long double>& y) {
  const size_t n = x.size();
  long double sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  sx /= n;
  sy /= n;
  long double num = 0, dx = 0, dy = 0;
  for (size_t i = 0; i < n; ++i) {
    num += (x[i] - sx) * (y[i] - sy);
    dx += (x[i] - sx) * (x[i] - sx);
    dy += (y[i] - sy) * (y[i] - sy);
  }
  return static_cast<double>(num / std::sqrt(dx * dy));
}

inline double SpearmanOracle(const std::vector<double>& x, const std::vector<double>& y) {
  return PearsonOracle(CountRanks(x), CountRanks(y));
}

// tau-b = (C - D) / sqrt((n0 - n1)(n0 - n2)), ties counted pair by pair.
inline double KendallOracle(const std::vector<double>& x, const std::vector<double>& y) {
  long long concordant = 0, discordant = 0, tie_x = 0, tie_y = 0, pairs = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    for (size_t j = i + 1; j < x.size(); ++j) {
      ++pairs;
      const bool tx = x[i] == x[j], ty = y[i] == y[j];
      if (tx) ++tie_x;
      if (ty) ++tie_y;
      if (tx || ty) continue;
      if ((x[i] < x[j]) == (y[i] < y[j])) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  return static_cast<double>(concordant - discordant) /
         std::sqrt(static_cast<double>(pairs - tie_x) * static_cast<double>(pairs - tie_y));
}

}  // namespace vqalab::oracle

#endif  // VQALAB_TESTS_ORACLES_RANK_ORACLE_H_
