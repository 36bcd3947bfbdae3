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

#ifndef VQALAB_METRICS_H_
#define VQALAB_METRICS_H_

#include <span>
#include <vector>

namespace vqalab::eval {

// Midranks (1-based); tied values share the mean of their positions.
std::vector<double> MidRanks(std::span<const double> x);

// All correlations throw kLengthMismatch on unequal lengths, kTooFewItems
// below three points and kConstantInput when either side has no spread.
double Plcc(std::span<const double> x, std::span<const double> y);
double Srocc(std::span<const double> x, std::span<const double> y);
// Kendall tau-b.
double Krcc(std::span<const double> x, std::span<const double> y);

double Rmse(std::span<const double> x, std::span<const double> y);

// Median of a non-empty list (mean of the middle pair for even sizes).
double Median(std::vector<double> v);

}  // namespace vqalab::eval

#endif  // VQALAB_METRICS_H_
