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


// Plot data and static SVG for MOS histograms, per-subject score boxes and
// paired-feature scatter plots with convex hulls.

#ifndef VQALAB_REPORT_H_
#define VQALAB_REPORT_H_

#include <span>
#include <string>
#include <vector>

#include "vqalab/diversity.h"

namespace vqalab::report {

struct HistogramBin {
  double lo = 0;
  double hi = 0;
  size_t count = 0;
};

// Bins [k w, (k+1) w) from the lowest to the highest occupied bin, empty
// interior bins included. Throws kSchemaError on empty or non-finite input.
std::vector<HistogramBin> Histogram(std::span<const double> values, double bin_width = 1.0);

struct BoxStats {
  std::string label;
  size_t n = 0;
  double min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double max = 0;
};

// Quartiles by linear interpolation between order statistics.
BoxStats ComputeBox(const std::string& label, std::span<const double> values);

// Raw scores grouped by subject in order of first appearance.
std::vector<BoxStats> SubjectBoxes(const std::vector<std::string>& subjects,
                                   std::span<const double> scores);

std::string HistogramCsv(const std::vector<HistogramBin>& bins);
std::string BoxCsv(const std::vector<BoxStats>& boxes);
std::string HullCsv(const diversity::Hull2D& hull);

std::string HistogramSvg(const std::vector<HistogramBin>& bins, const std::string& xlabel);
std::string ScatterHullSvg(std::span<const diversity::Point2> points,
                           const diversity::Hull2D& hull, const std::string& xlabel,
                           const std::string& ylabel);

struct FeaturePair {
  std::string x;
  std::string y;
};

// si x ti, ci x sharpness, brightness x contrast.
std::vector<FeaturePair> DiversityPairs();

double ProfileValue(const diversity::DiversityProfile& p, const std::string& name);

}  // namespace vqalab::report

#endif  // VQALAB_REPORT_H_
