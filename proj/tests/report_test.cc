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


#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <random>

#include "vqalab/error.h"
#include "vqalab/report.h"

namespace vqalab::report {
namespace {

TEST(Histogram, ConstantInputOccupiesOneBin) {
  const std::vector<double> v(50, 42.3);
  const auto bins = Histogram(v);
  ASSERT_EQ(bins.size(), 1u);
  EXPECT_EQ(bins[0].lo, 42);
  EXPECT_EQ(bins[0].hi, 43);
  EXPECT_EQ(bins[0].count, 50u);
}

TEST(Histogram, NormalSampleMatchesCountingOracle) {
  std::mt19937_64 g(17);
  std::normal_distribution<double> d(45, 8);
  std::vector<double> v(5000);
  for (auto& x : v) x = d(g);
  const auto bins = Histogram(v, 1.0);
  size_t total = 0;
  for (size_t i = 0; i < bins.size(); ++i) {
    size_t expect = 0;
    for (double x : v) expect += (x >= bins[i].lo && x < bins[i].hi);
    EXPECT_EQ(bins[i].count, expect) << bins[i].lo;
    if (i > 0) EXPECT_EQ(bins[i].lo, bins[i - 1].hi);
    total += bins[i].count;
  }
  EXPECT_EQ(total, v.size());
  EXPECT_GT(bins.front().count, 0u);
  EXPECT_GT(bins.back().count, 0u);
}

TEST(Histogram, NegativeValuesAndEdges) {
  const std::vector<double> v = {-0.5, 0.0, 1.0, 2.999};
  const auto bins = Histogram(v);
  ASSERT_EQ(bins.size(), 4u);
  EXPECT_EQ(bins[0].lo, -1);
  EXPECT_EQ(bins[0].count, 1u);
  EXPECT_EQ(bins[1].count, 1u);
  EXPECT_EQ(bins[2].count, 1u);
  EXPECT_EQ(bins[3].count, 1u);
}

TEST(Histogram, RejectsEmptyAndNonFinite) {
  try {
    Histogram(std::vector<double>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaError);
  }
  try {
    Histogram(std::vector<double>{1, NAN});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaError);
  }
}

// Expected quartiles from numpy.percentile (linear interpolation).
TEST(Box, MatchesLinearInterpolationQuartiles) {
  const BoxStats a = ComputeBox("a", std::vector<double>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(a.q1, 1.75);
  EXPECT_DOUBLE_EQ(a.median, 2.5);
  EXPECT_DOUBLE_EQ(a.q3, 3.25);
  const BoxStats b = ComputeBox("b", std::vector<double>{3, 1, 4, 1, 5, 9, 2, 6});
  EXPECT_DOUBLE_EQ(b.min, 1);
  EXPECT_DOUBLE_EQ(b.q1, 1.75);
  EXPECT_DOUBLE_EQ(b.median, 3.5);
  EXPECT_DOUBLE_EQ(b.q3, 5.25);
  EXPECT_DOUBLE_EQ(b.max, 9);
  const BoxStats c = ComputeBox("c", std::vector<double>{10, 20, 30, 40, 50, 60, 70});
  EXPECT_DOUBLE_EQ(c.q1, 25);
  EXPECT_DOUBLE_EQ(c.q3, 55);
  const BoxStats d = ComputeBox("d", std::vector<double>{7});
  EXPECT_EQ(d.q1, 7);
  EXPECT_EQ(d.q3, 7);
}

TEST(Box, GroupsBySubjectInFirstAppearanceOrder) {
  const auto boxes = SubjectBoxes({"s2", "s1", "s2", "s1"}, std::vector<double>{10, 1, 20, 3});
  ASSERT_EQ(boxes.size(), 2u);
  EXPECT_EQ(boxes[0].label, "s2");
  EXPECT_EQ(boxes[0].median, 15);
  EXPECT_EQ(boxes[1].median, 2);
  EXPECT_EQ(BoxCsv(boxes), "subject_id,n,min,q1,median,q3,max\ns2,2,10,12.5,15,17.5,20\n"
                           "s1,2,1,1.5,2,2.5,3\n");
}

TEST(Svg, ScatterWithHull) {
  const std::vector<diversity::Point2> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  const auto hull = diversity::ConvexHull(pts);
  const std::string csv = HullCsv(hull);
  EXPECT_EQ(csv, "x,y\n0,0\n1,0\n1,1\n0,1\n");
  const std::string svg = ScatterHullSvg(pts, hull, "SI", "TI");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("<polygon"), std::string::npos);
  size_t circles = 0;
  for (size_t p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) {
    ++circles;
  }
  EXPECT_EQ(circles, 5u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Svg, HistogramBarsPerOccupiedBin) {
  const auto bins = Histogram(std::vector<double>{1.5, 1.6, 3.2});
  const std::string svg = HistogramSvg(bins, "MOS");
  size_t rects = 0;
  for (size_t p = svg.find("<rect"); p != std::string::npos; p = svg.find("<rect", p + 1)) ++rects;
  EXPECT_EQ(rects, 2u);
}

TEST(Pairs, ThreeDiversityPairs) {
  const auto pairs = DiversityPairs();
  ASSERT_EQ(pairs.size(), 3u);
  diversity::DiversityProfile p{1, 2, 3, 4, 5, 6};
  EXPECT_EQ(ProfileValue(p, pairs[0].x), 4);
  EXPECT_EQ(ProfileValue(p, pairs[0].y), 5);
  EXPECT_EQ(ProfileValue(p, pairs[1].x), 6);
  EXPECT_EQ(ProfileValue(p, pairs[1].y), 3);
  EXPECT_EQ(ProfileValue(p, pairs[2].x), 1);
  EXPECT_EQ(ProfileValue(p, pairs[2].y), 2);
}

}  // namespace
}  // namespace vqalab::report
