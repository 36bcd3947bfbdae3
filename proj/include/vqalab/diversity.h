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

// Content-diversity statistics of a video (brightness, contrast, sharpness,
// spatial/temporal information, colourfulness) and 2-D convex hulls used to
// compare the feature-space coverage of datasets.

#ifndef VQALAB_DIVERSITY_H_
#define VQALAB_DIVERSITY_H_

#include <span>
#include <vector>

#include "vqalab/media_io.h"
#include "vqalab/plane.h"

namespace vqalab::diversity {

struct DiversityProfile {
  double brightness = 0;
  double contrast = 0;
  double sharpness = 0;
  double si = 0;
  double ti = 0;
  double ci = 0;
};

// Sample mean / standard deviation (n - 1 denominator). A single sample has
// standard deviation 0.
double Mean(std::span<const double> values);
double SampleStd(std::span<const double> values);

// Central-difference gradient magnitude on interior pixels; the result is
// (H - 2) x (W - 2). Throws kFrameTooSmall for H < 3 or W < 3.
RealPlane InteriorGradientMagnitude(const RealPlane& luma);

// All operations below take real-valued luma frames (one plane per frame) so
// that they also apply to rescaled or synthetic signals.
struct BrightnessContrast {
  double brightness;
  double contrast;
};
BrightnessContrast ComputeBrightnessContrast(std::span<const RealPlane> frames);
double Sharpness(std::span<const RealPlane> frames);
double SpatialInformation(std::span<const RealPlane> frames);
double TemporalInformation(std::span<const RealPlane> frames);
double Colorfulness(std::span<const media::RGBFrame> frames);

std::vector<RealPlane> LumaPlanes(const media::FrameSequence& seq);

// Spatial features on frames 0, stride, 2*stride, ...; TI uses consecutive
// frames of that subsampled sequence.
DiversityProfile ComputeProfile(
    const media::FrameSequence& seq, size_t stride = 10,
    media::YuvRange range = media::YuvRange::kLimited);

struct Point2 {
  double x = 0;
  double y = 0;
  bool operator==(const Point2&) const = default;
};

struct Hull2D {
  std::vector<Point2> vertices;  // counter-clockwise, no collinear runs
  double area = 0;
};

// Andrew's monotone chain. Fewer than three non-collinear points give a
// degenerate hull (the distinct extreme points) with zero area.
Hull2D ConvexHull(std::span<const Point2> points);

}  // namespace vqalab::diversity

#endif  // VQALAB_DIVERSITY_H_
