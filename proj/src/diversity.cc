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

#include "vqalab/diversity.h"

#include <algorithm>
#include <cmath>

#include "vqalab/error.h"

namespace vqalab::diversity {
namespace {

void RequireFrames(std::span<const RealPlane> frames) {
  if (frames.empty()) throw Error(ErrorCode::kEmptySequence, "no frames");
}

double Cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

double Mean(std::span<const double> values) {
  double sum = 0;
  for (double v : values) sum += v;
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

double SampleStd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double mu = Mean(values);
  double ss = 0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

RealPlane InteriorGradientMagnitude(const RealPlane& luma) {
  const size_t rows = luma.rows(), cols = luma.cols();
  if (rows < 3 || cols < 3) {
    throw Error(ErrorCode::kFrameTooSmall, "gradient needs at least 3x3");
  }
  RealPlane out(rows - 2, cols - 2);
  for (size_t r = 1; r + 1 < rows; ++r) {
    for (size_t c = 1; c + 1 < cols; ++c) {
      const double dh = 0.5 * (luma(r + 1, c) - luma(r - 1, c));
      const double dw = 0.5 * (luma(r, c + 1) - luma(r, c - 1));
      out(r - 1, c - 1) = std::sqrt(dh * dh + dw * dw);
    }
  }
  return out;
}

BrightnessContrast ComputeBrightnessContrast(
    std::span<const RealPlane> frames) {
  RequireFrames(frames);
  double total = 0;
  size_t count = 0;
  double contrast = 0;
  for (const RealPlane& f : frames) {
    for (double v : f.data()) total += v;
    count += f.size();
    contrast += SampleStd(f.data());
  }
  return {total / static_cast<double>(count),
          contrast / static_cast<double>(frames.size())};
}

double Sharpness(std::span<const RealPlane> frames) {
  RequireFrames(frames);
  double sum = 0;
  size_t count = 0;
  for (const RealPlane& f : frames) {
    const RealPlane g = InteriorGradientMagnitude(f);
    for (double v : g.data()) sum += v;
    count += g.size();
  }
  return sum / static_cast<double>(count);
}

double SpatialInformation(std::span<const RealPlane> frames) {
  RequireFrames(frames);
  double sum = 0;
  for (const RealPlane& f : frames) {
    sum += SampleStd(InteriorGradientMagnitude(f).data());
  }
  return sum / static_cast<double>(frames.size());
}

double TemporalInformation(std::span<const RealPlane> frames) {
  RequireFrames(frames);
  if (frames.size() < 2) {
    throw Error(ErrorCode::kSingleFrame, "TI needs two frames");
  }
  double sum = 0;
  std::vector<double> diff;
  for (size_t f = 1; f < frames.size(); ++f) {
    const auto& cur = frames[f].data();
    const auto& prev = frames[f - 1].data();
    if (cur.size() != prev.size()) {
      throw Error(ErrorCode::kShapeMismatch, "frame sizes differ");
    }
    diff.resize(cur.size());
    for (size_t i = 0; i < cur.size(); ++i) diff[i] = cur[i] - prev[i];
    sum += SampleStd(diff);
  }
  return sum / static_cast<double>(frames.size() - 1);
}

double Colorfulness(std::span<const media::RGBFrame> frames) {
  if (frames.empty()) throw Error(ErrorCode::kEmptySequence, "no frames");
  double sum = 0;
  std::vector<double> rg, yb;
  for (const media::RGBFrame& f : frames) {
    const size_t n = f.r.size();
    rg.resize(n);
    yb.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const double r = f.r.data()[i], g = f.g.data()[i], b = f.b.data()[i];
      rg[i] = r - g;
      yb[i] = 0.5 * (r + g) - b;
    }
    const double s_rg = SampleStd(rg), s_yb = SampleStd(yb);
    const double m_rg = Mean(rg), m_yb = Mean(yb);
    sum += std::sqrt(s_rg * s_rg + s_yb * s_yb) +
           0.3 * std::sqrt(m_rg * m_rg + m_yb * m_yb);
  }
  return sum / static_cast<double>(frames.size());
}

std::vector<RealPlane> LumaPlanes(const media::FrameSequence& seq) {
  std::vector<RealPlane> out;
  out.reserve(seq.frames.size());
  for (const auto& f : seq.frames) out.push_back(ToReal(f.luma));
  return out;
}

DiversityProfile ComputeProfile(const media::FrameSequence& seq, size_t stride,
                                media::YuvRange range) {
  const media::FrameSequence sampled = media::SubsampleFrames(seq, stride);
  const std::vector<RealPlane> luma = LumaPlanes(sampled);
  const auto bc = ComputeBrightnessContrast(luma);
  DiversityProfile p;
  p.brightness = bc.brightness;
  p.contrast = bc.contrast;
  p.sharpness = Sharpness(luma);
  p.si = SpatialInformation(luma);
  p.ti = TemporalInformation(luma);
  p.ci = Colorfulness(media::SequenceToRgb(sampled, range));
  return p;
}

Hull2D ConvexHull(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  Hull2D hull;
  if (pts.size() < 3) {
    hull.vertices = pts;
    return hull;
  }
  std::vector<Point2> chain(2 * pts.size());
  size_t k = 0;
  for (const Point2& p : pts) {
    while (k >= 2 && Cross(chain[k - 2], chain[k - 1], p) <= 0) --k;
    chain[k++] = p;
  }
  for (size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && Cross(chain[k - 2], chain[k - 1], pts[i]) <= 0) --k;
    chain[k++] = pts[i];
  }
  chain.resize(k - 1);
  if (chain.size() < 3) {
    // All points collinear: keep the two extremes.
    hull.vertices = {pts.front(), pts.back()};
    return hull;
  }
  double twice_area = 0;
  for (size_t i = 0; i < chain.size(); ++i) {
    const Point2& a = chain[i];
    const Point2& b = chain[(i + 1) % chain.size()];
    twice_area += a.x * b.y - b.x * a.y;
  }
  hull.vertices = std::move(chain);
  hull.area = 0.5 * std::abs(twice_area);
  return hull;
}

}  // namespace vqalab::diversity
