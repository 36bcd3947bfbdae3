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

#include "vqalab/synthetic.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace vqalab::synthetic {
namespace {

// Bilinearly interpolated random lattice with `cells` cells along the longer
// side.
RealPlane ValueNoise(size_t rows, size_t cols, size_t cells, std::mt19937_64& rng) {
  const size_t longest = std::max(rows, cols);
  const double step = static_cast<double>(longest) / static_cast<double>(cells);
  const size_t gr = static_cast<size_t>(std::ceil(rows / step)) + 2;
  const size_t gc = static_cast<size_t>(std::ceil(cols / step)) + 2;
  std::normal_distribution<double> n(0.0, 1.0);
  RealPlane grid(gr, gc);
  for (double& v : grid.data()) v = n(rng);
  RealPlane out(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    const double y = r / step;
    const size_t y0 = static_cast<size_t>(y);
    const double fy = y - static_cast<double>(y0);
    for (size_t c = 0; c < cols; ++c) {
      const double x = c / step;
      const size_t x0 = static_cast<size_t>(x);
      const double fx = x - static_cast<double>(x0);
      out(r, c) = (1 - fy) * ((1 - fx) * grid(y0, x0) + fx * grid(y0, x0 + 1)) +
                  fy * ((1 - fx) * grid(y0 + 1, x0) + fx * grid(y0 + 1, x0 + 1));
    }
  }
  return out;
}

RealPlane MultiscaleNoise(size_t rows, size_t cols, std::mt19937_64& rng,
                          size_t octaves, double falloff) {
  RealPlane sum(rows, cols, 0.0);
  double amp = 1.0;
  size_t cells = 2;
  for (size_t k = 0; k < octaves; ++k) {
    const RealPlane layer = ValueNoise(rows, cols, cells, rng);
    for (size_t i = 0; i < sum.size(); ++i) sum.data()[i] += amp * layer.data()[i];
    amp *= falloff;
    cells *= 2;
  }
  return sum;
}

void AddShapes(RealPlane& img, std::mt19937_64& rng, int count, double strength) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rows = static_cast<double>(img.rows());
  const double cols = static_cast<double>(img.cols());
  for (int s = 0; s < count; ++s) {
    const double cy = u(rng) * rows, cx = u(rng) * cols;
    const double ry = (0.05 + 0.25 * u(rng)) * rows;
    const double rx = (0.05 + 0.25 * u(rng)) * cols;
    const double level = (u(rng) - 0.5) * 2.0 * strength;
    const bool disc = u(rng) < 0.5;
    for (size_t r = 0; r < img.rows(); ++r) {
      for (size_t c = 0; c < img.cols(); ++c) {
        const double dy = (r - cy) / ry, dx = (c - cx) / rx;
        const bool inside = disc ? dy * dy + dx * dx <= 1.0
                                 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
        if (inside) img(r, c) += level;
      }
    }
  }
}

void Normalize(RealPlane& img, double lo, double hi) {
  const auto [mn, mx] = std::minmax_element(img.data().begin(), img.data().end());
  const double a = *mn, b = *mx;
  const double scale = b > a ? (hi - lo) / (b - a) : 0.0;
  for (double& v : img.data()) v = lo + (v - a) * scale;
}

}  // namespace

RealPlane NaturalLuma(size_t rows, size_t cols, uint64_t seed) {
  std::mt19937_64 rng(seed);
  RealPlane img = MultiscaleNoise(rows, cols, rng, 7, 0.55);
  AddShapes(img, rng, 8, 1.5);
  Normalize(img, 20.0, 235.0);
  std::normal_distribution<double> grain(0.0, 0.6);
  for (double& v : img.data()) v = std::clamp(v + grain(rng), 0.0, 255.0);
  return img;
}

media::RGBFrame NaturalRgb(size_t rows, size_t cols, uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const RealPlane luma = NaturalLuma(rows, cols, seed);
  RealPlane cr = MultiscaleNoise(rows, cols, rng, 4, 0.6);
  RealPlane cb = MultiscaleNoise(rows, cols, rng, 4, 0.6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double tint_r = 15.0 * u(rng), tint_b = 15.0 * u(rng);
  media::RGBFrame out(rows, cols);
  for (size_t i = 0; i < luma.size(); ++i) {
    const double y = luma.data()[i];
    const double dr = 18.0 * cr.data()[i] + tint_r;
    const double db = 18.0 * cb.data()[i] + tint_b;
    out.r.data()[i] = std::clamp(y + dr, 0.0, 255.0);
    out.b.data()[i] = std::clamp(y + db, 0.0, 255.0);
    out.g.data()[i] = std::clamp(y - 0.5 * (dr + db), 0.0, 255.0);
  }
  return out;
}

media::FrameSequence PanningClip(size_t rows, size_t cols, size_t frames,
                                 uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> speed(-2, 2);
  const int vy = speed(rng), vx = speed(rng) == 0 ? 1 : speed(rng);
  const size_t margin = 2 * frames + 2;
  const media::RGBFrame scene =
      NaturalRgb(rows + 2 * margin, cols + 2 * margin, seed + 1);
  media::FrameSequence seq;
  seq.width = cols;
  seq.height = rows;
  for (size_t t = 0; t < frames; ++t) {
    const size_t oy = margin + static_cast<size_t>(vy * static_cast<int>(t));
    const size_t ox = margin + static_cast<size_t>(vx * static_cast<int>(t));
    media::RGBFrame view(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
      for (size_t c = 0; c < cols; ++c) {
        view.r(r, c) = scene.r(oy + r, ox + c);
        view.g(r, c) = scene.g(oy + r, ox + c);
        view.b(r, c) = scene.b(oy + r, ox + c);
      }
    }
    seq.frames.push_back(media::FromRgb(view, media::ChromaLayout::k444));
  }
  return seq;
}

}  // namespace vqalab::synthetic
