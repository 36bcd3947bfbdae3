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
#include <array>
#include <cmath>
#include <functional>
#include <numbers>

#include "vqalab/error.h"
#include "vqalab/moeva.h"
#include "vqalab/random.h"

namespace vqalab::moeva {
namespace {

using Kind = AugmentationKind;

constexpr std::array<std::string_view, kAugmentationKinds> kNames = {
    "gaussian-blur",
    "lens-blur",
    "motion-blur-h",
    "motion-blur-v",
    "gaussian-noise",
    "impulse-noise",
    "multiplicative-noise",
    "block-quantization",
    "color-quantization",
    "pixelate",
    "bilinear-downscale-upscale",
    "nearest-downscale-upscale",
    "brightness-up",
    "brightness-down",
    "contrast-up",
    "contrast-down",
    "gamma-high",
    "gamma-low",
    "saturation-up",
    "saturation-down",
    "white-balance-warm",
    "white-balance-cool",
    "oversharpen",
    "vignette",
    "chroma-shift",
};

using Levels = std::array<double, kAugmentationLevels>;

double Param(const Levels& table, int level) { return table[level - 1]; }

size_t Reflect(long i, long n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return static_cast<size_t>(i);
}

template <typename F>
void ForEachPlane(RGBFrame& img, F&& f) {
  f(img.r);
  f(img.g);
  f(img.b);
}

RealPlane ConvolveRows(const RealPlane& in, const std::vector<double>& k) {
  const long half = static_cast<long>(k.size() / 2);
  const long cols = static_cast<long>(in.cols());
  RealPlane out(in.rows(), in.cols());
  for (size_t r = 0; r < in.rows(); ++r) {
    for (long c = 0; c < cols; ++c) {
      double s = 0;
      for (long j = -half; j <= half; ++j) {
        s += k[j + half] * in(r, Reflect(c + j, cols));
      }
      out(r, c) = s;
    }
  }
  return out;
}

RealPlane ConvolveCols(const RealPlane& in, const std::vector<double>& k) {
  const long half = static_cast<long>(k.size() / 2);
  const long rows = static_cast<long>(in.rows());
  RealPlane out(in.rows(), in.cols());
  for (long r = 0; r < rows; ++r) {
    for (size_t c = 0; c < in.cols(); ++c) {
      double s = 0;
      for (long j = -half; j <= half; ++j) {
        s += k[j + half] * in(Reflect(r + j, rows), c);
      }
      out(r, c) = s;
    }
  }
  return out;
}

std::vector<double> GaussianKernel(double sigma) {
  const long half = static_cast<long>(std::ceil(3 * sigma));
  std::vector<double> k(2 * half + 1);
  double total = 0;
  for (long i = -half; i <= half; ++i) {
    k[i + half] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += k[i + half];
  }
  for (double& v : k) v /= total;
  return k;
}

RealPlane GaussianBlur(const RealPlane& in, double sigma) {
  const std::vector<double> k = GaussianKernel(sigma);
  return ConvolveCols(ConvolveRows(in, k), k);
}

RealPlane DiskBlur(const RealPlane& in, double radius) {
  const long half = static_cast<long>(std::ceil(radius));
  std::vector<std::pair<long, long>> taps;
  for (long dy = -half; dy <= half; ++dy) {
    for (long dx = -half; dx <= half; ++dx) {
      if (dy * dy + dx * dx <= radius * radius) taps.emplace_back(dy, dx);
    }
  }
  const long rows = static_cast<long>(in.rows());
  const long cols = static_cast<long>(in.cols());
  const double w = 1.0 / static_cast<double>(taps.size());
  RealPlane out(in.rows(), in.cols());
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      double s = 0;
      for (auto [dy, dx] : taps) s += in(Reflect(r + dy, rows), Reflect(c + dx, cols));
      out(r, c) = s * w;
    }
  }
  return out;
}

double Luma(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

// Orthonormal 8-point DCT-II basis.
std::array<std::array<double, 8>, 8> DctBasis() {
  std::array<std::array<double, 8>, 8> d{};
  for (int k = 0; k < 8; ++k) {
    const double a = k == 0 ? std::sqrt(1.0 / 8) : std::sqrt(2.0 / 8);
    for (int n = 0; n < 8; ++n) {
      d[k][n] = a * std::cos(std::numbers::pi * (2 * n + 1) * k / 16.0);
    }
  }
  return d;
}

void QuantizeBlocks(RealPlane& p, double step) {
  static const auto d = DctBasis();
  std::array<std::array<double, 8>, 8> block{}, tmp{}, coef{};
  for (size_t by = 0; by + 8 <= p.rows(); by += 8) {
    for (size_t bx = 0; bx + 8 <= p.cols(); bx += 8) {
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) block[y][x] = p(by + y, bx + x) - 128.0;
      for (int k = 0; k < 8; ++k)
        for (int x = 0; x < 8; ++x) {
          double s = 0;
          for (int y = 0; y < 8; ++y) s += d[k][y] * block[y][x];
          tmp[k][x] = s;
        }
      for (int k = 0; k < 8; ++k)
        for (int l = 0; l < 8; ++l) {
          double s = 0;
          for (int x = 0; x < 8; ++x) s += tmp[k][x] * d[l][x];
          coef[k][l] = std::round(s / step) * step;
        }
      for (int y = 0; y < 8; ++y)
        for (int l = 0; l < 8; ++l) {
          double s = 0;
          for (int k = 0; k < 8; ++k) s += d[k][y] * coef[k][l];
          tmp[y][l] = s;
        }
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
          double s = 0;
          for (int l = 0; l < 8; ++l) s += tmp[y][l] * d[l][x];
          p(by + y, bx + x) = s + 128.0;
        }
    }
  }
}

double Bilinear(const RealPlane& p, double y, double x) {
  y = std::clamp(y, 0.0, static_cast<double>(p.rows() - 1));
  x = std::clamp(x, 0.0, static_cast<double>(p.cols() - 1));
  const size_t y0 = static_cast<size_t>(y);
  const size_t x0 = static_cast<size_t>(x);
  const size_t y1 = std::min(y0 + 1, p.rows() - 1);
  const size_t x1 = std::min(x0 + 1, p.cols() - 1);
  const double fy = y - y0;
  const double fx = x - x0;
  return (1 - fy) * ((1 - fx) * p(y0, x0) + fx * p(y0, x1)) +
         fy * ((1 - fx) * p(y1, x0) + fx * p(y1, x1));
}

// Pixel-center aligned resampling to rows x cols.
RealPlane Resize(const RealPlane& in, size_t rows, size_t cols, bool nearest) {
  RealPlane out(rows, cols);
  const double sy = static_cast<double>(in.rows()) / rows;
  const double sx = static_cast<double>(in.cols()) / cols;
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) {
      const double y = (r + 0.5) * sy - 0.5;
      const double x = (c + 0.5) * sx - 0.5;
      if (nearest) {
        const size_t yi = std::min(in.rows() - 1,
                                   static_cast<size_t>(std::max(0.0, std::round(y))));
        const size_t xi = std::min(in.cols() - 1,
                                   static_cast<size_t>(std::max(0.0, std::round(x))));
        out(r, c) = in(yi, xi);
      } else {
        out(r, c) = Bilinear(in, y, x);
      }
    }
  }
  return out;
}

RealPlane DownUp(const RealPlane& in, double factor, bool nearest) {
  const size_t rows = std::max<size_t>(1, std::lround(in.rows() / factor));
  const size_t cols = std::max<size_t>(1, std::lround(in.cols() / factor));
  return Resize(Resize(in, rows, cols, nearest), in.rows(), in.cols(), nearest);
}

RealPlane Shift(const RealPlane& in, long dx) {
  RealPlane out(in.rows(), in.cols());
  const long cols = static_cast<long>(in.cols());
  for (size_t r = 0; r < in.rows(); ++r) {
    for (long c = 0; c < cols; ++c) {
      out(r, c) = in(r, std::clamp(c - dx, 0L, cols - 1));
    }
  }
  return out;
}

void Finalize(RGBFrame& img) {
  ForEachPlane(img, [](RealPlane& p) {
    for (double& v : p.data()) v = std::clamp(std::round(v), 0.0, 255.0);
  });
}

}  // namespace

std::string_view AugmentationKindName(AugmentationKind kind) {
  return kNames[static_cast<size_t>(kind)];
}

std::vector<AugmentationSpec> BuildAugmentationBank() {
  std::vector<AugmentationSpec> bank;
  for (size_t k = 0; k < kAugmentationKinds; ++k) {
    for (int level = 1; level <= kAugmentationLevels; ++level) {
      bank.push_back({static_cast<Kind>(k), level, 0});
    }
  }
  return bank;
}

RGBFrame ApplyAugmentation(const RGBFrame& img, const AugmentationSpec& spec) {
  if (img.rows() < kMinAugmentSize || img.cols() < kMinAugmentSize) {
    throw Error(ErrorCode::kImageTooSmall, "augmentation needs at least 64x64");
  }
  if (spec.level < 1 || spec.level > kAugmentationLevels) {
    throw Error(ErrorCode::kUsageError, "augmentation level must be 1..5");
  }
  const int lv = spec.level;
  std::mt19937_64 rng(spec.seed);
  RGBFrame out = img;
  auto per_pixel = [&out](auto&& f) {
    for (size_t i = 0; i < out.r.size(); ++i) {
      f(out.r.data()[i], out.g.data()[i], out.b.data()[i], i);
    }
  };
  switch (spec.kind) {
    case Kind::kGaussianBlur: {
      const double sigma = Param({0.5, 1.0, 1.5, 2.0, 3.0}, lv);
      ForEachPlane(out, [&](RealPlane& p) { p = GaussianBlur(p, sigma); });
      break;
    }
    case Kind::kLensBlur: {
      const double radius = Param({1, 2, 3, 4, 6}, lv);
      ForEachPlane(out, [&](RealPlane& p) { p = DiskBlur(p, radius); });
      break;
    }
    case Kind::kMotionBlurH:
    case Kind::kMotionBlurV: {
      const size_t len = static_cast<size_t>(Param({3, 5, 7, 9, 13}, lv));
      const std::vector<double> k(len, 1.0 / static_cast<double>(len));
      const bool horizontal = spec.kind == Kind::kMotionBlurH;
      ForEachPlane(out, [&](RealPlane& p) {
        p = horizontal ? ConvolveRows(p, k) : ConvolveCols(p, k);
      });
      break;
    }
    case Kind::kGaussianNoise: {
      const double sigma = Param({5, 10, 15, 20, 30}, lv);
      ForEachPlane(out, [&](RealPlane& p) {
        for (double& v : p.data()) v += sigma * rng::Normal01(rng);
      });
      break;
    }
    case Kind::kImpulseNoise: {
      const double rate = Param({0.01, 0.02, 0.05, 0.1, 0.2}, lv);
      per_pixel([&](double& r, double& g, double& b, size_t) {
        if (rng::Uniform01(rng) < rate) {
          const double v = rng::Uniform01(rng) < 0.5 ? 0.0 : 255.0;
          r = g = b = v;
        }
      });
      break;
    }
    case Kind::kMultiplicativeNoise: {
      const double sigma = Param({0.05, 0.1, 0.15, 0.2, 0.3}, lv);
      ForEachPlane(out, [&](RealPlane& p) {
        for (double& v : p.data()) v *= 1.0 + sigma * rng::Normal01(rng);
      });
      break;
    }
    case Kind::kBlockQuantization: {
      const double step = Param({8, 16, 32, 48, 64}, lv);
      ForEachPlane(out, [&](RealPlane& p) { QuantizeBlocks(p, step); });
      break;
    }
    case Kind::kColorQuantization: {
      const double q = 256.0 / Param({64, 32, 16, 8, 4}, lv);
      ForEachPlane(out, [&](RealPlane& p) {
        for (double& v : p.data()) v = std::floor(v / q) * q + q / 2;
      });
      break;
    }
    case Kind::kPixelate: {
      const size_t block = static_cast<size_t>(Param({2, 3, 4, 6, 8}, lv));
      ForEachPlane(out, [&](RealPlane& p) {
        for (size_t by = 0; by < p.rows(); by += block) {
          for (size_t bx = 0; bx < p.cols(); bx += block) {
            const size_t ey = std::min(by + block, p.rows());
            const size_t ex = std::min(bx + block, p.cols());
            double s = 0;
            for (size_t y = by; y < ey; ++y)
              for (size_t x = bx; x < ex; ++x) s += p(y, x);
            s /= static_cast<double>((ey - by) * (ex - bx));
            for (size_t y = by; y < ey; ++y)
              for (size_t x = bx; x < ex; ++x) p(y, x) = s;
          }
        }
      });
      break;
    }
    case Kind::kBilinearDownUp:
    case Kind::kNearestDownUp: {
      const double factor = Param({1.5, 2, 3, 4, 6}, lv);
      const bool nearest = spec.kind == Kind::kNearestDownUp;
      ForEachPlane(out, [&](RealPlane& p) { p = DownUp(p, factor, nearest); });
      break;
    }
    case Kind::kBrightnessUp:
    case Kind::kBrightnessDown: {
      const double delta = (spec.kind == Kind::kBrightnessUp ? 10.0 : -10.0) * lv;
      ForEachPlane(out, [&](RealPlane& p) {
        for (double& v : p.data()) v += delta;
      });
      break;
    }
    case Kind::kContrastUp:
    case Kind::kContrastDown: {
      const double f = spec.kind == Kind::kContrastUp
                           ? Param({1.2, 1.4, 1.6, 1.8, 2.0}, lv)
                           : Param({0.85, 0.7, 0.55, 0.4, 0.25}, lv);
      ForEachPlane(out, [&](RealPlane& p) {
        for (double& v : p.data()) v = 127.5 + f * (v - 127.5);
      });
      break;
    }
    case Kind::kGammaHigh:
    case Kind::kGammaLow: {
      double gamma = Param({1.2, 1.5, 1.8, 2.2, 2.6}, lv);
      if (spec.kind == Kind::kGammaLow) gamma = 1.0 / gamma;
      ForEachPlane(out, [&](RealPlane& p) {
        for (double& v : p.data()) {
          v = 255.0 * std::pow(std::clamp(v, 0.0, 255.0) / 255.0, gamma);
        }
      });
      break;
    }
    case Kind::kSaturationUp:
    case Kind::kSaturationDown: {
      const double f = spec.kind == Kind::kSaturationUp
                           ? Param({1.3, 1.6, 2.0, 2.5, 3.0}, lv)
                           : Param({0.8, 0.6, 0.4, 0.2, 0.0}, lv);
      per_pixel([&](double& r, double& g, double& b, size_t) {
        const double y = Luma(r, g, b);
        r = y + f * (r - y);
        g = y + f * (g - y);
        b = y + f * (b - y);
      });
      break;
    }
    case Kind::kWhiteBalanceWarm:
    case Kind::kWhiteBalanceCool: {
      const double s = (spec.kind == Kind::kWhiteBalanceWarm ? 0.05 : -0.05) * lv;
      per_pixel([&](double& r, double&, double& b, size_t) {
        r *= 1 + s;
        b *= 1 - s;
      });
      break;
    }
    case Kind::kOversharpen: {
      const double amount = Param({0.5, 1.0, 1.5, 2.0, 3.0}, lv);
      ForEachPlane(out, [&](RealPlane& p) {
        const RealPlane blurred = GaussianBlur(p, 1.0);
        for (size_t i = 0; i < p.size(); ++i) {
          p.data()[i] += amount * (p.data()[i] - blurred.data()[i]);
        }
      });
      break;
    }
    case Kind::kVignette: {
      const double strength = Param({0.2, 0.35, 0.5, 0.65, 0.8}, lv);
      const double cy = (out.rows() - 1) / 2.0;
      const double cx = (out.cols() - 1) / 2.0;
      const double r2max = cy * cy + cx * cx;
      const size_t cols = out.cols();
      per_pixel([&](double& r, double& g, double& b, size_t i) {
        const double dy = static_cast<double>(i / cols) - cy;
        const double dx = static_cast<double>(i % cols) - cx;
        const double f = 1 - strength * (dy * dy + dx * dx) / r2max;
        r *= f;
        g *= f;
        b *= f;
      });
      break;
    }
    case Kind::kChromaShift: {
      const long d = static_cast<long>(Param({1, 2, 3, 4, 6}, lv));
      out.r = Shift(out.r, d);
      out.b = Shift(out.b, -d);
      break;
    }
  }
  Finalize(out);
  return out;
}

}  // namespace vqalab::moeva
