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

#include "vqalab/nss.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "vqalab/csv.h"
#include "vqalab/error.h"

namespace vqalab::nss {
namespace {

constexpr int kWindowRadius = 3;
constexpr double kWindowSigma = 7.0 / 6.0;
constexpr double kStabilizer = 1.0;
constexpr size_t kMinSpatialSize = 32;
constexpr size_t kTemporalBlock = 8;

// Symmetric extension: -1 -> 0, -2 -> 1, n -> n-1.
size_t Reflect(long i, long n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return static_cast<size_t>(i);
}

std::array<double, 2 * kWindowRadius + 1> GaussianTaps() {
  std::array<double, 2 * kWindowRadius + 1> taps{};
  double sum = 0;
  for (int k = -kWindowRadius; k <= kWindowRadius; ++k) {
    taps[k + kWindowRadius] =
        std::exp(-(k * k) / (2.0 * kWindowSigma * kWindowSigma));
    sum += taps[k + kWindowRadius];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

RealPlane SeparableBlur(const RealPlane& in) {
  static const auto taps = GaussianTaps();
  const long rows = static_cast<long>(in.rows());
  const long cols = static_cast<long>(in.cols());
  RealPlane tmp(in.rows(), in.cols()), out(in.rows(), in.cols());
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      double s = 0;
      for (int k = -kWindowRadius; k <= kWindowRadius; ++k) {
        s += taps[k + kWindowRadius] * in(r, Reflect(c + k, cols));
      }
      tmp(r, c) = s;
    }
  }
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      double s = 0;
      for (int k = -kWindowRadius; k <= kWindowRadius; ++k) {
        s += taps[k + kWindowRadius] * tmp(Reflect(r + k, rows), c);
      }
      out(r, c) = s;
    }
  }
  return out;
}

bool AllFinite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(),
                     [](double v) { return std::isfinite(v); });
}

double SolveAlpha(double target) {
  double lo = kAlphaMin, hi = kAlphaMax;
  if (target <= GeneralizedGaussianRatio(lo)) return lo;
  if (target >= GeneralizedGaussianRatio(hi)) return hi;
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if (GeneralizedGaussianRatio(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void CheckFitInput(std::span<const double> samples) {
  if (!AllFinite(samples)) {
    throw Error(ErrorCode::kDegenerateSamples, "non-finite sample");
  }
  if (samples.size() < kMinFitSamples) {
    throw Error(ErrorCode::kTooFewSamples,
                std::to_string(samples.size()) + " samples, need " +
                    std::to_string(kMinFitSamples));
  }
}

// Products of each coefficient with its neighbour at (dr, dc) inside the
// rectangle [r0, r0+h) x [c0, c0+w).
std::vector<double> NeighbourProducts(const RealPlane& m, size_t r0, size_t c0,
                                      size_t h, size_t w, int dr, int dc) {
  std::vector<double> out;
  out.reserve(h * w);
  for (size_t r = 0; r < h; ++r) {
    for (size_t c = 0; c < w; ++c) {
      const long rr = static_cast<long>(r) + dr;
      const long cc = static_cast<long>(c) + dc;
      if (rr < 0 || cc < 0 || rr >= static_cast<long>(h) ||
          cc >= static_cast<long>(w)) {
        continue;
      }
      out.push_back(m(r0 + r, c0 + c) *
                    m(r0 + static_cast<size_t>(rr), c0 + static_cast<size_t>(cc)));
    }
  }
  return out;
}

ScaleFeatures RegionFeatures(const RealPlane& m, size_t r0, size_t c0,
                             size_t h, size_t w) {
  ScaleFeatures f{};
  std::vector<double> coeffs;
  coeffs.reserve(h * w);
  for (size_t r = 0; r < h; ++r) {
    for (size_t c = 0; c < w; ++c) coeffs.push_back(m(r0 + r, c0 + c));
  }
  const GgdParams g = FitGgd(coeffs);
  f[0] = g.alpha;
  f[1] = g.sigma * g.sigma;
  static constexpr int kShifts[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
  for (size_t o = 0; o < 4; ++o) {
    const auto products =
        NeighbourProducts(m, r0, c0, h, w, kShifts[o][0], kShifts[o][1]);
    const AggdParams a = FitAggd(products);
    f[2 + 4 * o] = a.alpha;
    f[3 + 4 * o] = a.eta;
    f[4 + 4 * o] = a.sigma_l * a.sigma_l;
    f[5 + 4 * o] = a.sigma_r * a.sigma_r;
  }
  return f;
}

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void PutF64(std::vector<uint8_t>& out, double v) {
  const auto bits = std::bit_cast<uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<uint8_t>(bits >> (8 * i)));
  }
}

uint64_t GetLE(std::span<const uint8_t> bytes, size_t& pos, int width) {
  if (pos + static_cast<size_t>(width) > bytes.size()) {
    throw Error(ErrorCode::kSchemaError, "pristine model truncated");
  }
  uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<uint64_t>(bytes[pos + static_cast<size_t>(i)]) << (8 * i);
  }
  pos += static_cast<size_t>(width);
  return v;
}

Eigen::MatrixXd SampleCovariance(const std::vector<SpatialNssVector>& rows,
                                 const Eigen::VectorXd& mean) {
  const auto dim = static_cast<Eigen::Index>(kSpatialNssSize);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  if (rows.size() < 2) return cov;
  for (const auto& r : rows) {
    const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(r.data(), dim) - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(rows.size() - 1);
  return 0.5 * (cov + cov.transpose());
}

Eigen::VectorXd RowMean(const std::vector<SpatialNssVector>& rows) {
  const auto dim = static_cast<Eigen::Index>(kSpatialNssSize);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& r : rows) mean += Eigen::Map<const Eigen::VectorXd>(r.data(), dim);
  return mean / static_cast<double>(rows.size());
}

}  // namespace

double GeneralizedGaussianRatio(double alpha) {
  return std::exp(2.0 * std::lgamma(2.0 / alpha) - std::lgamma(1.0 / alpha) -
                  std::lgamma(3.0 / alpha));
}

GgdParams FitGgd(std::span<const double> samples) {
  CheckFitInput(samples);
  double abs_sum = 0, sq_sum = 0;
  for (double x : samples) {
    abs_sum += std::abs(x);
    sq_sum += x * x;
  }
  const double n = static_cast<double>(samples.size());
  if (sq_sum == 0.0) throw Error(ErrorCode::kDegenerateSamples, "all zero");
  const double mean_abs = abs_sum / n;
  const double mean_sq = sq_sum / n;
  return {SolveAlpha(mean_abs * mean_abs / mean_sq), std::sqrt(mean_sq)};
}

AggdParams FitAggd(std::span<const double> samples) {
  CheckFitInput(samples);
  double left_sq = 0, right_sq = 0, abs_sum = 0;
  size_t left_n = 0, right_n = 0;
  for (double x : samples) {
    if (x < 0) {
      left_sq += x * x;
      ++left_n;
    } else if (x > 0) {
      right_sq += x * x;
      ++right_n;
    }
    abs_sum += std::abs(x);
  }
  if (left_n == 0 && right_n == 0) {
    throw Error(ErrorCode::kDegenerateSamples, "all zero");
  }
  if (left_n == 0 || right_n == 0) {
    throw Error(ErrorCode::kOneSidedSamples, "samples of a single sign");
  }
  const double n = static_cast<double>(samples.size());
  const double sigma_l = std::sqrt(left_sq / static_cast<double>(left_n));
  const double sigma_r = std::sqrt(right_sq / static_cast<double>(right_n));
  const double gamma_hat = sigma_l / sigma_r;
  const double mean_abs = abs_sum / n;
  const double r_hat = mean_abs * mean_abs / ((left_sq + right_sq) / n);
  const double g2 = gamma_hat * gamma_hat;
  const double r_norm =
      r_hat * (g2 * gamma_hat + 1.0) * (gamma_hat + 1.0) / ((g2 + 1.0) * (g2 + 1.0));
  const double alpha = SolveAlpha(r_norm);
  const double shape = std::exp(0.5 * (std::lgamma(1.0 / alpha) - std::lgamma(3.0 / alpha)));
  const double beta_l = sigma_l * shape;
  const double beta_r = sigma_r * shape;
  const double eta = (beta_r - beta_l) *
                     std::exp(std::lgamma(2.0 / alpha) - std::lgamma(1.0 / alpha));
  return {alpha, sigma_l, sigma_r, eta};
}

MscnResult ComputeMscn(const RealPlane& luma) {
  if (luma.rows() < 7 || luma.cols() < 7) {
    throw Error(ErrorCode::kFrameTooSmall, "MSCN needs at least 7x7");
  }
  // Work on the globally centered frame; MSCN is shift invariant and this
  // keeps flat regions exactly zero.
  double offset = 0;
  for (double v : luma.data()) offset += v;
  offset /= static_cast<double>(luma.size());
  RealPlane centered(luma.rows(), luma.cols());
  RealPlane sq(luma.rows(), luma.cols());
  for (size_t i = 0; i < luma.size(); ++i) {
    centered.data()[i] = luma.data()[i] - offset;
    sq.data()[i] = centered.data()[i] * centered.data()[i];
  }
  const RealPlane mu = SeparableBlur(centered);
  const RealPlane mu_sq = SeparableBlur(sq);
  MscnResult out{RealPlane(luma.rows(), luma.cols()),
                 RealPlane(luma.rows(), luma.cols())};
  for (size_t i = 0; i < luma.size(); ++i) {
    const double m = mu.data()[i];
    const double sigma = std::sqrt(std::abs(mu_sq.data()[i] - m * m));
    out.local_sigma.data()[i] = sigma;
    out.mscn.data()[i] = (centered.data()[i] - m) / (sigma + kStabilizer);
  }
  return out;
}

RealPlane Downsample2(const RealPlane& in) {
  RealPlane out(in.rows() / 2, in.cols() / 2);
  for (size_t r = 0; r < out.rows(); ++r) {
    for (size_t c = 0; c < out.cols(); ++c) {
      out(r, c) = 0.25 * (in(2 * r, 2 * c) + in(2 * r, 2 * c + 1) +
                          in(2 * r + 1, 2 * c) + in(2 * r + 1, 2 * c + 1));
    }
  }
  return out;
}

ScaleFeatures MscnFeatures(const RealPlane& mscn) {
  return RegionFeatures(mscn, 0, 0, mscn.rows(), mscn.cols());
}

SpatialNssVector SpatialNss(const RealPlane& luma) {
  if (luma.rows() < kMinSpatialSize || luma.cols() < kMinSpatialSize) {
    throw Error(ErrorCode::kFrameTooSmall, "spatial NSS needs at least 32x32");
  }
  SpatialNssVector out{};
  const ScaleFeatures s1 = MscnFeatures(Mscn(luma));
  const ScaleFeatures s2 = MscnFeatures(Mscn(Downsample2(luma)));
  std::copy(s1.begin(), s1.end(), out.begin());
  std::copy(s2.begin(), s2.end(), out.begin() + kFeaturesPerScale);
  return out;
}

SpatialNssVector SpatialNssVideo(const media::FrameSequence& seq,
                                 size_t stride) {
  const media::FrameSequence sampled = media::SubsampleFrames(seq, stride);
  if (sampled.frames.empty()) throw Error(ErrorCode::kEmptySequence, "no frames");
  SpatialNssVector sum{};
  for (const auto& f : sampled.frames) {
    const SpatialNssVector v = SpatialNss(ToReal(f.luma));
    for (size_t i = 0; i < v.size(); ++i) sum[i] += v[i];
  }
  for (double& v : sum) v /= static_cast<double>(sampled.frames.size());
  return sum;
}

std::vector<SpatialNssVector> PatchFeatures(const RealPlane& luma,
                                            const PatchOptions& options,
                                            bool select_sharp) {
  const size_t p = options.patch_size;
  const size_t half = p / 2;
  if (p < 16 || luma.rows() < p || luma.cols() < p) {
    throw Error(ErrorCode::kFrameTooSmall, "frame smaller than one patch");
  }
  const MscnResult s1 = ComputeMscn(luma);
  const RealPlane s2 = Mscn(Downsample2(luma));
  const size_t prow = luma.rows() / p, pcol = luma.cols() / p;

  struct Candidate {
    size_t r, c;
    double sharpness;
  };
  std::vector<Candidate> patches;
  double peak = 0;
  for (size_t i = 0; i < prow; ++i) {
    for (size_t j = 0; j < pcol; ++j) {
      double s = 0;
      for (size_t r = 0; r < p; ++r)
        for (size_t c = 0; c < p; ++c) s += s1.local_sigma(i * p + r, j * p + c);
      s /= static_cast<double>(p * p);
      patches.push_back({i, j, s});
      peak = std::max(peak, s);
    }
  }
  std::vector<SpatialNssVector> out;
  for (const Candidate& cand : patches) {
    if (select_sharp && cand.sharpness < options.sharpness_fraction * peak) {
      continue;
    }
    try {
      const ScaleFeatures a = RegionFeatures(s1.mscn, cand.r * p, cand.c * p, p, p);
      const ScaleFeatures b = RegionFeatures(s2, cand.r * half, cand.c * half, half, half);
      SpatialNssVector v{};
      std::copy(a.begin(), a.end(), v.begin());
      std::copy(b.begin(), b.end(), v.begin() + kFeaturesPerScale);
      out.push_back(v);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateSamples &&
          e.code() != ErrorCode::kOneSidedSamples) {
        throw;
      }
    }
  }
  return out;
}

PristineModel FitPristineModel(std::span<const RealPlane> corpus,
                               const PatchOptions& options) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "no frames");
  std::vector<SpatialNssVector> rows;
  for (const RealPlane& frame : corpus) {
    auto feats = PatchFeatures(frame, options, /*select_sharp=*/true);
    rows.insert(rows.end(), feats.begin(), feats.end());
  }
  if (rows.empty()) throw Error(ErrorCode::kEmptyCorpus, "no usable patches");
  PristineModel model;
  model.mean = RowMean(rows);
  model.cov = SampleCovariance(rows, model.mean);
  model.cov.diagonal().array() += options.ridge;
  return model;
}

double MahalanobisDistance(const Eigen::VectorXd& mean1,
                           const Eigen::MatrixXd& cov1,
                           const Eigen::VectorXd& mean2,
                           const Eigen::MatrixXd& cov2) {
  const Eigen::Index dim = mean1.size();
  if (mean2.size() != dim || cov1.rows() != dim || cov1.cols() != dim ||
      cov2.rows() != dim || cov2.cols() != dim) {
    throw Error(ErrorCode::kShapeMismatch, "model dimensions differ");
  }
  Eigen::MatrixXd pooled = 0.5 * (cov1 + cov2);
  pooled = 0.5 * (pooled + pooled.transpose());
  if (!pooled.allFinite() || !mean1.allFinite() || !mean2.allFinite()) {
    throw Error(ErrorCode::kSingularCovariance, "non-finite statistics");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(pooled);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  if (lambda.minCoeff() < -1e-8 * scale) {
    throw Error(ErrorCode::kSingularCovariance, "pooled covariance not PSD");
  }
  const double cutoff = scale * static_cast<double>(dim) *
                        std::numeric_limits<double>::epsilon();
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * (mean1 - mean2);
  double d2 = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (lambda(i) > cutoff) d2 += proj(i) * proj(i) / lambda(i);
  }
  return std::sqrt(std::max(0.0, d2));
}

double NiqeScore(const RealPlane& luma, const PristineModel& model,
                 const PatchOptions& options) {
  const auto rows = PatchFeatures(luma, options, /*select_sharp=*/false);
  if (rows.empty()) {
    throw Error(ErrorCode::kDegenerateSamples, "no usable patch in frame");
  }
  const Eigen::VectorXd mean = RowMean(rows);
  return MahalanobisDistance(model.mean, model.cov, mean,
                             SampleCovariance(rows, mean));
}

double NiqeVideoScore(const media::FrameSequence& seq,
                      const PristineModel& model, size_t stride,
                      const PatchOptions& options) {
  const media::FrameSequence sampled = media::SubsampleFrames(seq, stride);
  if (sampled.frames.empty()) throw Error(ErrorCode::kEmptySequence, "no frames");
  double sum = 0;
  for (const auto& f : sampled.frames) {
    sum += NiqeScore(ToReal(f.luma), model, options);
  }
  return sum / static_cast<double>(sampled.frames.size());
}

std::vector<uint8_t> SerializePristineModel(const PristineModel& model) {
  const auto dim = static_cast<uint32_t>(model.mean.size());
  std::vector<uint8_t> out = {'N', 'I', 'Q', 'E'};
  PutU32(out, dim);
  for (uint32_t i = 0; i < dim; ++i) PutF64(out, model.mean(i));
  for (uint32_t r = 0; r < dim; ++r) {
    for (uint32_t c = 0; c < dim; ++c) PutF64(out, model.cov(r, c));
  }
  return out;
}

PristineModel DeserializePristineModel(std::span<const uint8_t> bytes) {
  if (bytes.size() < 8 || bytes[0] != 'N' || bytes[1] != 'I' ||
      bytes[2] != 'Q' || bytes[3] != 'E') {
    throw Error(ErrorCode::kSchemaError, "not a NIQE pristine model");
  }
  size_t pos = 4;
  const auto dim = static_cast<Eigen::Index>(GetLE(bytes, pos, 4));
  PristineModel model;
  model.mean.resize(dim);
  model.cov.resize(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    model.mean(i) = std::bit_cast<double>(GetLE(bytes, pos, 8));
  }
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      model.cov(r, c) = std::bit_cast<double>(GetLE(bytes, pos, 8));
    }
  }
  if (pos != bytes.size()) {
    throw Error(ErrorCode::kSchemaError, "trailing bytes in pristine model");
  }
  return model;
}

void SavePristineModel(const std::filesystem::path& path,
                       const PristineModel& model) {
  const auto bytes = SerializePristineModel(model);
  io::WriteFileAtomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                             bytes.size()));
}

PristineModel LoadPristineModel(const std::filesystem::path& path) {
  const std::string data = io::ReadFile(path);
  return DeserializePristineModel(
      std::span(reinterpret_cast<const uint8_t*>(data.data()), data.size()));
}

void HaarStep(std::span<const double> in, std::span<double> approx,
              std::span<double> detail) {
  const size_t half = in.size() / 2;
  const double k = 1.0 / std::sqrt(2.0);
  for (size_t t = 0; t < half; ++t) {
    approx[t] = k * (in[2 * t] + in[2 * t + 1]);
    detail[t] = k * (in[2 * t] - in[2 * t + 1]);
  }
}

HaarTemporalCoefficients HaarTemporal(std::span<const RealPlane> frames) {
  if (frames.size() < kTemporalBlock) {
    throw Error(ErrorCode::kTooFewFrames, "temporal NSS needs >= 8 frames");
  }
  const size_t pixels = frames[0].size();
  for (const auto& f : frames) {
    if (f.size() != pixels) throw Error(ErrorCode::kShapeMismatch, "frame sizes differ");
  }
  const size_t blocks = frames.size() / kTemporalBlock;
  HaarTemporalCoefficients out;
  std::array<double, kTemporalBlock> signal{}, approx{}, detail{};
  for (size_t b = 0; b < blocks; ++b) {
    for (size_t p = 0; p < pixels; ++p) {
      for (size_t t = 0; t < kTemporalBlock; ++t) {
        signal[t] = frames[b * kTemporalBlock + t].data()[p];
      }
      size_t len = kTemporalBlock;
      for (size_t level = 0; level < kTemporalLevels; ++level) {
        HaarStep(std::span<const double>(signal.data(), len),
                 std::span<double>(approx.data(), len / 2),
                 std::span<double>(detail.data(), len / 2));
        out.detail[level].insert(out.detail[level].end(), detail.begin(),
                                 detail.begin() + static_cast<ptrdiff_t>(len / 2));
        len /= 2;
        std::copy(approx.begin(), approx.begin() + static_cast<ptrdiff_t>(len),
                  signal.begin());
      }
      out.approx.insert(out.approx.end(), signal.begin(),
                        signal.begin() + static_cast<ptrdiff_t>(len));
    }
  }
  return out;
}

TemporalNssVector TemporalNss(std::span<const RealPlane> frames) {
  const HaarTemporalCoefficients coeffs = HaarTemporal(frames);
  TemporalNssVector out{};
  for (size_t level = 0; level < kTemporalLevels; ++level) {
    const auto& d = coeffs.detail[level];
    double abs_sum = 0, sq_sum = 0;
    for (double v : d) {
      abs_sum += std::abs(v);
      sq_sum += v * v;
    }
    const double n = static_cast<double>(d.size());
    double alpha = 0, sigma = 0, energy = 0;
    if (sq_sum > 0) {
      energy = abs_sum / n;
      sigma = std::sqrt(sq_sum / n);
      if (d.size() >= kMinFitSamples) alpha = FitGgd(d).alpha;
    }
    out[3 * level] = alpha;
    out[3 * level + 1] = sigma;
    out[3 * level + 2] = energy;
  }
  return out;
}

TemporalNssVector TemporalNssVideo(const media::FrameSequence& seq) {
  std::vector<RealPlane> luma;
  luma.reserve(seq.frames.size());
  for (const auto& f : seq.frames) luma.push_back(ToReal(f.luma));
  return TemporalNss(luma);
}

}  // namespace vqalab::nss
