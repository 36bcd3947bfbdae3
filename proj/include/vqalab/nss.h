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

// Natural-scene-statistics features: MSCN coefficients, (asymmetric)
// generalized Gaussian fits, the 36-dimensional spatial feature vector, a
// pristine multivariate Gaussian model with its Mahalanobis-style quality
// distance, and Haar-wavelet temporal statistics.

#ifndef VQALAB_NSS_H_
#define VQALAB_NSS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vqalab/media_io.h"
#include "vqalab/plane.h"

namespace vqalab::nss {

struct GgdParams {
  double alpha = 0;
  double sigma = 0;
};

struct AggdParams {
  double alpha = 0;
  double sigma_l = 0;
  double sigma_r = 0;
  double eta = 0;
};

inline constexpr size_t kFeaturesPerScale = 18;
inline constexpr size_t kSpatialNssSize = 2 * kFeaturesPerScale;
inline constexpr size_t kTemporalLevels = 3;
inline constexpr size_t kTemporalNssSize = 3 * kTemporalLevels;

using ScaleFeatures = std::array<double, kFeaturesPerScale>;
using SpatialNssVector = std::array<double, kSpatialNssSize>;
using TemporalNssVector = std::array<double, kTemporalNssSize>;

inline constexpr double kAlphaMin = 0.1;
inline constexpr double kAlphaMax = 10.0;
inline constexpr size_t kMinFitSamples = 100;

// Gamma(2/a)^2 / (Gamma(1/a) Gamma(3/a)), increasing in a.
double GeneralizedGaussianRatio(double alpha);

// Moment matching: alpha by bisection on [0.1, 10] (tolerance 1e-8),
// sigma = sqrt(E[x^2]).
GgdParams FitGgd(std::span<const double> samples);
AggdParams FitAggd(std::span<const double> samples);

struct MscnResult {
  RealPlane mscn;
  RealPlane local_sigma;
};

// (I - mu) / (sigma + 1) with a normalized 7x7 Gaussian window (sigma 7/6)
// and symmetric boundary extension. Requires H, W >= 7.
MscnResult ComputeMscn(const RealPlane& luma);
inline RealPlane Mscn(const RealPlane& luma) { return ComputeMscn(luma).mscn; }

// 2x2 block average (low-pass + decimate); odd trailing rows/cols dropped.
RealPlane Downsample2(const RealPlane& in);

// GGD(alpha, sigma^2) of the coefficients followed by AGGD(alpha, eta,
// sigma_l^2, sigma_r^2) of the horizontal, vertical, main-diagonal and
// anti-diagonal neighbour products.
ScaleFeatures MscnFeatures(const RealPlane& mscn);

// Two scales (full resolution and Downsample2). Frame must be >= 32x32.
SpatialNssVector SpatialNss(const RealPlane& luma);

// Element-wise mean of SpatialNss over frames 0, stride, 2*stride, ...
SpatialNssVector SpatialNssVideo(const media::FrameSequence& seq,
                                 size_t stride = 10);

// ---- pristine model / NIQE -------------------------------------------------

struct PatchOptions {
  size_t patch_size = 96;
  double sharpness_fraction = 0.75;
  double ridge = 1e-6;
};

struct PristineModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Per-patch 36-d features over the non-overlapping patch grid. With
// `select_sharp`, only patches whose mean local sigma reaches
// sharpness_fraction of the frame's sharpest patch are kept. Patches whose
// coefficients cannot be fitted (flat content) are skipped.
std::vector<SpatialNssVector> PatchFeatures(const RealPlane& luma,
                                            const PatchOptions& options,
                                            bool select_sharp);

PristineModel FitPristineModel(std::span<const RealPlane> corpus,
                               const PatchOptions& options = {});

// sqrt(d^T ((cov1 + cov2) / 2)^+ d), d = mean1 - mean2, via a symmetric
// eigen pseudo-inverse.
double MahalanobisDistance(const Eigen::VectorXd& mean1,
                           const Eigen::MatrixXd& cov1,
                           const Eigen::VectorXd& mean2,
                           const Eigen::MatrixXd& cov2);

double NiqeScore(const RealPlane& luma, const PristineModel& model,
                 const PatchOptions& options = {});
double NiqeVideoScore(const media::FrameSequence& seq,
                      const PristineModel& model, size_t stride = 10,
                      const PatchOptions& options = {});

// "NIQE" | u32 dim | f64 mean[dim] | f64 cov[dim*dim], little endian.
std::vector<uint8_t> SerializePristineModel(const PristineModel& model);
PristineModel DeserializePristineModel(std::span<const uint8_t> bytes);
void SavePristineModel(const std::filesystem::path& path,
                       const PristineModel& model);
PristineModel LoadPristineModel(const std::filesystem::path& path);

// ---- temporal --------------------------------------------------------------

// One orthonormal Haar analysis step on an even-length signal.
void HaarStep(std::span<const double> in, std::span<double> approx,
              std::span<double> detail);

struct HaarTemporalCoefficients {
  // detail[l] holds level l+1 coefficients pooled over pixels and blocks.
  std::array<std::vector<double>, kTemporalLevels> detail;
  std::vector<double> approx;  // final level approximation
};

// Per-pixel 3-level Haar transform along time over non-overlapping blocks of
// 8 frames; trailing frames that do not fill a block are ignored.
HaarTemporalCoefficients HaarTemporal(std::span<const RealPlane> frames);

// Per level: (GGD alpha, GGD sigma, mean |coefficient|). A level whose
// coefficients are all zero encodes (0, 0, 0); a level with fewer than
// kMinFitSamples coefficients encodes alpha = 0.
TemporalNssVector TemporalNss(std::span<const RealPlane> frames);
TemporalNssVector TemporalNssVideo(const media::FrameSequence& seq);

}  // namespace vqalab::nss

#endif  // VQALAB_NSS_H_
