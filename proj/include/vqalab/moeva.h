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

#ifndef VQALAB_MOEVA_H_
#define VQALAB_MOEVA_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "vqalab/evaluation.h"
#include "vqalab/media_io.h"

namespace vqalab::moeva {

using media::RGBFrame;

// ---- augmentation bank -----------------------------------------------------

enum class AugmentationKind {
  kGaussianBlur,
  kLensBlur,
  kMotionBlurH,
  kMotionBlurV,
  kGaussianNoise,
  kImpulseNoise,
  kMultiplicativeNoise,
  kBlockQuantization,
  kColorQuantization,
  kPixelate,
  kBilinearDownUp,
  kNearestDownUp,
  kBrightnessUp,
  kBrightnessDown,
  kContrastUp,
  kContrastDown,
  kGammaHigh,
  kGammaLow,
  kSaturationUp,
  kSaturationDown,
  kWhiteBalanceWarm,
  kWhiteBalanceCool,
  kOversharpen,
  kVignette,
  kChromaShift,
};

inline constexpr size_t kAugmentationKinds = 25;
inline constexpr int kAugmentationLevels = 5;
inline constexpr size_t kMinAugmentSize = 64;

std::string_view AugmentationKindName(AugmentationKind kind);

struct AugmentationSpec {
  AugmentationKind kind = AugmentationKind::kGaussianBlur;
  int level = 1;  // 1 (mildest) .. 5
  uint64_t seed = 0;

  bool operator==(const AugmentationSpec&) const = default;
};

// All 125 (kind, level) pairs in kind-major order, seed 0.
std::vector<AugmentationSpec> BuildAugmentationBank();

// Output samples are rounded to integers and clamped to [0, 255].
// Throws kImageTooSmall below 64x64.
RGBFrame ApplyAugmentation(const RGBFrame& img, const AugmentationSpec& spec);

// ---- chunks and crops ------------------------------------------------------

struct Chunk {
  RGBFrame source;
  std::vector<RGBFrame> distorted;
  std::vector<AugmentationSpec> specs;

  size_t n() const { return distorted.size(); }
  // Index 0 is the source, m >= 1 the m-th distorted image.
  const RGBFrame& image(size_t m) const {
    return m == 0 ? source : distorted[m - 1];
  }
};

// n distinct (kind, level) pairs without replacement, each with its own seed.
// Throws kInvalidChunkSize unless 1 <= n <= 125.
Chunk MakeChunk(const RGBFrame& frame, size_t n, std::mt19937_64& rng);

struct CropWindow {
  size_t top = 0;
  size_t left = 0;
  size_t size = 0;

  bool operator==(const CropWindow&) const = default;
};

struct CropPair {
  CropWindow window1;
  CropWindow window2;
  double ola = 0;
};

// Intersection area over size^2 for two equal-size windows.
double OverlapFraction(const CropWindow& a, const CropWindow& b);

inline constexpr int kMaxCropAttempts = 10000;

// window1 uniform; window2 offset uniform in the band |d| <= P (1 - ola_min)
// per axis, clipped to the frame's slack, rejected until the overlap lies in [ola_min, ola_max].
// Throws kInfeasible when no placement can satisfy the bounds and
// kAttemptsExhausted after kMaxCropAttempts rejections.
CropPair OlaCrop(size_t rows, size_t cols, size_t patch, double ola_min,
                 double ola_max, std::mt19937_64& rng);

RGBFrame Crop(const RGBFrame& img, const CropWindow& window);

struct ChunkCrops {
  std::vector<RGBFrame> crop1;  // index m as in Chunk::image
  std::vector<RGBFrame> crop2;
};

ChunkCrops CropChunk(const Chunk& chunk, const CropPair& crops);

// ---- pairing ---------------------------------------------------------------

enum class CropSource { kCrop1, kCrop2, kCross };

struct CropRef {
  CropSource source = CropSource::kCrop1;
  size_t index = 0;

  auto operator<=>(const CropRef&) const = default;
};

struct PairedAnchor {
  CropRef anchor;
  CropRef positive;
  std::vector<CropRef> negatives;
};

struct PairBatch {
  std::vector<PairedAnchor> anchors;
  double temperature = 0.1;
};

// For every image index m of a chunk holding `images` = n + 1 images:
// anchor crop1[m], positive crop2[m], negatives crop1/crop2 of every l != m
// followed by every cross-content crop. Throws kEmptyNegatives when an anchor
// would have nothing to contrast against.
PairBatch GeneratePairs(size_t images, size_t cross_count,
                        double temperature = 0.1);

// ---- InfoNCE ---------------------------------------------------------------

struct AnchorLoss {
  double loss = 0;
  Eigen::VectorXd d_anchor;
  Eigen::VectorXd d_positive;
  std::vector<Eigen::VectorXd> d_negatives;
};

// -log(exp(q.k+/t) / (exp(q.k+/t) + sum exp(q.k-/t))) via log-sum-exp.
// Throws kNonPositiveTemperature and kEmptyNegatives.
AnchorLoss InfoNceAnchor(const Eigen::VectorXd& q, const Eigen::VectorXd& k_pos,
                         std::span<const Eigen::VectorXd> k_neg,
                         double temperature);

struct InfoNceResult {
  double loss = 0;  // mean over anchors
  std::vector<AnchorLoss> anchors;  // gradients already scaled by 1/count
};

// `lookup` maps a CropRef to its embedding.
template <typename Lookup>
InfoNceResult InfoNceLoss(const PairBatch& batch, Lookup&& lookup);

// ---- encoder ---------------------------------------------------------------

inline constexpr size_t kConv1Channels = 16;
inline constexpr size_t kConv2Channels = 32;
inline constexpr size_t kFeatureDim = 128;
inline constexpr size_t kHeadHidden = 128;
inline constexpr size_t kEmbeddingDim = 64;
inline constexpr double kNormEpsilon = 1e-12;

struct Tensor {
  std::string name;
  std::vector<size_t> shape;
  std::vector<double> values;

  bool operator==(const Tensor&) const = default;
};

// 3x3 convolutions with rectifiers and 2x2 mean pooling. Fixed layer list: conv1.w [16,3,3,3], conv1.b, conv2.w [32,16,3,3],
// conv2.b, fc.w [128,32], fc.b, head1.w [128,128], head1.b, head2.w [64,128],
// head2.b.
struct EncoderParams {
  std::vector<Tensor> tensors;

  size_t parameter_count() const;
  bool operator==(const EncoderParams&) const = default;
};

// He-normal weights, zero biases.
EncoderParams InitEncoder(uint64_t seed);
EncoderParams ZerosLike(const EncoderParams& params);
// Throws kShapeMismatch if the layer list is not the fixed layout.
void ValidateEncoder(const EncoderParams& params);

// Intermediate activations needed by the backward pass.
struct EncoderTape {
  size_t size = 0;
  std::vector<double> input, act1, pool1, act2, pool2;
  Eigen::VectorXd gap, feature, hidden, head_out;
};

// Crops are scaled to x / 255 - 0.5. The crop must be patch x patch with
// patch a positive multiple of 4 (kShapeMismatch otherwise).
Eigen::VectorXd Embed(const EncoderParams& params, const RGBFrame& crop,
                      size_t patch, EncoderTape* tape = nullptr);

// Unit-normalized 128-d backbone output, used as the frame-level deep feature.
Eigen::VectorXd BackboneFeature(const EncoderParams& params,
                                const RGBFrame& crop, size_t patch);

// Accumulates dL/dtheta into `grads` given dL/d(embedding).
void Backward(const EncoderParams& params, const EncoderTape& tape,
              const Eigen::VectorXd& d_embedding, EncoderParams* grads);

struct EncoderPair {
  EncoderParams online;
  EncoderParams momentum;
  double m = 0.99;
  size_t patch = 64;
};

// theta_M <- m theta_M + (1 - m) theta_O. Throws kInvalidMomentum unless
// 0 <= m < 1, kShapeMismatch on incompatible lists.
void MomentumUpdate(EncoderPair& pair);

double ParameterDistance(const EncoderParams& a, const EncoderParams& b);

// ---- pre-training ----------------------------------------------------------

struct PretrainConfig {
  double temperature = 0.1;
  double momentum = 0.99;
  double learning_rate = 0.05;
  size_t batch = 4;  // chunks per step
  size_t steps = 1000;
  size_t chunk_size = 4;
  size_t patch = 64;
  double ola_min = 0.25;
  double ola_max = 0.75;
  size_t frame_stride = 15;
  uint64_t seed = 0;
};

struct PretrainResult {
  EncoderPair encoders;
  std::vector<double> loss_trace;
};

// Frames 0, stride, 2 * stride, ... of every sequence, as RGB.
std::vector<RGBFrame> SampleCorpusFrames(
    std::span<const media::FrameSequence> corpus, size_t stride);

// One step's batch: `batch` chunks, their crops, and per-chunk pairings whose
// cross-content crops are the crop2 images of the other chunks.
struct StepBatch {
  std::vector<ChunkCrops> crops;
  std::vector<PairBatch> pairs;
};

StepBatch AssembleBatch(std::span<const RGBFrame> frames,
                        const PretrainConfig& config, std::mt19937_64& rng);

// Loss of a batch: online encoder embeds anchors, momentum encoder embeds
// positives and negatives. With `grads`, accumulates the online gradient.
double BatchLoss(const EncoderPair& pair, const StepBatch& batch,
                 EncoderParams* grads);

// Throws kInsufficientData if the pool holds fewer than `batch` frames.
PretrainResult Pretrain(std::span<const RGBFrame> frames,
                        const PretrainConfig& config);

struct Separation {
  double positive_cosine = 0;
  double negative_cosine = 0;
};

// Mean anchor/positive and anchor/negative cosine over freshly sampled chunks.
Separation MeasureSeparation(const EncoderPair& pair,
                             std::span<const RGBFrame> frames,
                             const PretrainConfig& config, size_t batches,
                             uint64_t seed);

// ---- video features --------------------------------------------------------

inline constexpr size_t kMoevaFeatureSize = kFeatureDim + 36 + 9;

// Mean BackboneFeature of the centered patch x patch crop of frames 0,
// stride, 2 * stride, ...
Eigen::VectorXd VideoEmbedding(const media::FrameSequence& seq,
                               const EncoderParams& params, size_t patch,
                               size_t stride = 10);

// [deep(128) | spatial NSS(36) | temporal NSS(9)].
Eigen::VectorXd MoevaFeatures(const media::FrameSequence& seq,
                              const EncoderParams& params, size_t patch,
                              size_t stride = 10);

// Throws kLayoutMismatch when the feature length differs from the layout the
// regressor was trained on.
double MoevaPredict(const Eigen::VectorXd& features,
                    const eval::KernelRegressor& regressor);
Eigen::VectorXd MoevaPredict(const Eigen::MatrixXd& features,
                             const eval::KernelRegressor& regressor);

// ---- serialization ---------------------------------------------------------

std::vector<uint8_t> SerializeEncoderPair(const EncoderPair& pair);
EncoderPair DeserializeEncoderPair(std::span<const uint8_t> bytes);
void SaveEncoderPair(const std::filesystem::path& path, const EncoderPair& pair);
EncoderPair LoadEncoderPair(const std::filesystem::path& path);

// ---- template definitions --------------------------------------------------

template <typename Lookup>
InfoNceResult InfoNceLoss(const PairBatch& batch, Lookup&& lookup) {
  InfoNceResult result;
  const double scale = 1.0 / static_cast<double>(batch.anchors.size());
  for (const PairedAnchor& a : batch.anchors) {
    std::vector<Eigen::VectorXd> negatives;
    negatives.reserve(a.negatives.size());
    for (const CropRef& ref : a.negatives) negatives.push_back(lookup(ref));
    AnchorLoss l = InfoNceAnchor(lookup(a.anchor), lookup(a.positive),
                                 negatives, batch.temperature);
    result.loss += l.loss * scale;
    l.d_anchor *= scale;
    l.d_positive *= scale;
    for (Eigen::VectorXd& g : l.d_negatives) g *= scale;
    result.anchors.push_back(std::move(l));
  }
  return result;
}

}  // namespace vqalab::moeva

#endif  // VQALAB_MOEVA_H_
