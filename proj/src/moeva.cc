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
#include <cmath>
#include <numeric>

#include "vqalab/error.h"
#include "vqalab/moeva.h"
#include "vqalab/nss.h"
#include "vqalab/random.h"

namespace vqalab::moeva {
namespace {

bool Fits(long top, long left, size_t rows, size_t cols, size_t patch) {
  return top >= 0 && left >= 0 && static_cast<size_t>(top) + patch <= rows &&
         static_cast<size_t>(left) + patch <= cols;
}

double Cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(b) / std::max(1e-300, a.norm() * b.norm());
}

// Embeddings of one batch: online anchors (with tapes) and momentum keys.
struct BatchEmbeddings {
  std::vector<std::vector<Eigen::VectorXd>> anchor;
  std::vector<std::vector<EncoderTape>> tapes;
  std::vector<std::vector<Eigen::VectorXd>> key1;
  std::vector<std::vector<Eigen::VectorXd>> key2;
  std::vector<std::vector<Eigen::VectorXd>> cross;  // per chunk, in ref order
};

BatchEmbeddings EmbedBatch(const EncoderPair& pair, const StepBatch& batch,
                           bool keep_tapes) {
  BatchEmbeddings e;
  const size_t chunks = batch.crops.size();
  e.anchor.resize(chunks);
  e.tapes.resize(chunks);
  e.key1.resize(chunks);
  e.key2.resize(chunks);
  e.cross.resize(chunks);
  for (size_t b = 0; b < chunks; ++b) {
    const ChunkCrops& c = batch.crops[b];
    e.tapes[b].resize(keep_tapes ? c.crop1.size() : 0);
    for (size_t m = 0; m < c.crop1.size(); ++m) {
      e.anchor[b].push_back(Embed(pair.online, c.crop1[m], pair.patch,
                                  keep_tapes ? &e.tapes[b][m] : nullptr));
      e.key1[b].push_back(Embed(pair.momentum, c.crop1[m], pair.patch));
      e.key2[b].push_back(Embed(pair.momentum, c.crop2[m], pair.patch));
    }
  }
  for (size_t b = 0; b < chunks; ++b) {
    for (size_t j = 0; j < chunks; ++j) {
      if (j == b) continue;
      for (const auto& k : e.key2[j]) e.cross[b].push_back(k);
    }
  }
  return e;
}

const Eigen::VectorXd& Key(const BatchEmbeddings& e, size_t b,
                           const CropRef& ref) {
  switch (ref.source) {
    case CropSource::kCrop1:
      return e.key1[b][ref.index];
    case CropSource::kCrop2:
      return e.key2[b][ref.index];
    case CropSource::kCross:
      break;
  }
  return e.cross[b][ref.index];
}

}  // namespace

Chunk MakeChunk(const RGBFrame& frame, size_t n, std::mt19937_64& rng) {
  const size_t bank_size = kAugmentationKinds * kAugmentationLevels;
  if (n < 1 || n > bank_size) {
    throw Error(ErrorCode::kInvalidChunkSize,
                "chunk size must be 1..125, got " + std::to_string(n));
  }
  std::vector<AugmentationSpec> bank = BuildAugmentationBank();
  for (size_t i = 0; i < n; ++i) {
    std::swap(bank[i], bank[i + rng::UniformIndex(rng, bank_size - i)]);
  }
  Chunk chunk;
  chunk.source = frame;
  for (size_t i = 0; i < n; ++i) {
    AugmentationSpec spec = bank[i];
    spec.seed = rng();
    chunk.distorted.push_back(ApplyAugmentation(frame, spec));
    chunk.specs.push_back(spec);
  }
  return chunk;
}

double OverlapFraction(const CropWindow& a, const CropWindow& b) {
  const auto span = [](size_t p, size_t q, size_t size) -> double {
    const size_t lo = std::max(p, q);
    const size_t hi = std::min(p + size, q + size);
    return hi > lo ? static_cast<double>(hi - lo) : 0.0;
  };
  const double size = static_cast<double>(a.size);
  return span(a.top, b.top, a.size) * span(a.left, b.left, a.size) /
         (size * size);
}

CropPair OlaCrop(size_t rows, size_t cols, size_t patch, double ola_min,
                 double ola_max, std::mt19937_64& rng) {
  if (!(ola_min >= 0.0 && ola_min < ola_max && ola_max <= 1.0)) {
    throw Error(ErrorCode::kInfeasible, "overlap bounds must satisfy 0 <= min < max <= 1");
  }
  if (patch == 0 || patch > rows || patch > cols) {
    throw Error(ErrorCode::kInfeasible, "patch does not fit in the frame");
  }
  const double area = static_cast<double>(patch * patch);
  const auto in_bounds = [&](double ola) { return ola >= ola_min && ola <= ola_max; };
  bool feasible = false;
  for (size_t dy = 0; dy <= std::min(rows - patch, patch) && !feasible; ++dy) {
    for (size_t dx = 0; dx <= std::min(cols - patch, patch); ++dx) {
      if (in_bounds(static_cast<double>((patch - dy) * (patch - dx)) / area)) {
        feasible = true;
        break;
      }
    }
  }
  if (!feasible) {
    throw Error(ErrorCode::kInfeasible, "no window placement meets the overlap bounds");
  }
  const long band = static_cast<long>(std::floor(patch * (1.0 - ola_min)));
  const long band_y = std::min(band, static_cast<long>(rows - patch));
  const long band_x = std::min(band, static_cast<long>(cols - patch));
  for (int attempt = 0; attempt < kMaxCropAttempts; ++attempt) {
    CropWindow w1{rng::UniformIndex(rng, rows - patch + 1),
                  rng::UniformIndex(rng, cols - patch + 1), patch};
    const long dy =
        static_cast<long>(rng::UniformIndex(rng, 2 * band_y + 1)) - band_y;
    const long dx =
        static_cast<long>(rng::UniformIndex(rng, 2 * band_x + 1)) - band_x;
    const long top = static_cast<long>(w1.top) + dy;
    const long left = static_cast<long>(w1.left) + dx;
    if (!Fits(top, left, rows, cols, patch)) continue;
    CropWindow w2{static_cast<size_t>(top), static_cast<size_t>(left), patch};
    const double ola = OverlapFraction(w1, w2);
    if (in_bounds(ola)) return {w1, w2, ola};
  }
  throw Error(ErrorCode::kAttemptsExhausted, "no crop pair within 10000 attempts");
}

RGBFrame Crop(const RGBFrame& img, const CropWindow& w) {
  if (w.top + w.size > img.rows() || w.left + w.size > img.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "crop window outside the frame");
  }
  RGBFrame out(w.size, w.size);
  for (size_t y = 0; y < w.size; ++y) {
    for (size_t x = 0; x < w.size; ++x) {
      out.r(y, x) = img.r(w.top + y, w.left + x);
      out.g(y, x) = img.g(w.top + y, w.left + x);
      out.b(y, x) = img.b(w.top + y, w.left + x);
    }
  }
  return out;
}

ChunkCrops CropChunk(const Chunk& chunk, const CropPair& crops) {
  ChunkCrops out;
  for (size_t m = 0; m <= chunk.n(); ++m) {
    out.crop1.push_back(Crop(chunk.image(m), crops.window1));
    out.crop2.push_back(Crop(chunk.image(m), crops.window2));
  }
  return out;
}

PairBatch GeneratePairs(size_t images, size_t cross_count, double temperature) {
  if (images <= 1 && cross_count == 0) {
    throw Error(ErrorCode::kEmptyNegatives, "chunk has nothing to contrast");
  }
  PairBatch batch;
  batch.temperature = temperature;
  for (size_t m = 0; m < images; ++m) {
    PairedAnchor a;
    a.anchor = {CropSource::kCrop1, m};
    a.positive = {CropSource::kCrop2, m};
    for (size_t l = 0; l < images; ++l) {
      if (l == m) continue;
      a.negatives.push_back({CropSource::kCrop1, l});
      a.negatives.push_back({CropSource::kCrop2, l});
    }
    for (size_t j = 0; j < cross_count; ++j) {
      a.negatives.push_back({CropSource::kCross, j});
    }
    batch.anchors.push_back(std::move(a));
  }
  return batch;
}

AnchorLoss InfoNceAnchor(const Eigen::VectorXd& q, const Eigen::VectorXd& k_pos,
                         std::span<const Eigen::VectorXd> k_neg,
                         double temperature) {
  if (!(temperature > 0)) {
    throw Error(ErrorCode::kNonPositiveTemperature, "temperature must be positive");
  }
  if (k_neg.empty()) throw Error(ErrorCode::kEmptyNegatives, "no negatives");
  const size_t n = k_neg.size();
  std::vector<double> logits(n + 1);
  logits[0] = q.dot(k_pos) / temperature;
  for (size_t j = 0; j < n; ++j) logits[j + 1] = q.dot(k_neg[j]) / temperature;
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (double s : logits) sum += std::exp(s - top);
  const double lse = top + std::log(sum);

  AnchorLoss out;
  out.loss = lse - logits[0];
  std::vector<double> p(n + 1);
  for (size_t i = 0; i <= n; ++i) p[i] = std::exp(logits[i] - lse);
  out.d_anchor = (p[0] - 1.0) * k_pos;
  for (size_t j = 0; j < n; ++j) out.d_anchor += p[j + 1] * k_neg[j];
  out.d_anchor /= temperature;
  out.d_positive = ((p[0] - 1.0) / temperature) * q;
  for (size_t j = 0; j < n; ++j) {
    out.d_negatives.push_back((p[j + 1] / temperature) * q);
  }
  return out;
}

std::vector<RGBFrame> SampleCorpusFrames(
    std::span<const media::FrameSequence> corpus, size_t stride) {
  std::vector<RGBFrame> frames;
  for (const auto& seq : corpus) {
    const media::FrameSequence sampled = media::SubsampleFrames(seq, stride);
    for (const auto& f : sampled.frames) frames.push_back(media::ToRgb(f));
  }
  return frames;
}

StepBatch AssembleBatch(std::span<const RGBFrame> frames,
                        const PretrainConfig& config, std::mt19937_64& rng) {
  if (frames.size() < config.batch || config.batch == 0) {
    throw Error(ErrorCode::kInsufficientData,
                "corpus holds " + std::to_string(frames.size()) +
                    " frames, batch needs " + std::to_string(config.batch));
  }
  std::vector<size_t> order(frames.size());
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = 0; i < config.batch; ++i) {
    std::swap(order[i], order[i + rng::UniformIndex(rng, order.size() - i)]);
  }
  StepBatch batch;
  for (size_t b = 0; b < config.batch; ++b) {
    const RGBFrame& frame = frames[order[b]];
    const Chunk chunk = MakeChunk(frame, config.chunk_size, rng);
    const CropPair crops = OlaCrop(frame.rows(), frame.cols(), config.patch,
                                   config.ola_min, config.ola_max, rng);
    batch.crops.push_back(CropChunk(chunk, crops));
  }
  const size_t images = config.chunk_size + 1;
  for (size_t b = 0; b < config.batch; ++b) {
    batch.pairs.push_back(GeneratePairs(images, (config.batch - 1) * images,
                                        config.temperature));
  }
  return batch;
}

double BatchLoss(const EncoderPair& pair, const StepBatch& batch,
                 EncoderParams* grads) {
  const BatchEmbeddings e = EmbedBatch(pair, batch, grads != nullptr);
  size_t count = 0;
  for (const PairBatch& p : batch.pairs) count += p.anchors.size();
  const double scale = 1.0 / static_cast<double>(count);
  double loss = 0;
  for (size_t b = 0; b < batch.pairs.size(); ++b) {
    for (const PairedAnchor& a : batch.pairs[b].anchors) {
      std::vector<Eigen::VectorXd> negatives;
      negatives.reserve(a.negatives.size());
      for (const CropRef& ref : a.negatives) negatives.push_back(Key(e, b, ref));
      const AnchorLoss l =
          InfoNceAnchor(e.anchor[b][a.anchor.index], Key(e, b, a.positive),
                        negatives, batch.pairs[b].temperature);
      loss += l.loss * scale;
      if (grads != nullptr) {
        Backward(pair.online, e.tapes[b][a.anchor.index], l.d_anchor * scale,
                 grads);
      }
    }
  }
  return loss;
}

PretrainResult Pretrain(std::span<const RGBFrame> frames,
                        const PretrainConfig& config) {
  PretrainResult result;
  EncoderPair& pair = result.encoders;
  pair.m = config.momentum;
  pair.patch = config.patch;
  pair.online = InitEncoder(rng::DeriveSeed(config.seed, 0));
  pair.momentum = pair.online;
  if (!(pair.m >= 0.0 && pair.m < 1.0)) {
    throw Error(ErrorCode::kInvalidMomentum, "momentum must lie in [0, 1)");
  }
  if (frames.size() < config.batch || config.batch == 0) {
    throw Error(ErrorCode::kInsufficientData, "corpus smaller than one batch");
  }
  std::mt19937_64 rng = rng::DerivedEngine(config.seed, 1);
  for (size_t step = 0; step < config.steps; ++step) {
    const StepBatch batch = AssembleBatch(frames, config, rng);
    EncoderParams grads = ZerosLike(pair.online);
    result.loss_trace.push_back(BatchLoss(pair, batch, &grads));
    for (size_t i = 0; i < grads.tensors.size(); ++i) {
      auto& w = pair.online.tensors[i].values;
      const auto& g = grads.tensors[i].values;
      for (size_t j = 0; j < w.size(); ++j) w[j] -= config.learning_rate * g[j];
    }
    MomentumUpdate(pair);
  }
  return result;
}

Separation MeasureSeparation(const EncoderPair& pair,
                             std::span<const RGBFrame> frames,
                             const PretrainConfig& config, size_t batches,
                             uint64_t seed) {
  std::mt19937_64 rng(seed);
  double pos = 0, neg = 0;
  size_t npos = 0, nneg = 0;
  for (size_t i = 0; i < batches; ++i) {
    const StepBatch batch = AssembleBatch(frames, config, rng);
    const BatchEmbeddings e = EmbedBatch(pair, batch, false);
    for (size_t b = 0; b < batch.pairs.size(); ++b) {
      for (const PairedAnchor& a : batch.pairs[b].anchors) {
        const Eigen::VectorXd& q = e.anchor[b][a.anchor.index];
        pos += Cosine(q, Key(e, b, a.positive));
        ++npos;
        for (const CropRef& ref : a.negatives) {
          neg += Cosine(q, Key(e, b, ref));
          ++nneg;
        }
      }
    }
  }
  return {pos / static_cast<double>(npos), neg / static_cast<double>(nneg)};
}

Eigen::VectorXd VideoEmbedding(const media::FrameSequence& seq,
                               const EncoderParams& params, size_t patch,
                               size_t stride) {
  const media::FrameSequence sampled = media::SubsampleFrames(seq, stride);
  if (sampled.frames.empty()) throw Error(ErrorCode::kEmptySequence, "no frames");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(kFeatureDim);
  for (const auto& f : sampled.frames) {
    const RGBFrame rgb = media::ToRgb(f);
    if (rgb.rows() < patch || rgb.cols() < patch) {
      throw Error(ErrorCode::kImageTooSmall, "frame smaller than the patch");
    }
    const CropWindow center{(rgb.rows() - patch) / 2, (rgb.cols() - patch) / 2,
                            patch};
    sum += BackboneFeature(params, Crop(rgb, center), patch);
  }
  return sum / static_cast<double>(sampled.frames.size());
}

Eigen::VectorXd MoevaFeatures(const media::FrameSequence& seq,
                              const EncoderParams& params, size_t patch,
                              size_t stride) {
  Eigen::VectorXd out(kMoevaFeatureSize);
  out.head(kFeatureDim) = VideoEmbedding(seq, params, patch, stride);
  const nss::SpatialNssVector s = nss::SpatialNssVideo(seq, stride);
  const nss::TemporalNssVector t = nss::TemporalNssVideo(seq);
  for (size_t i = 0; i < s.size(); ++i) out(kFeatureDim + i) = s[i];
  for (size_t i = 0; i < t.size(); ++i) out(kFeatureDim + s.size() + i) = t[i];
  return out;
}

double MoevaPredict(const Eigen::VectorXd& features,
                    const eval::KernelRegressor& regressor) {
  return MoevaPredict(Eigen::MatrixXd(features.transpose()), regressor)(0);
}

Eigen::VectorXd MoevaPredict(const Eigen::MatrixXd& features,
                             const eval::KernelRegressor& regressor) {
  if (features.cols() != regressor.support.cols()) {
    throw Error(ErrorCode::kLayoutMismatch,
                "features have " + std::to_string(features.cols()) +
                    " columns, regressor expects " +
                    std::to_string(regressor.support.cols()));
  }
  return regressor.Predict(features);
}

}  // namespace vqalab::moeva
