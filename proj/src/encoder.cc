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
#include <bit>
#include <cmath>

#include "vqalab/csv.h"
#include "vqalab/error.h"
#include "vqalab/moeva.h"
#include "vqalab/random.h"

namespace vqalab::moeva {
namespace {

constexpr double kInputScale = 1.0 / 64.0;
constexpr double kInputShift = 127.5 / 64.0;

enum Layer : size_t {
  kConv1W,
  kConv1B,
  kConv2W,
  kConv2B,
  kFcW,
  kFcB,
  kHead1W,
  kHead1B,
  kHead2W,
  kHead2B,
  kLayerCount,
};

struct LayerSpec {
  const char* name;
  std::vector<size_t> shape;
  size_t fan_in;  // 0 for biases
  double gain;
};

const std::vector<LayerSpec>& Layout() {
  static const std::vector<LayerSpec> layout = {
      {"conv1.w", {kConv1Channels, 3, 3, 3}, 27, 2.0},
      {"conv1.b", {kConv1Channels}, 0, 0},
      {"conv2.w", {kConv2Channels, kConv1Channels, 3, 3}, 9 * kConv1Channels, 2.0},
      {"conv2.b", {kConv2Channels}, 0, 0},
      {"fc.w", {kFeatureDim, kConv2Channels}, kConv2Channels, 1.0},
      {"fc.b", {kFeatureDim}, 0, 0},
      {"head1.w", {kHeadHidden, kFeatureDim}, kFeatureDim, 2.0},
      {"head1.b", {kHeadHidden}, 0, 0},
      {"head2.w", {kEmbeddingDim, kHeadHidden}, kHeadHidden, 1.0},
      {"head2.b", {kEmbeddingDim}, 0, 0},
  };
  return layout;
}

size_t Count(const std::vector<size_t>& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> AsMatrix(const Tensor& t) {
  return {t.values.data(), static_cast<Eigen::Index>(t.shape[0]),
          static_cast<Eigen::Index>(t.shape[1])};
}

Eigen::Map<RowMatrix> AsMatrix(Tensor& t) {
  return {t.values.data(), static_cast<Eigen::Index>(t.shape[0]),
          static_cast<Eigen::Index>(t.shape[1])};
}

Eigen::Map<const Eigen::VectorXd> AsVector(const Tensor& t) {
  return {t.values.data(), static_cast<Eigen::Index>(t.values.size())};
}

Eigen::Map<Eigen::VectorXd> AsVector(Tensor& t) {
  return {t.values.data(), static_cast<Eigen::Index>(t.values.size())};
}

// 3x3 zero-padded convolution on n x n planes, channel-major layout.
void ConvForward(const std::vector<double>& in, size_t cin, size_t n,
                 const Tensor& w, const Tensor& b, size_t cout,
                 std::vector<double>& out) {
  const size_t area = n * n;
  out.assign(cout * area, 0.0);
  for (size_t o = 0; o < cout; ++o) {
    double* dst = out.data() + o * area;
    std::fill(dst, dst + area, b.values[o]);
    for (size_t c = 0; c < cin; ++c) {
      const double* src = in.data() + c * area;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const double wv = w.values[((o * cin + c) * 3 + ky) * 3 + kx];
          const long dy = ky - 1;
          const long dx = kx - 1;
          const long ln = static_cast<long>(n);
          const long y0 = std::max(0L, -dy), y1 = std::min(ln, ln - dy);
          const long x0 = std::max(0L, -dx), x1 = std::min(ln, ln - dx);
          for (long y = y0; y < y1; ++y) {
            const double* s = src + (y + dy) * ln + dx;
            double* d = dst + y * ln;
            for (long x = x0; x < x1; ++x) d[x] += wv * s[x];
          }
        }
      }
    }
  }
}

void ConvBackward(const std::vector<double>& in, size_t cin, size_t n,
                  const Tensor& w, size_t cout, const std::vector<double>& dout,
                  Tensor& dw, Tensor& db, std::vector<double>* din) {
  const size_t area = n * n;
  if (din != nullptr) din->assign(cin * area, 0.0);
  for (size_t o = 0; o < cout; ++o) {
    const double* g = dout.data() + o * area;
    double gs = 0;
    for (size_t i = 0; i < area; ++i) gs += g[i];
    db.values[o] += gs;
    for (size_t c = 0; c < cin; ++c) {
      const double* src = in.data() + c * area;
      double* dsrc = din != nullptr ? din->data() + c * area : nullptr;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const size_t wi = ((o * cin + c) * 3 + ky) * 3 + kx;
          const double wv = w.values[wi];
          const long dy = ky - 1;
          const long dx = kx - 1;
          const long ln = static_cast<long>(n);
          const long y0 = std::max(0L, -dy), y1 = std::min(ln, ln - dy);
          const long x0 = std::max(0L, -dx), x1 = std::min(ln, ln - dx);
          double acc = 0;
          for (long y = y0; y < y1; ++y) {
            const double* s = src + (y + dy) * ln + dx;
            const double* gg = g + y * ln;
            for (long x = x0; x < x1; ++x) acc += gg[x] * s[x];
            if (dsrc != nullptr) {
              double* ds = dsrc + (y + dy) * ln + dx;
              for (long x = x0; x < x1; ++x) ds[x] += wv * gg[x];
            }
          }
          dw.values[wi] += acc;
        }
      }
    }
  }
}

void Relu(std::vector<double>& v) {
  for (double& x : v) x = std::max(0.0, x);
}

// 2x2 mean pooling of channel-major n x n planes.
std::vector<double> Pool(const std::vector<double>& in, size_t channels,
                         size_t n) {
  const size_t h = n / 2;
  std::vector<double> out(channels * h * h);
  for (size_t c = 0; c < channels; ++c) {
    const double* s = in.data() + c * n * n;
    double* d = out.data() + c * h * h;
    for (size_t y = 0; y < h; ++y) {
      for (size_t x = 0; x < h; ++x) {
        d[y * h + x] = 0.25 * (s[2 * y * n + 2 * x] + s[2 * y * n + 2 * x + 1] +
                               s[(2 * y + 1) * n + 2 * x] +
                               s[(2 * y + 1) * n + 2 * x + 1]);
      }
    }
  }
  return out;
}

// Gradient through Pool followed by the rectifier whose output was `act`.
std::vector<double> UnpoolRelu(const std::vector<double>& dpool,
                               const std::vector<double>& act, size_t channels,
                               size_t n) {
  const size_t h = n / 2;
  std::vector<double> out(channels * n * n);
  for (size_t c = 0; c < channels; ++c) {
    for (size_t y = 0; y < n; ++y) {
      for (size_t x = 0; x < n; ++x) {
        const size_t i = c * n * n + y * n + x;
        out[i] = act[i] > 0 ? 0.25 * dpool[c * h * h + (y / 2) * h + x / 2] : 0.0;
      }
    }
  }
  return out;
}

Eigen::VectorXd Normalize(const Eigen::VectorXd& v) {
  return v / std::sqrt(v.squaredNorm() + kNormEpsilon);
}

Eigen::VectorXd NormalizeBackward(const Eigen::VectorXd& v,
                                  const Eigen::VectorXd& grad) {
  const double s = std::sqrt(v.squaredNorm() + kNormEpsilon);
  return grad / s - v * (v.dot(grad) / (s * s * s));
}

void CheckCrop(const RGBFrame& crop, size_t patch) {
  if (patch == 0 || patch % 4 != 0) {
    throw Error(ErrorCode::kShapeMismatch, "patch size must be a multiple of 4");
  }
  if (crop.rows() != patch || crop.cols() != patch) {
    throw Error(ErrorCode::kShapeMismatch,
                "crop is " + std::to_string(crop.rows()) + "x" +
                    std::to_string(crop.cols()) + ", expected " +
                    std::to_string(patch));
  }
}

// Runs the backbone up to the 128-d pre-normalization output.
void BackboneForward(const EncoderParams& params, const RGBFrame& crop,
                     size_t patch, EncoderTape& t) {
  ValidateEncoder(params);
  CheckCrop(crop, patch);
  const auto& p = params.tensors;
  const size_t area = patch * patch;
  t.size = patch;
  t.input.resize(3 * area);
  for (size_t i = 0; i < area; ++i) {
    t.input[i] = crop.r.data()[i] * kInputScale - kInputShift;
    t.input[area + i] = crop.g.data()[i] * kInputScale - kInputShift;
    t.input[2 * area + i] = crop.b.data()[i] * kInputScale - kInputShift;
  }
  ConvForward(t.input, 3, patch, p[kConv1W], p[kConv1B], kConv1Channels, t.act1);
  Relu(t.act1);
  t.pool1 = Pool(t.act1, kConv1Channels, patch);
  const size_t half = patch / 2;
  ConvForward(t.pool1, kConv1Channels, half, p[kConv2W], p[kConv2B],
              kConv2Channels, t.act2);
  Relu(t.act2);
  t.pool2 = Pool(t.act2, kConv2Channels, half);
  const size_t quarter_area = (patch / 4) * (patch / 4);
  t.gap.resize(kConv2Channels);
  for (size_t c = 0; c < kConv2Channels; ++c) {
    double s = 0;
    for (size_t i = 0; i < quarter_area; ++i) s += t.pool2[c * quarter_area + i];
    t.gap(c) = s / static_cast<double>(quarter_area);
  }
  t.feature = AsMatrix(p[kFcW]) * t.gap + AsVector(p[kFcB]);
}

void CheckSameLayout(const EncoderParams& a, const EncoderParams& b) {
  if (a.tensors.size() != b.tensors.size()) {
    throw Error(ErrorCode::kShapeMismatch, "parameter lists differ in length");
  }
  for (size_t i = 0; i < a.tensors.size(); ++i) {
    if (a.tensors[i].shape != b.tensors[i].shape ||
        a.tensors[i].values.size() != b.tensors[i].values.size()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "tensor " + a.tensors[i].name + " differs in shape");
    }
  }
}

constexpr uint32_t kFormatVersion = 1;

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void PutF64(std::vector<uint8_t>& out, double v) {
  const auto bits = std::bit_cast<uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(bits >> (8 * i)));
}

uint64_t GetLE(std::span<const uint8_t> bytes, size_t& pos, int width) {
  if (pos + static_cast<size_t>(width) > bytes.size()) {
    throw Error(ErrorCode::kSchemaError, "encoder file truncated");
  }
  uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<uint64_t>(bytes[pos + static_cast<size_t>(i)]) << (8 * i);
  }
  pos += static_cast<size_t>(width);
  return v;
}

void PutParams(std::vector<uint8_t>& out, const EncoderParams& params) {
  PutU32(out, static_cast<uint32_t>(params.tensors.size()));
  for (const Tensor& t : params.tensors) {
    PutU32(out, static_cast<uint32_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    PutU32(out, static_cast<uint32_t>(t.shape.size()));
    for (size_t d : t.shape) PutU32(out, static_cast<uint32_t>(d));
    for (double v : t.values) PutF64(out, v);
  }
}

EncoderParams GetParams(std::span<const uint8_t> bytes, size_t& pos) {
  EncoderParams params;
  const auto count = GetLE(bytes, pos, 4);
  if (count > 1024) throw Error(ErrorCode::kSchemaError, "implausible layer count");
  for (uint64_t i = 0; i < count; ++i) {
    Tensor t;
    const auto len = GetLE(bytes, pos, 4);
    if (pos + len > bytes.size()) {
      throw Error(ErrorCode::kSchemaError, "encoder file truncated");
    }
    t.name.assign(bytes.begin() + pos, bytes.begin() + pos + len);
    pos += len;
    const auto rank = GetLE(bytes, pos, 4);
    if (rank > 8) throw Error(ErrorCode::kSchemaError, "implausible tensor rank");
    for (uint64_t r = 0; r < rank; ++r) t.shape.push_back(GetLE(bytes, pos, 4));
    const size_t n = Count(t.shape);
    if (n > (bytes.size() - pos) / 8) {
      throw Error(ErrorCode::kSchemaError, "encoder file truncated");
    }
    t.values.resize(n);
    for (double& v : t.values) v = std::bit_cast<double>(GetLE(bytes, pos, 8));
    params.tensors.push_back(std::move(t));
  }
  return params;
}

}  // namespace

size_t EncoderParams::parameter_count() const {
  size_t n = 0;
  for (const Tensor& t : tensors) n += t.values.size();
  return n;
}

EncoderParams InitEncoder(uint64_t seed) {
  std::mt19937_64 rng(seed);
  EncoderParams params;
  for (const LayerSpec& spec : Layout()) {
    Tensor t{spec.name, spec.shape, std::vector<double>(Count(spec.shape), 0.0)};
    if (spec.fan_in > 0) {
      const double sd = std::sqrt(spec.gain / static_cast<double>(spec.fan_in));
      for (double& v : t.values) v = sd * rng::Normal01(rng);
    }
    params.tensors.push_back(std::move(t));
  }
  return params;
}

EncoderParams ZerosLike(const EncoderParams& params) {
  EncoderParams out = params;
  for (Tensor& t : out.tensors) std::fill(t.values.begin(), t.values.end(), 0.0);
  return out;
}

void ValidateEncoder(const EncoderParams& params) {
  const auto& layout = Layout();
  if (params.tensors.size() != layout.size()) {
    throw Error(ErrorCode::kShapeMismatch, "encoder must have " +
                                               std::to_string(layout.size()) +
                                               " tensors");
  }
  for (size_t i = 0; i < layout.size(); ++i) {
    const Tensor& t = params.tensors[i];
    if (t.name != layout[i].name || t.shape != layout[i].shape ||
        t.values.size() != Count(t.shape)) {
      throw Error(ErrorCode::kShapeMismatch,
                  "tensor " + std::to_string(i) + " is not " + layout[i].name);
    }
  }
}

Eigen::VectorXd Embed(const EncoderParams& params, const RGBFrame& crop,
                      size_t patch, EncoderTape* tape) {
  EncoderTape local;
  EncoderTape& t = tape != nullptr ? *tape : local;
  BackboneForward(params, crop, patch, t);
  const auto& p = params.tensors;
  t.hidden = (AsMatrix(p[kHead1W]) * t.feature + AsVector(p[kHead1B]))
                 .cwiseMax(0.0);
  t.head_out = AsMatrix(p[kHead2W]) * t.hidden + AsVector(p[kHead2B]);
  return Normalize(t.head_out);
}

Eigen::VectorXd BackboneFeature(const EncoderParams& params,
                                const RGBFrame& crop, size_t patch) {
  EncoderTape t;
  BackboneForward(params, crop, patch, t);
  return Normalize(t.feature);
}

void Backward(const EncoderParams& params, const EncoderTape& tape,
              const Eigen::VectorXd& d_embedding, EncoderParams* grads) {
  CheckSameLayout(params, *grads);
  const auto& p = params.tensors;
  auto& g = grads->tensors;
  const size_t patch = tape.size;
  const size_t half = patch / 2;
  const size_t quarter = patch / 4;

  const Eigen::VectorXd dz = NormalizeBackward(tape.head_out, d_embedding);
  AsMatrix(g[kHead2W]) += dz * tape.hidden.transpose();
  AsVector(g[kHead2B]) += dz;
  Eigen::VectorXd dhidden = AsMatrix(p[kHead2W]).transpose() * dz;
  for (Eigen::Index i = 0; i < dhidden.size(); ++i) {
    if (tape.hidden(i) <= 0) dhidden(i) = 0;
  }
  AsMatrix(g[kHead1W]) += dhidden * tape.feature.transpose();
  AsVector(g[kHead1B]) += dhidden;
  const Eigen::VectorXd dfeature = AsMatrix(p[kHead1W]).transpose() * dhidden;
  AsMatrix(g[kFcW]) += dfeature * tape.gap.transpose();
  AsVector(g[kFcB]) += dfeature;
  const Eigen::VectorXd dgap = AsMatrix(p[kFcW]).transpose() * dfeature;

  const size_t qa = quarter * quarter;
  std::vector<double> dpool2(kConv2Channels * qa);
  for (size_t c = 0; c < kConv2Channels; ++c) {
    std::fill_n(dpool2.begin() + c * qa, qa, dgap(c) / static_cast<double>(qa));
  }
  const std::vector<double> dz2 = UnpoolRelu(dpool2, tape.act2, kConv2Channels, half);
  std::vector<double> dpool1;
  ConvBackward(tape.pool1, kConv1Channels, half, p[kConv2W], kConv2Channels, dz2,
               g[kConv2W], g[kConv2B], &dpool1);
  const std::vector<double> dz1 =
      UnpoolRelu(dpool1, tape.act1, kConv1Channels, patch);
  ConvBackward(tape.input, 3, patch, p[kConv1W], kConv1Channels, dz1, g[kConv1W],
               g[kConv1B], nullptr);
}

void MomentumUpdate(EncoderPair& pair) {
  if (!(pair.m >= 0.0 && pair.m < 1.0)) {
    throw Error(ErrorCode::kInvalidMomentum,
                "momentum must lie in [0, 1), got " + std::to_string(pair.m));
  }
  CheckSameLayout(pair.online, pair.momentum);
  const double m = pair.m;
  for (size_t i = 0; i < pair.online.tensors.size(); ++i) {
    auto& target = pair.momentum.tensors[i].values;
    const auto& source = pair.online.tensors[i].values;
    for (size_t j = 0; j < target.size(); ++j) {
      target[j] = m * target[j] + (1.0 - m) * source[j];
    }
  }
}

double ParameterDistance(const EncoderParams& a, const EncoderParams& b) {
  CheckSameLayout(a, b);
  double s = 0;
  for (size_t i = 0; i < a.tensors.size(); ++i) {
    for (size_t j = 0; j < a.tensors[i].values.size(); ++j) {
      const double d = a.tensors[i].values[j] - b.tensors[i].values[j];
      s += d * d;
    }
  }
  return std::sqrt(s);
}

std::vector<uint8_t> SerializeEncoderPair(const EncoderPair& pair) {
  std::vector<uint8_t> out = {'M', 'O', 'E', 'V'};
  PutU32(out, kFormatVersion);
  PutF64(out, pair.m);
  PutU32(out, static_cast<uint32_t>(pair.patch));
  PutParams(out, pair.online);
  PutParams(out, pair.momentum);
  return out;
}

EncoderPair DeserializeEncoderPair(std::span<const uint8_t> bytes) {
  if (bytes.size() < 8 || bytes[0] != 'M' || bytes[1] != 'O' ||
      bytes[2] != 'E' || bytes[3] != 'V') {
    throw Error(ErrorCode::kSchemaError, "not a MOEV encoder file");
  }
  size_t pos = 4;
  const auto version = GetLE(bytes, pos, 4);
  if (version != kFormatVersion) {
    throw Error(ErrorCode::kSchemaError,
                "unsupported encoder version " + std::to_string(version));
  }
  EncoderPair pair;
  pair.m = std::bit_cast<double>(GetLE(bytes, pos, 8));
  pair.patch = GetLE(bytes, pos, 4);
  pair.online = GetParams(bytes, pos);
  pair.momentum = GetParams(bytes, pos);
  if (pos != bytes.size()) {
    throw Error(ErrorCode::kSchemaError, "trailing bytes in encoder file");
  }
  try {
    ValidateEncoder(pair.online);
    ValidateEncoder(pair.momentum);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaError, e.what());
  }
  return pair;
}

void SaveEncoderPair(const std::filesystem::path& path, const EncoderPair& pair) {
  const auto bytes = SerializeEncoderPair(pair);
  io::WriteFileAtomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                             bytes.size()));
}

EncoderPair LoadEncoderPair(const std::filesystem::path& path) {
  const std::string data = io::ReadFile(path);
  return DeserializeEncoderPair(
      std::span(reinterpret_cast<const uint8_t*>(data.data()), data.size()));
}

}  // namespace vqalab::moeva
