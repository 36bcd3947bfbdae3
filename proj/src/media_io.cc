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

#include "vqalab/media_io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string_view>

#include "vqalab/csv.h"
#include "vqalab/error.h"

namespace vqalab::media {
namespace {

constexpr std::string_view kSignature = "YUV4MPEG2";
constexpr std::string_view kFrameTag = "FRAME";

// BT.601 luma weights.
constexpr double kKr = 0.299;
constexpr double kKb = 0.114;
constexpr double kKg = 1.0 - kKr - kKb;

uint8_t ClampByte(double v) {
  return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

double Clamp255(double v) { return std::clamp(v, 0.0, 255.0); }

std::string_view ReadLine(std::span<const uint8_t> bytes, size_t& pos,
                          bool& terminated) {
  const size_t start = pos;
  while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
  terminated = pos < bytes.size();
  std::string_view line(reinterpret_cast<const char*>(bytes.data()) + start,
                        pos - start);
  if (terminated) ++pos;
  return line;
}

uint32_t ParseUnsigned(std::string_view s, std::string_view what) {
  if (s.empty()) {
    throw Error(ErrorCode::kMalformedHeader, "empty " + std::string(what));
  }
  uint64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') {
      throw Error(ErrorCode::kMalformedHeader,
                  "bad " + std::string(what) + " '" + std::string(s) + "'");
    }
    v = v * 10 + static_cast<uint64_t>(c - '0');
    if (v > 0xffffffffULL) {
      throw Error(ErrorCode::kMalformedHeader, std::string(what) + " overflow");
    }
  }
  return static_cast<uint32_t>(v);
}

ChromaLayout ParseColorspace(std::string_view tag) {
  if (tag == "420" || tag == "420jpeg" || tag == "420paldv" ||
      tag == "420mpeg2") {
    return ChromaLayout::k420;
  }
  if (tag == "444") return ChromaLayout::k444;
  if (tag == "mono") return ChromaLayout::kLumaOnly;
  throw Error(ErrorCode::kUnsupportedColorspace, "C" + std::string(tag));
}

std::string_view ColorspaceTag(ChromaLayout layout) {
  switch (layout) {
    case ChromaLayout::k420: return "C420jpeg";
    case ChromaLayout::k444: return "C444";
    case ChromaLayout::kLumaOnly: return "Cmono";
  }
  return "C420jpeg";
}

BytePlane CopyPlane(std::span<const uint8_t> bytes, size_t offset, size_t rows,
                    size_t cols) {
  std::vector<uint8_t> data(bytes.begin() + static_cast<ptrdiff_t>(offset),
                            bytes.begin() +
                                static_cast<ptrdiff_t>(offset + rows * cols));
  return BytePlane(rows, cols, std::move(data));
}

}  // namespace

std::pair<size_t, size_t> ChromaSize(ChromaLayout layout, size_t height,
                                     size_t width) {
  switch (layout) {
    case ChromaLayout::k420: return {(height + 1) / 2, (width + 1) / 2};
    case ChromaLayout::k444: return {height, width};
    case ChromaLayout::kLumaOnly: return {0, 0};
  }
  return {0, 0};
}

void FrameSequence::Validate() const {
  if (width == 0 || height == 0 || fps_num == 0 || fps_den == 0) {
    throw Error(ErrorCode::kShapeMismatch, "zero dimension or frame rate");
  }
  if (frames.empty()) throw Error(ErrorCode::kEmptySequence, "no frames");
  for (const Frame& f : frames) {
    if (f.luma.rows() != height || f.luma.cols() != width) {
      throw Error(ErrorCode::kShapeMismatch, "luma plane size");
    }
    const bool wants_chroma = f.layout != ChromaLayout::kLumaOnly;
    if (wants_chroma != f.has_chroma()) {
      throw Error(ErrorCode::kShapeMismatch, "chroma presence vs layout");
    }
    if (wants_chroma) {
      auto [cr, cc] = ChromaSize(f.layout, height, width);
      if (f.chroma_u->rows() != cr || f.chroma_u->cols() != cc ||
          f.chroma_v->rows() != cr || f.chroma_v->cols() != cc) {
        throw Error(ErrorCode::kShapeMismatch, "chroma plane size");
      }
    }
  }
}

Y4mReader::Y4mReader(std::span<const uint8_t> bytes, ParseMode mode)
    : bytes_(bytes), mode_(mode) {
  bool terminated = false;
  const std::string_view header = ReadLine(bytes_, pos_, terminated);
  if (!terminated || header.substr(0, kSignature.size()) != kSignature) {
    throw Error(ErrorCode::kMalformedHeader, "missing YUV4MPEG2 signature");
  }
  bool have_w = false, have_h = false, have_f = false;
  size_t i = kSignature.size();
  while (i < header.size()) {
    while (i < header.size() && header[i] == ' ') ++i;
    size_t j = i;
    while (j < header.size() && header[j] != ' ') ++j;
    const std::string_view token = header.substr(i, j - i);
    i = j;
    if (token.empty()) continue;
    const std::string_view value = token.substr(1);
    switch (token[0]) {
      case 'W':
        width_ = ParseUnsigned(value, "width");
        have_w = true;
        break;
      case 'H':
        height_ = ParseUnsigned(value, "height");
        have_h = true;
        break;
      case 'F': {
        const size_t colon = value.find(':');
        if (colon == std::string_view::npos) {
          throw Error(ErrorCode::kMalformedHeader, "frame rate needs N:D");
        }
        fps_num_ = ParseUnsigned(value.substr(0, colon), "fps numerator");
        fps_den_ = ParseUnsigned(value.substr(colon + 1), "fps denominator");
        have_f = true;
        break;
      }
      case 'C':
        layout_ = ParseColorspace(value);
        break;
      default:
        // I (interlacing), A (aspect), X (comments) do not affect decoding.
        break;
    }
  }
  if (!have_w || !have_h || !have_f) {
    throw Error(ErrorCode::kMalformedHeader, "header requires W, H and F");
  }
  if (width_ == 0 || height_ == 0 || fps_num_ == 0 || fps_den_ == 0) {
    throw Error(ErrorCode::kMalformedHeader, "zero dimension or rate");
  }
}

std::optional<Frame> Y4mReader::Next() {
  if (pos_ >= bytes_.size()) return std::nullopt;
  const size_t frame_start = pos_;
  bool terminated = false;
  const std::string_view tag = ReadLine(bytes_, pos_, terminated);
  if (tag.substr(0, kFrameTag.size()) != kFrameTag ||
      (tag.size() > kFrameTag.size() && tag[kFrameTag.size()] != ' ')) {
    throw Error(ErrorCode::kMalformedHeader,
                "expected FRAME at byte " + std::to_string(frame_start));
  }
  auto [crows, ccols] = ChromaSize(layout_, height_, width_);
  const size_t luma_bytes = width_ * height_;
  const size_t chroma_bytes = crows * ccols;
  const size_t needed = luma_bytes + 2 * chroma_bytes;
  if (!terminated || bytes_.size() - pos_ < needed) {
    if (mode_ == ParseMode::kLenient) {
      pos_ = bytes_.size();
      return std::nullopt;
    }
    throw Error(ErrorCode::kTruncatedFrame,
                "frame at byte " + std::to_string(frame_start) + " needs " +
                    std::to_string(needed) + " payload bytes");
  }
  Frame frame;
  frame.layout = layout_;
  frame.luma = CopyPlane(bytes_, pos_, height_, width_);
  if (layout_ != ChromaLayout::kLumaOnly) {
    frame.chroma_u = CopyPlane(bytes_, pos_ + luma_bytes, crows, ccols);
    frame.chroma_v =
        CopyPlane(bytes_, pos_ + luma_bytes + chroma_bytes, crows, ccols);
  }
  pos_ += needed;
  return frame;
}

FrameSequence ParseY4m(std::span<const uint8_t> bytes, ParseMode mode) {
  Y4mReader reader(bytes, mode);
  FrameSequence seq;
  seq.width = reader.width();
  seq.height = reader.height();
  seq.fps_num = reader.fps_num();
  seq.fps_den = reader.fps_den();
  while (auto frame = reader.Next()) seq.frames.push_back(std::move(*frame));
  if (seq.frames.empty()) {
    throw Error(ErrorCode::kEmptySequence, "stream holds no complete frame");
  }
  return seq;
}

FrameSequence ReadY4mFile(const std::filesystem::path& path, ParseMode mode) {
  const std::string data = io::ReadFile(path);
  return ParseY4m(std::span(reinterpret_cast<const uint8_t*>(data.data()),
                            data.size()),
                  mode);
}

std::vector<uint8_t> SerializeY4m(const FrameSequence& seq) {
  seq.Validate();
  const ChromaLayout layout = seq.frames.front().layout;
  std::string header = std::string(kSignature) + " W" +
                       std::to_string(seq.width) + " H" +
                       std::to_string(seq.height) + " F" +
                       std::to_string(seq.fps_num) + ":" +
                       std::to_string(seq.fps_den) + " Ip A1:1 " +
                       std::string(ColorspaceTag(layout)) + "\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  for (const Frame& f : seq.frames) {
    if (f.layout != layout) {
      throw Error(ErrorCode::kShapeMismatch, "mixed chroma layouts");
    }
    out.insert(out.end(), kFrameTag.begin(), kFrameTag.end());
    out.push_back('\n');
    out.insert(out.end(), f.luma.data().begin(), f.luma.data().end());
    if (f.has_chroma()) {
      out.insert(out.end(), f.chroma_u->data().begin(),
                 f.chroma_u->data().end());
      out.insert(out.end(), f.chroma_v->data().begin(),
                 f.chroma_v->data().end());
    }
  }
  return out;
}

void WriteY4mFile(const std::filesystem::path& path, const FrameSequence& seq) {
  const auto bytes = SerializeY4m(seq);
  io::WriteFileAtomic(
      path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                             bytes.size()));
}

RGBFrame ToRgb(const Frame& frame, YuvRange range) {
  if (!frame.has_chroma()) {
    throw Error(ErrorCode::kMissingChroma, "luma-only frame");
  }
  const size_t rows = frame.height();
  const size_t cols = frame.width();
  const bool sub = frame.layout == ChromaLayout::k420;
  const double luma_scale = range == YuvRange::kLimited ? 255.0 / 219.0 : 1.0;
  const double luma_offset = range == YuvRange::kLimited ? 16.0 : 0.0;
  const double chroma_scale = range == YuvRange::kLimited ? 255.0 / 224.0 : 1.0;
  RGBFrame out(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) {
      const size_t cr = sub ? r / 2 : r;
      const size_t cc = sub ? c / 2 : c;
      const double y = (frame.luma(r, c) - luma_offset) * luma_scale;
      const double cb = ((*frame.chroma_u)(cr, cc) - 128.0) * chroma_scale;
      const double cv = ((*frame.chroma_v)(cr, cc) - 128.0) * chroma_scale;
      const double red = y + 2.0 * (1.0 - kKr) * cv;
      const double blue = y + 2.0 * (1.0 - kKb) * cb;
      const double green = (y - kKr * red - kKb * blue) / kKg;
      out.r(r, c) = Clamp255(red);
      out.g(r, c) = Clamp255(green);
      out.b(r, c) = Clamp255(blue);
    }
  }
  return out;
}

Frame FromRgb(const RGBFrame& rgb, ChromaLayout layout, YuvRange range) {
  const size_t rows = rgb.rows();
  const size_t cols = rgb.cols();
  const double luma_scale = range == YuvRange::kLimited ? 219.0 / 255.0 : 1.0;
  const double luma_offset = range == YuvRange::kLimited ? 16.0 : 0.0;
  const double chroma_scale = range == YuvRange::kLimited ? 224.0 / 255.0 : 1.0;
  Frame f;
  f.layout = layout;
  f.luma = BytePlane(rows, cols);
  RealPlane u(rows, cols), v(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) {
      const double red = rgb.r(r, c), green = rgb.g(r, c), blue = rgb.b(r, c);
      const double y = kKr * red + kKg * green + kKb * blue;
      f.luma(r, c) = ClampByte(luma_offset + luma_scale * y);
      u(r, c) = 128.0 + chroma_scale * (blue - y) / (2.0 * (1.0 - kKb));
      v(r, c) = 128.0 + chroma_scale * (red - y) / (2.0 * (1.0 - kKr));
    }
  }
  if (layout == ChromaLayout::kLumaOnly) return f;
  auto [crows, ccols] = ChromaSize(layout, rows, cols);
  BytePlane pu(crows, ccols), pv(crows, ccols);
  const size_t step = layout == ChromaLayout::k420 ? 2 : 1;
  for (size_t r = 0; r < crows; ++r) {
    for (size_t c = 0; c < ccols; ++c) {
      double su = 0, sv = 0;
      int n = 0;
      for (size_t dr = 0; dr < step; ++dr) {
        for (size_t dc = 0; dc < step; ++dc) {
          const size_t rr = r * step + dr, cc = c * step + dc;
          if (rr >= rows || cc >= cols) continue;
          su += u(rr, cc);
          sv += v(rr, cc);
          ++n;
        }
      }
      pu(r, c) = ClampByte(su / n);
      pv(r, c) = ClampByte(sv / n);
    }
  }
  f.chroma_u = std::move(pu);
  f.chroma_v = std::move(pv);
  return f;
}

std::vector<RGBFrame> SequenceToRgb(const FrameSequence& seq, YuvRange range) {
  std::vector<RGBFrame> out;
  out.reserve(seq.frames.size());
  for (const Frame& f : seq.frames) {
    if (f.has_chroma()) {
      out.push_back(ToRgb(f, range));
      continue;
    }
    RGBFrame gray(f.height(), f.width());
    const double scale = range == YuvRange::kLimited ? 255.0 / 219.0 : 1.0;
    const double offset = range == YuvRange::kLimited ? 16.0 : 0.0;
    for (size_t i = 0; i < f.luma.size(); ++i) {
      const double y = Clamp255((f.luma.data()[i] - offset) * scale);
      gray.r.data()[i] = gray.g.data()[i] = gray.b.data()[i] = y;
    }
    out.push_back(std::move(gray));
  }
  return out;
}

AdmissionReport ValidateClip(const ClipMeta& meta,
                             const AdmissionBounds& bounds) {
  AdmissionReport report;
  auto reject = [&](AdmissionRule rule) {
    report.accepted = false;
    report.violations.push_back(rule);
  };
  if (meta.height < bounds.min_height || meta.height > bounds.max_height) {
    reject(AdmissionRule::kHeight);
  }
  if (meta.width < bounds.min_width || meta.width > bounds.max_width) {
    reject(AdmissionRule::kWidth);
  }
  if (!(meta.duration >= bounds.min_duration &&
        meta.duration <= bounds.max_duration)) {
    reject(AdmissionRule::kDuration);
  }
  if (!meta.portrait()) reject(AdmissionRule::kPortrait);
  return report;
}

FrameSequence SubsampleFrames(const FrameSequence& seq, size_t stride) {
  if (stride == 0) throw Error(ErrorCode::kZeroStride, "stride must be >= 1");
  FrameSequence out;
  out.width = seq.width;
  out.height = seq.height;
  out.fps_num = seq.fps_num;
  out.fps_den = seq.fps_den;
  for (size_t i = 0; i < seq.frames.size(); i += stride) {
    out.frames.push_back(seq.frames[i]);
  }
  return out;
}

std::vector<ManifestEntry> ReadManifest(const std::filesystem::path& path) {
  const io::CsvTable table = io::ReadCsv(path);
  const size_t id = table.Column("id");
  const size_t p = table.Column("path");
  const size_t w = table.Column("width");
  const size_t h = table.Column("height");
  const size_t d = table.Column("duration");
  std::vector<ManifestEntry> out;
  for (const auto& row : table.rows) {
    ManifestEntry e;
    e.id = row[id];
    e.path = row[p];
    if (e.path.is_relative()) e.path = path.parent_path() / e.path;
    e.width = static_cast<size_t>(io::ParseInt(row[w]));
    e.height = static_cast<size_t>(io::ParseInt(row[h]));
    e.duration = io::ParseDouble(row[d]);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace vqalab::media
