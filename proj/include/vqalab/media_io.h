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

// Raw video ingestion: YUV4MPEG2 parsing/writing, BT.601 colour conversion,
// clip admission rules and frame subsampling.

#ifndef VQALAB_MEDIA_IO_H_
#define VQALAB_MEDIA_IO_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vqalab/plane.h"

namespace vqalab::media {

enum class ChromaLayout { kLumaOnly, k420, k444 };

struct Frame {
  BytePlane luma;
  std::optional<BytePlane> chroma_u;
  std::optional<BytePlane> chroma_v;
  ChromaLayout layout = ChromaLayout::kLumaOnly;

  size_t height() const { return luma.rows(); }
  size_t width() const { return luma.cols(); }
  bool has_chroma() const { return chroma_u.has_value() && chroma_v.has_value(); }

  bool operator==(const Frame&) const = default;
};

struct FrameSequence {
  size_t width = 0;
  size_t height = 0;
  uint32_t fps_num = 30;
  uint32_t fps_den = 1;
  std::vector<Frame> frames;

  size_t frame_count() const { return frames.size(); }
  // Throws kShapeMismatch / kEmptySequence on invariant violations.
  void Validate() const;
};

// Planar RGB with real-valued samples in [0, 255].
struct RGBFrame {
  RealPlane r, g, b;

  RGBFrame() = default;
  RGBFrame(size_t rows, size_t cols, double fill = 0.0)
      : r(rows, cols, fill), g(rows, cols, fill), b(rows, cols, fill) {}

  size_t rows() const { return r.rows(); }
  size_t cols() const { return r.cols(); }

  bool operator==(const RGBFrame&) const = default;
};

// Chroma plane dimensions for a layout: {rows, cols}.
std::pair<size_t, size_t> ChromaSize(ChromaLayout layout, size_t height,
                                     size_t width);

enum class ParseMode { kStrict, kLenient };

// Incremental YUV4MPEG2 reader. The header is parsed on construction; frames
// are decoded one at a time so callers can observe how many complete frames
// preceded a truncation.
class Y4mReader {
 public:
  Y4mReader(std::span<const uint8_t> bytes, ParseMode mode = ParseMode::kStrict);

  size_t width() const { return width_; }
  size_t height() const { return height_; }
  uint32_t fps_num() const { return fps_num_; }
  uint32_t fps_den() const { return fps_den_; }
  ChromaLayout layout() const { return layout_; }

  // Returns std::nullopt at end of stream. In strict mode a short payload
  // throws kTruncatedFrame; in lenient mode it ends the stream.
  std::optional<Frame> Next();

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
  ParseMode mode_;
  size_t width_ = 0;
  size_t height_ = 0;
  uint32_t fps_num_ = 0;
  uint32_t fps_den_ = 0;
  ChromaLayout layout_ = ChromaLayout::k420;
};

FrameSequence ParseY4m(std::span<const uint8_t> bytes,
                       ParseMode mode = ParseMode::kStrict);
FrameSequence ReadY4mFile(const std::filesystem::path& path,
                          ParseMode mode = ParseMode::kStrict);

std::vector<uint8_t> SerializeY4m(const FrameSequence& seq);
void WriteY4mFile(const std::filesystem::path& path, const FrameSequence& seq);

enum class YuvRange { kLimited, kFull };

// BT.601 inverse conversion. 4:2:0 chroma is upsampled by nearest neighbour.
RGBFrame ToRgb(const Frame& frame, YuvRange range = YuvRange::kLimited);

// BT.601 forward conversion with rounding; 4:2:0 chroma is the mean of each
// 2x2 block.
Frame FromRgb(const RGBFrame& rgb, ChromaLayout layout = ChromaLayout::k444,
              YuvRange range = YuvRange::kLimited);

// Converts a whole sequence; luma-only frames become gray RGB.
std::vector<RGBFrame> SequenceToRgb(const FrameSequence& seq,
                                    YuvRange range = YuvRange::kLimited);

struct ClipMeta {
  std::string id;
  size_t width = 0;
  size_t height = 0;
  double duration = 0.0;

  bool portrait() const { return height > width; }
};

enum class AdmissionRule { kHeight, kWidth, kDuration, kPortrait };

struct AdmissionReport {
  bool accepted = true;
  std::vector<AdmissionRule> violations;
};

// Dataset admission bounds for candidate clips.
struct AdmissionBounds {
  size_t min_height = 900;
  size_t max_height = 1500;
  size_t min_width = 500;
  size_t max_width = 800;
  double min_duration = 10.0;
  double max_duration = 65.0;
};

AdmissionReport ValidateClip(const ClipMeta& meta,
                             const AdmissionBounds& bounds = {});

// Keeps frames 0, stride, 2*stride, ...
FrameSequence SubsampleFrames(const FrameSequence& seq, size_t stride);

struct ManifestEntry {
  std::string id;
  std::filesystem::path path;
  size_t width = 0;
  size_t height = 0;
  double duration = 0.0;
};

// CSV with header id,path,width,height,duration. Relative paths resolve
// against the manifest's directory.
std::vector<ManifestEntry> ReadManifest(const std::filesystem::path& path);

}  // namespace vqalab::media

#endif  // VQALAB_MEDIA_IO_H_
