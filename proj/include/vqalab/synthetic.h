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

// Seeded synthetic content: piecewise-smooth scenes with a 1/f-like spectrum,
// used for demos, simulations and tests where no real footage is bundled.

#ifndef VQALAB_SYNTHETIC_H_
#define VQALAB_SYNTHETIC_H_

#include <cstdint>

#include "vqalab/media_io.h"
#include "vqalab/plane.h"

namespace vqalab::synthetic {

// Luma-like scene in roughly [20, 235].
RealPlane NaturalLuma(size_t rows, size_t cols, uint64_t seed);

// Colour scene: a luma scene plus smooth chroma fields, in [0, 255].
media::RGBFrame NaturalRgb(size_t rows, size_t cols, uint64_t seed);

// A panning window over a larger colour scene, encoded as 4:4:4 frames.
media::FrameSequence PanningClip(size_t rows, size_t cols, size_t frames,
                                 uint64_t seed);

}  // namespace vqalab::synthetic

#endif  // VQALAB_SYNTHETIC_H_
