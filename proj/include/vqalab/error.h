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

#ifndef VQALAB_ERROR_H_
#define VQALAB_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace vqalab {

// Every domain failure carries one of these codes so callers (and tests) can
// branch on the kind without parsing messages.
enum class ErrorCode {
  // media-io
  kMalformedHeader,
  kUnsupportedColorspace,
  kTruncatedFrame,
  kMissingChroma,
  kZeroStride,
  // diversity / nss
  kEmptySequence,
  kFrameTooSmall,
  kSingleFrame,
  kDegenerateSamples,
  kTooFewSamples,
  kOneSidedSamples,
  kEmptyCorpus,
  kSingularCovariance,
  kTooFewFrames,
  // sureal
  kDegenerateSession,
  kUnratedVideo,
  kInsufficientData,
  kNotConverged,
  kDuplicateEntry,
  // evaluation
  kConstantInput,
  kLengthMismatch,
  kFitDiverged,
  kTooFewItems,
  kSingularKernel,
  // moeva
  kImageTooSmall,
  kInvalidChunkSize,
  kInfeasible,
  kAttemptsExhausted,
  kEmptyNegatives,
  kNonPositiveTemperature,
  kShapeMismatch,
  kInvalidMomentum,
  kLayoutMismatch,
  // study
  kSizeMismatch,
  kIndivisibleGroups,
  kGapNotElapsed,
  kNoPlaylistRemaining,
  kActiveSessionExists,
  kUnknownSubject,
  kUnknownSession,
  kPendingRating,
  kSessionComplete,
  kOutOfRange,
  kWrongVideo,
  kDuplicateRating,
  kEmptyStore,
  // io / cli
  kIoError,
  kSchemaError,
  kUsageError,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vqalab

#endif  // VQALAB_ERROR_H_
