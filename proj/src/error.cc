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

#include "vqalab/error.h"

namespace vqalab {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kUnsupportedColorspace: return "UnsupportedColorspace";
    case ErrorCode::kTruncatedFrame: return "TruncatedFrame";
    case ErrorCode::kMissingChroma: return "MissingChroma";
    case ErrorCode::kZeroStride: return "ZeroStride";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kFrameTooSmall: return "FrameTooSmall";
    case ErrorCode::kSingleFrame: return "SingleFrame";
    case ErrorCode::kDegenerateSamples: return "DegenerateSamples";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kOneSidedSamples: return "OneSidedSamples";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kSingularCovariance: return "SingularCovariance";
    case ErrorCode::kTooFewFrames: return "TooFewFrames";
    case ErrorCode::kDegenerateSession: return "DegenerateSession";
    case ErrorCode::kUnratedVideo: return "UnratedVideo";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kDuplicateEntry: return "DuplicateEntry";
    case ErrorCode::kConstantInput: return "ConstantInput";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kFitDiverged: return "FitDiverged";
    case ErrorCode::kTooFewItems: return "TooFewItems";
    case ErrorCode::kSingularKernel: return "SingularKernel";
    case ErrorCode::kImageTooSmall: return "ImageTooSmall";
    case ErrorCode::kInvalidChunkSize: return "InvalidChunkSize";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kAttemptsExhausted: return "AttemptsExhausted";
    case ErrorCode::kEmptyNegatives: return "EmptyNegatives";
    case ErrorCode::kNonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInvalidMomentum: return "InvalidMomentum";
    case ErrorCode::kLayoutMismatch: return "LayoutMismatch";
    case ErrorCode::kSizeMismatch: return "SizeMismatch";
    case ErrorCode::kIndivisibleGroups: return "IndivisibleGroups";
    case ErrorCode::kGapNotElapsed: return "GapNotElapsed";
    case ErrorCode::kNoPlaylistRemaining: return "NoPlaylistRemaining";
    case ErrorCode::kActiveSessionExists: return "ActiveSessionExists";
    case ErrorCode::kUnknownSubject: return "UnknownSubject";
    case ErrorCode::kUnknownSession: return "UnknownSession";
    case ErrorCode::kPendingRating: return "PendingRating";
    case ErrorCode::kSessionComplete: return "SessionComplete";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kWrongVideo: return "WrongVideo";
    case ErrorCode::kDuplicateRating: return "DuplicateRating";
    case ErrorCode::kEmptyStore: return "EmptyStore";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kUsageError: return "UsageError";
  }
  return "Unknown";
}

}  // namespace vqalab
