// Copyright 2026 The Toolkin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "toolkin/error.hpp"

namespace toolkin {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroQuaternion: return "ZeroQuaternion";
    case ErrorCode::kEmptyList: return "EmptyList";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kNegativeLength: return "NegativeLength";
    case ErrorCode::kUnreachable: return "Unreachable";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kBadHeader: return "BadHeader";
    case ErrorCode::kTruncatedData: return "TruncatedData";
    case ErrorCode::kUnsupportedMaxval: return "UnsupportedMaxval";
    case ErrorCode::kFewerThanTwoMarkers: return "FewerThanTwoMarkers";
    case ErrorCode::kWrongCount: return "WrongCount";
    case ErrorCode::kNonPositiveLength: return "NonPositiveLength";
    case ErrorCode::kOverlappingMarkers: return "OverlappingMarkers";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kBufferTooSmall: return "BufferTooSmall";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kCheckpointMismatch: return "CheckpointMismatch";
    case ErrorCode::kInsufficientCompleteEpisodes: return "InsufficientCompleteEpisodes";
    case ErrorCode::kAllWaypointsFiltered: return "AllWaypointsFiltered";
    case ErrorCode::kNonUnitQuaternion: return "NonUnitQuaternion";
    case ErrorCode::kNonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace toolkin
