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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace toolkin {

// Every failure the library reports in-band carries one of these codes, so
// callers (and the CLI exit-code mapping) can branch on the kind of failure
// without parsing messages.
enum class ErrorCode {
  kZeroQuaternion,
  kEmptyList,
  kParseError,
  kInvariantViolation,
  kNegativeLength,
  kUnreachable,
  kBadMagic,
  kBadHeader,
  kTruncatedData,
  kUnsupportedMaxval,
  kFewerThanTwoMarkers,
  kWrongCount,
  kNonPositiveLength,
  kOverlappingMarkers,
  kOutOfBounds,
  kInvalidSpec,
  kDimensionMismatch,
  kLengthMismatch,
  kBufferTooSmall,
  kConfigError,
  kCheckpointMismatch,
  kInsufficientCompleteEpisodes,
  kAllWaypointsFiltered,
  kNonUnitQuaternion,
  kNonMonotoneTime,
  kIoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace toolkin
