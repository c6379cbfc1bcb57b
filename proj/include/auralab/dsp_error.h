// Copyright 2026 The Auralab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef AURALAB_DSP_ERROR_H_
#define AURALAB_DSP_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace auralab {

enum class DspErrc {
  kEmptyIr,
  kInvalidBlockSize,
  kUnsupportedOrder,
  kDimensionMismatch,
  kCutoffOutOfRange,
  kNotPlaying,
  kMissingDecoder,
  kUnknownCondition,
  kNonMonotonicTrajectory,
  kConventionMismatch,
};

constexpr std::string_view ToString(DspErrc code) {
  switch (code) {
    case DspErrc::kEmptyIr: return "EmptyIr";
    case DspErrc::kInvalidBlockSize: return "InvalidBlockSize";
    case DspErrc::kUnsupportedOrder: return "UnsupportedOrder";
    case DspErrc::kDimensionMismatch: return "DimensionMismatch";
    case DspErrc::kCutoffOutOfRange: return "CutoffOutOfRange";
    case DspErrc::kNotPlaying: return "NotPlaying";
    case DspErrc::kMissingDecoder: return "MissingDecoder";
    case DspErrc::kUnknownCondition: return "UnknownCondition";
    case DspErrc::kNonMonotonicTrajectory: return "NonMonotonicTrajectory";
    case DspErrc::kConventionMismatch: return "ConventionMismatch";
  }
  return "Unknown";
}

class DspError : public std::runtime_error {
 public:
  DspError(DspErrc code, const std::string& what)
      : std::runtime_error(std::string(ToString(code)) + ": " + what),
        code_(code) {}
  DspErrc code() const { return code_; }

 private:
  DspErrc code_;
};

}  // namespace auralab

#endif  // AURALAB_DSP_ERROR_H_
