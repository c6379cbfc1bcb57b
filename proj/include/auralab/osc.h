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


// OSC 1.0 wire codec. Supports the four standard argument types (i, f, s, b)
// and flattens bundles; timetags are read and discarded.

#ifndef AURALAB_OSC_H_
#define AURALAB_OSC_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace auralab {

enum class OscErrc {
  kTruncated,
  kBadPadding,
  kUnknownTypeTag,
  kNotOsc,
  kInvalidAddress,
  kUnsupportedArgType,
  kBindFailed,
  kUnreachableTarget,
};

std::string_view ToString(OscErrc code);

class OscError : public std::runtime_error {
 public:
  OscError(OscErrc code, const std::string& what)
      : std::runtime_error(std::string(ToString(code)) + ": " + what),
        code_(code) {}
  OscErrc code() const { return code_; }

 private:
  OscErrc code_;
};

using OscBlob = std::vector<uint8_t>;
using OscArg = std::variant<int32_t, float, std::string, OscBlob>;

struct OscMessage {
  std::string address;
  std::vector<OscArg> args;

  OscMessage() = default;
  OscMessage(std::string address_in, std::vector<OscArg> args_in = {})
      : address(std::move(address_in)), args(std::move(args_in)) {}

  // e.g. ",sfi"
  std::string type_tags() const;
  bool operator==(const OscMessage&) const = default;
};

// Address must start with '/' and contain only printable ASCII other than
// space and the pattern characters # * , ? [ ] { }.
bool IsValidAddress(std::string_view address);

// Throws kInvalidAddress, or kUnsupportedArgType for strings with embedded
// NULs.
std::vector<uint8_t> EncodeMessage(const OscMessage& message);
// Bundle with the given timetag (1 = immediately).
std::vector<uint8_t> EncodeBundle(std::span<const OscMessage> messages,
                                  uint64_t timetag = 1);

// Decodes a single message; bundles are rejected with kNotOsc.
OscMessage DecodeMessage(std::span<const uint8_t> bytes);
// Decodes a message or a (possibly nested) bundle, flattened in order.
std::vector<OscMessage> DecodePacket(std::span<const uint8_t> bytes);

// Human-readable "/addr ,tags arg arg" for logs.
std::string Describe(const OscMessage& message);

// Client -> engine addresses.
namespace osc_address {
inline constexpr std::string_view kSeat = "/seat";
inline constexpr std::string_view kHeadPosition = "/head/position";
inline constexpr std::string_view kHeadRotation = "/head/rotation";
inline constexpr std::string_view kUiPlay = "/ui/play";
inline constexpr std::string_view kUiStop = "/ui/stop";
inline constexpr std::string_view kUiRating = "/ui/rating";
inline constexpr std::string_view kUiSource = "/ui/source";
inline constexpr std::string_view kUiTrialNext = "/ui/trial/next";
inline constexpr std::string_view kUiInfo = "/ui/info";
// Engine -> client notifications.
inline constexpr std::string_view kStateTrial = "/state/trial";
inline constexpr std::string_view kStateTransport = "/state/transport";
inline constexpr std::string_view kStateSeat = "/state/seat";
}  // namespace osc_address

struct OscAddressSpec {
  std::string_view address;
  std::string_view type_tags;
};

// Every address in the protocol with its exact argument signature.
std::span<const OscAddressSpec> OscAddressSpace();
// nullptr for addresses outside the protocol.
const OscAddressSpec* FindAddressSpec(std::string_view address);

}  // namespace auralab

#endif  // AURALAB_OSC_H_
