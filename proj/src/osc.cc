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


#include "auralab/osc.h"

#include <array>
#include <bit>
#include <cstring>
#include <sstream>

namespace auralab {
namespace {

constexpr char kBundleTag[8] = {'#', 'b', 'u', 'n', 'd', 'l', 'e', '\0'};

constexpr std::array<OscAddressSpec, 12> kAddressSpace = {{
    {osc_address::kSeat, ",s"},
    {osc_address::kHeadPosition, ",fff"},
    {osc_address::kHeadRotation, ",ffff"},
    {osc_address::kUiPlay, ",s"},
    {osc_address::kUiStop, ","},
    {osc_address::kUiRating, ",ssi"},
    {osc_address::kUiSource, ",s"},
    {osc_address::kUiTrialNext, ","},
    {osc_address::kUiInfo, ",s"},
    {osc_address::kStateTrial, ",i"},
    {osc_address::kStateTransport, ",s"},
    {osc_address::kStateSeat, ",s"},
}};

size_t Padded(size_t n) { return (n + 3) & ~size_t(3); }

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(uint8_t(v >> 24));
  out.push_back(uint8_t(v >> 16));
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v));
}

void PutString(std::vector<uint8_t>& out, std::string_view s) {
  out.insert(out.end(), s.begin(), s.end());
  out.resize(out.size() + Padded(s.size() + 1) - s.size(), 0);
}

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  size_t remaining() const { return bytes_.size() - pos_; }
  size_t position() const { return pos_; }

  uint32_t U32() {
    if (remaining() < 4) {
      throw OscError(OscErrc::kTruncated,
                     "need 4 bytes at offset " + std::to_string(pos_));
    }
    const uint8_t* p = bytes_.data() + pos_;
    pos_ += 4;
    return uint32_t(p[0]) << 24 | uint32_t(p[1]) << 16 | uint32_t(p[2]) << 8 |
           uint32_t(p[3]);
  }

  std::string String() {
    const uint8_t* begin = bytes_.data() + pos_;
    const void* nul = std::memchr(begin, 0, remaining());
    if (nul == nullptr) {
      throw OscError(OscErrc::kTruncated,
                     "unterminated string at offset " + std::to_string(pos_));
    }
    const size_t len = size_t(static_cast<const uint8_t*>(nul) - begin);
    std::string s(reinterpret_cast<const char*>(begin), len);
    pos_ += len;
    SkipZeros(Padded(len + 1) - len);
    return s;
  }

  OscBlob Blob() {
    const uint32_t size = U32();
    if (size > remaining()) {
      throw OscError(OscErrc::kTruncated,
                     "blob of " + std::to_string(size) + " bytes overruns packet");
    }
    OscBlob blob(bytes_.begin() + pos_, bytes_.begin() + pos_ + size);
    pos_ += size;
    SkipZeros(Padded(size) - size);
    return blob;
  }

 private:
  // Terminator and padding up to the next 4-byte boundary must be zero.
  void SkipZeros(size_t count) {
    if (remaining() < count) {
      throw OscError(OscErrc::kTruncated,
                     "missing padding at offset " + std::to_string(pos_));
    }
    for (size_t i = 0; i < count; ++i) {
      if (bytes_[pos_ + i] != 0) {
        throw OscError(OscErrc::kBadPadding,
                       "non-zero padding byte at offset " +
                           std::to_string(pos_ + i));
      }
    }
    pos_ += count;
  }

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

bool IsBundle(std::span<const uint8_t> bytes) {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kBundleTag, 8) == 0;
}

bool IsStandardButUnsupported(char tag) {
  // OSC 1.0 optional types and common extensions.
  return std::string_view("hdtScrmTFNI[]").find(tag) != std::string_view::npos;
}

void DecodeInto(std::span<const uint8_t> bytes, std::vector<OscMessage>& out,
                int depth) {
  if (IsBundle(bytes)) {
    if (depth > 8) throw OscError(OscErrc::kNotOsc, "bundles nested too deep");
    Reader r(bytes.subspan(8));
    r.U32();  // timetag, ignored
    r.U32();
    while (r.remaining() > 0) {
      const uint32_t size = r.U32();
      if (size % 4 != 0) {
        throw OscError(OscErrc::kBadPadding,
                       "bundle element size " + std::to_string(size));
      }
      if (size > r.remaining()) {
        throw OscError(OscErrc::kTruncated, "bundle element overruns packet");
      }
      const size_t start = 8 + r.position();
      DecodeInto(bytes.subspan(start, size), out, depth + 1);
      for (uint32_t i = 0; i < size / 4; ++i) r.U32();
    }
    return;
  }
  out.push_back(DecodeMessage(bytes));
}

}  // namespace

std::string_view ToString(OscErrc code) {
  switch (code) {
    case OscErrc::kTruncated: return "Truncated";
    case OscErrc::kBadPadding: return "BadPadding";
    case OscErrc::kUnknownTypeTag: return "UnknownTypeTag";
    case OscErrc::kNotOsc: return "NotOsc";
    case OscErrc::kInvalidAddress: return "InvalidAddress";
    case OscErrc::kUnsupportedArgType: return "UnsupportedArgType";
    case OscErrc::kBindFailed: return "BindFailed";
    case OscErrc::kUnreachableTarget: return "UnreachableTarget";
  }
  return "Unknown";
}

std::string OscMessage::type_tags() const {
  std::string tags = ",";
  for (const auto& arg : args) tags += "ifsb"[arg.index()];
  return tags;
}

bool IsValidAddress(std::string_view address) {
  if (address.empty() || address.front() != '/') return false;
  for (char c : address) {
    if (c <= ' ' || c > '~') return false;
    if (std::string_view("#*,?[]{}").find(c) != std::string_view::npos) {
      return false;
    }
  }
  return true;
}

std::vector<uint8_t> EncodeMessage(const OscMessage& message) {
  if (!IsValidAddress(message.address)) {
    throw OscError(OscErrc::kInvalidAddress, "'" + message.address + "'");
  }
  std::vector<uint8_t> out;
  out.reserve(Padded(message.address.size() + 1) +
              Padded(message.args.size() + 2) + 8 * message.args.size());
  PutString(out, message.address);
  PutString(out, message.type_tags());
  for (const auto& arg : message.args) {
    if (const auto* i = std::get_if<int32_t>(&arg)) {
      PutU32(out, uint32_t(*i));
    } else if (const auto* f = std::get_if<float>(&arg)) {
      PutU32(out, std::bit_cast<uint32_t>(*f));
    } else if (const auto* s = std::get_if<std::string>(&arg)) {
      if (s->find('\0') != std::string::npos) {
        throw OscError(OscErrc::kUnsupportedArgType,
                       "string argument with embedded NUL");
      }
      PutString(out, *s);
    } else {
      const auto& b = std::get<OscBlob>(arg);
      if (b.size() > 0x7FFFFFFF) {
        throw OscError(OscErrc::kUnsupportedArgType, "blob too large");
      }
      PutU32(out, uint32_t(b.size()));
      out.insert(out.end(), b.begin(), b.end());
      out.resize(Padded(out.size()), 0);
    }
  }
  return out;
}

std::vector<uint8_t> EncodeBundle(std::span<const OscMessage> messages,
                                  uint64_t timetag) {
  std::vector<uint8_t> out(kBundleTag, kBundleTag + 8);
  PutU32(out, uint32_t(timetag >> 32));
  PutU32(out, uint32_t(timetag));
  for (const auto& m : messages) {
    const auto element = EncodeMessage(m);
    PutU32(out, uint32_t(element.size()));
    out.insert(out.end(), element.begin(), element.end());
  }
  return out;
}

OscMessage DecodeMessage(std::span<const uint8_t> bytes) {
  if (bytes.empty()) throw OscError(OscErrc::kTruncated, "empty packet");
  if (bytes[0] != '/') {
    throw OscError(OscErrc::kNotOsc, IsBundle(bytes)
                                         ? "bundle where a message was expected"
                                         : "packet does not start with '/'");
  }
  if (bytes.size() % 4 != 0) {
    throw OscError(OscErrc::kTruncated,
                   "packet size " + std::to_string(bytes.size()) +
                       " is not a multiple of 4");
  }
  Reader r(bytes);
  OscMessage msg;
  msg.address = r.String();
  if (!IsValidAddress(msg.address)) {
    throw OscError(OscErrc::kInvalidAddress, "'" + msg.address + "'");
  }
  if (r.remaining() == 0) {
    throw OscError(OscErrc::kTruncated, "missing type tag string");
  }
  const std::string tags = r.String();
  if (tags.empty() || tags.front() != ',') {
    throw OscError(OscErrc::kNotOsc, "type tag string must start with ','");
  }
  for (size_t i = 1; i < tags.size(); ++i) {
    const char t = tags[i];
    switch (t) {
      case 'i':
        msg.args.emplace_back(int32_t(r.U32()));
        break;
      case 'f':
        msg.args.emplace_back(std::bit_cast<float>(r.U32()));
        break;
      case 's':
        msg.args.emplace_back(r.String());
        break;
      case 'b':
        msg.args.emplace_back(r.Blob());
        break;
      default:
        throw OscError(IsStandardButUnsupported(t)
                           ? OscErrc::kUnsupportedArgType
                           : OscErrc::kUnknownTypeTag,
                       std::string("type tag '") + t + "'");
    }
  }
  if (r.remaining() != 0) {
    throw OscError(OscErrc::kBadPadding,
                   std::to_string(r.remaining()) + " trailing bytes");
  }
  return msg;
}

std::vector<OscMessage> DecodePacket(std::span<const uint8_t> bytes) {
  std::vector<OscMessage> out;
  DecodeInto(bytes, out, 0);
  return out;
}

std::string Describe(const OscMessage& message) {
  std::ostringstream os;
  os << message.address << ' ' << message.type_tags();
  for (const auto& arg : message.args) {
    os << ' ';
    if (const auto* i = std::get_if<int32_t>(&arg)) {
      os << *i;
    } else if (const auto* f = std::get_if<float>(&arg)) {
      os << *f;
    } else if (const auto* s = std::get_if<std::string>(&arg)) {
      os << '"' << *s << '"';
    } else {
      os << "<blob " << std::get<OscBlob>(arg).size() << '>';
    }
  }
  return os.str();
}

std::span<const OscAddressSpec> OscAddressSpace() { return kAddressSpace; }

const OscAddressSpec* FindAddressSpec(std::string_view address) {
  for (const auto& spec : kAddressSpace) {
    if (spec.address == address) return &spec;
  }
  return nullptr;
}

}  // namespace auralab
