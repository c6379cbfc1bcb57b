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

#include "auralab/wav.h"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace auralab {
namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV codec assumes a little-endian host");

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t Le16(const uint8_t* p) { return uint16_t(p[0] | (p[1] << 8)); }
uint32_t Le32(const uint8_t* p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) |
         (uint32_t(p[3]) << 24);
}

void Put16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
}
void Put32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
}
void PutTag(std::vector<uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

WavData ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw WavError("not a RIFF/WAVE file: " + path.string());
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  size_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* chunk = bytes.data() + pos;
    size_t size = Le32(chunk + 4);
    size_t body = pos + 8;
    if (body + size > bytes.size()) size = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw WavError("short fmt chunk: " + path.string());
      format = Le16(chunk + 8);
      channels = Le16(chunk + 10);
      rate = Le32(chunk + 12);
      bits = Le16(chunk + 22);
      if (format == kFormatExtensible) {
        if (size < 40) throw WavError("short extensible fmt: " + path.string());
        // First two bytes of the sub-format GUID carry the format code.
        format = Le16(chunk + 8 + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos = body + size + (size & 1);
  }
  if (channels == 0 || data == nullptr) {
    throw WavError("missing fmt or data chunk: " + path.string());
  }

  const size_t bytes_per_sample = bits / 8;
  if (!((format == kFormatPcm &&
         (bits == 16 || bits == 24 || bits == 32)) ||
        (format == kFormatFloat && (bits == 32 || bits == 64)))) {
    throw WavError("unsupported sample format in " + path.string());
  }
  const size_t frames = data_size / (bytes_per_sample * channels);

  WavData out;
  out.sample_rate = int(rate);
  out.channels.assign(channels, std::vector<float>(frames));
  const uint8_t* p = data;
  for (size_t n = 0; n < frames; ++n) {
    for (size_t c = 0; c < channels; ++c, p += bytes_per_sample) {
      float v = 0.0f;
      if (format == kFormatFloat && bits == 32) {
        v = std::bit_cast<float>(Le32(p));
      } else if (format == kFormatFloat) {
        uint64_t u = uint64_t(Le32(p)) | (uint64_t(Le32(p + 4)) << 32);
        v = float(std::bit_cast<double>(u));
      } else if (bits == 16) {
        v = float(int16_t(Le16(p))) / 32768.0f;
      } else if (bits == 24) {
        int32_t s = int32_t(uint32_t(p[0]) << 8 | uint32_t(p[1]) << 16 |
                            uint32_t(p[2]) << 24) >> 8;
        v = float(s) / 8388608.0f;
      } else {
        v = float(double(int32_t(Le32(p))) / 2147483648.0);
      }
      out.channels[c][n] = v;
    }
  }
  return out;
}

void WriteWavFloat(const std::filesystem::path& path, const WavData& data) {
  const size_t channels = data.num_channels();
  if (channels == 0 || channels > 0xFFFF) {
    throw WavError("invalid channel count for " + path.string());
  }
  const size_t frames = data.num_frames();
  for (const auto& ch : data.channels) {
    if (ch.size() != frames) throw WavError("ragged channels");
  }
  const bool extensible = channels > 2;
  const uint32_t fmt_size = extensible ? 40 : 16;
  const uint32_t block_align = uint32_t(4 * channels);
  const uint64_t data_size = uint64_t(frames) * block_align;
  if (data_size > 0xFFFFFFF0ull) throw WavError("file too large");

  std::vector<uint8_t> out;
  out.reserve(64 + data_size);
  PutTag(out, "RIFF");
  Put32(out, uint32_t(4 + 8 + fmt_size + 8 + data_size));
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  Put32(out, fmt_size);
  Put16(out, extensible ? kFormatExtensible : kFormatFloat);
  Put16(out, uint16_t(channels));
  Put32(out, uint32_t(data.sample_rate));
  Put32(out, uint32_t(data.sample_rate) * block_align);
  Put16(out, uint16_t(block_align));
  Put16(out, 32);
  if (extensible) {
    Put16(out, 22);
    Put16(out, 32);
    Put32(out, 0);  // channel mask: none assigned
    // KSDATAFORMAT_SUBTYPE_IEEE_FLOAT
    static constexpr std::array<uint8_t, 16> kGuid = {
        0x03, 0x00, 0x00, 0x00, 0x00, 0x00, 0x10, 0x00,
        0x80, 0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};
    out.insert(out.end(), kGuid.begin(), kGuid.end());
  }
  PutTag(out, "data");
  Put32(out, uint32_t(data_size));
  for (size_t n = 0; n < frames; ++n) {
    for (size_t c = 0; c < channels; ++c) {
      Put32(out, std::bit_cast<uint32_t>(data.channels[c][n]));
    }
  }

  // Atomic replace via sibling temp file.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw WavError("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(out.data()),
            std::streamsize(out.size()));
    if (!f) throw WavError("short write to " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::vector<uint8_t> StreamHeader(int channels, int rate, uint64_t frames) {
  const uint32_t block_align = uint32_t(4 * channels);
  const uint64_t data = frames * block_align;
  const uint32_t data_size = data > 0xFFFFFFF0ull ? 0xFFFFFFF0u : uint32_t(data);
  std::vector<uint8_t> out;
  PutTag(out, "RIFF");
  Put32(out, 4 + 8 + 16 + 8 + data_size);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  Put32(out, 16);
  Put16(out, kFormatFloat);
  Put16(out, uint16_t(channels));
  Put32(out, uint32_t(rate));
  Put32(out, uint32_t(rate) * block_align);
  Put16(out, uint16_t(block_align));
  Put16(out, 32);
  PutTag(out, "data");
  Put32(out, data_size);
  return out;
}

}  // namespace

WavStreamWriter::WavStreamWriter(const std::filesystem::path& path, int channels,
                                 int sample_rate)
    : channels_(channels) {
  if (channels < 1 || channels > 2 || sample_rate <= 0) {
    throw WavError("stream writer supports 1 or 2 channels");
  }
  file_ = std::fopen(path.c_str(), "wb");
  if (file_ == nullptr) throw WavError("cannot write " + path.string());
  const auto header = StreamHeader(channels, sample_rate, 0);
  std::fwrite(header.data(), 1, header.size(), file_);
  sample_rate_ = sample_rate;
}

WavStreamWriter::~WavStreamWriter() { Close(); }

void WavStreamWriter::Write(const float* interleaved, size_t frames) {
  if (file_ == nullptr) return;
  std::fwrite(interleaved, sizeof(float), frames * size_t(channels_), file_);
  frames_ += frames;
}

void WavStreamWriter::Close() {
  if (file_ == nullptr) return;
  const auto header = StreamHeader(channels_, sample_rate_, frames_);
  std::fseek(file_, 0, SEEK_SET);
  std::fwrite(header.data(), 1, header.size(), file_);
  std::fclose(file_);
  file_ = nullptr;
}

}  // namespace auralab
