// Copyright 2026 The p804kit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "p804/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "p804/error.hpp"

namespace p804 {

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  long double acc = 0.0;
  for (double v : x) acc += static_cast<long double>(v) * v;
  return static_cast<double>(std::sqrt(acc / x.size()));
}

double peak(std::span<const double> x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::abs(v));
  return p;
}

double rms_db(std::span<const double> x) {
  const double r = rms(x);
  if (r <= 0.0) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(r);
}

std::size_t seconds_to_samples(double seconds, int sample_rate_hz) {
  require(seconds >= 0.0, "invalid-argument", "negative duration");
  return static_cast<std::size_t>(std::llround(seconds * sample_rate_hz));
}

namespace {

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(const std::vector<char>& bytes, std::size_t offset) {
  require(offset + sizeof(T) <= bytes.size(), "io", "truncated WAV file");
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

}  // namespace

// RIFF fields are little-endian; so is every platform this builds on.
AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("io", "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          "io", path.string() + " is not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_offset = 0, data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(bytes.data() + pos, 4);
    const auto size = get<std::uint32_t>(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      format = get<std::uint16_t>(bytes, body);
      channels = get<std::uint16_t>(bytes, body + 2);
      rate = get<std::uint32_t>(bytes, body + 4);
      bits = get<std::uint16_t>(bytes, body + 14);
      if (format == 0xFFFE && size >= 26) format = get<std::uint16_t>(bytes, body + 24);
    } else if (id == "data") {
      data_offset = body;
      data_size = std::min<std::size_t>(size, bytes.size() - body);
      break;
    }
    pos = body + size + (size & 1u);
  }
  require(data_offset != 0 && rate != 0, "io", path.string() + " lacks fmt or data chunk");
  require(channels == 1, "io", path.string() + " must be mono");

  AudioBuffer out;
  out.sample_rate_hz = static_cast<int>(rate);
  if (format == 1 && bits == 16) {
    out.samples.resize(data_size / 2);
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
      out.samples[i] = get<std::int16_t>(bytes, data_offset + 2 * i) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    out.samples.resize(data_size / 4);
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
      out.samples[i] = get<float>(bytes, data_offset + 4 * i);
    }
  } else {
    fail("io", path.string() + ": only PCM16 and float32 WAV are supported");
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio, WavEncoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("io", "cannot write " + path.string());
  const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint16_t format = encoding == WavEncoding::Pcm16 ? 1 : 3;
  const std::uint32_t bytes_per_sample = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(audio.samples.size() * bytes_per_sample);
  const auto rate = static_cast<std::uint32_t>(audio.sample_rate_hz);

  out.write("RIFF", 4);
  put<std::uint32_t>(out, 36 + data_size);
  out.write("WAVEfmt ", 8);
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, format);
  put<std::uint16_t>(out, 1);
  put<std::uint32_t>(out, rate);
  put<std::uint32_t>(out, rate * bytes_per_sample);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(bytes_per_sample));
  put<std::uint16_t>(out, bits);
  out.write("data", 4);
  put<std::uint32_t>(out, data_size);
  for (double v : audio.samples) {
    const double c = std::clamp(v, -1.0, 1.0);
    if (encoding == WavEncoding::Pcm16) {
      put<std::int16_t>(out, static_cast<std::int16_t>(std::lround(std::clamp(c * 32768.0, -32768.0, 32767.0))));
    } else {
      put<float>(out, static_cast<float>(c));
    }
  }
  if (!out) fail("io", "failed writing " + path.string());
}

}  // namespace p804
