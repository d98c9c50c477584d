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

#pragma once

#include <cmath>
#include <filesystem>
#include <span>
#include <vector>

namespace p804 {

inline constexpr int kDefaultSampleRate = 48000;

struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate_hz = kDefaultSampleRate;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }

  bool operator==(const AudioBuffer&) const = default;
};

double rms(std::span<const double> x);
double peak(std::span<const double> x);
/// RMS in dB relative to full scale (a full-scale square wave is 0 dB).
/// Returns -infinity for silence.
double rms_db(std::span<const double> x);
inline double db_to_gain(double db) { return std::pow(10.0, db / 20.0); }

std::size_t seconds_to_samples(double seconds, int sample_rate_hz);

enum class WavEncoding { Pcm16, Float32 };

/// Mono WAV only. Stereo input is rejected with Error("io").
AudioBuffer read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavEncoding encoding = WavEncoding::Pcm16);

}  // namespace p804
