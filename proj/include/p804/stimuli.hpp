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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "p804/audio.hpp"
#include "p804/domain.hpp"

namespace p804 {

/// What a participant's detection of a band's noise tells about the device.
enum class BandMeaning : std::uint8_t { AllDevices, SwbOrFb, FbOnly };

std::string_view to_string(BandMeaning m);

struct BandSpec {
  double low_hz = 0.0;
  double high_hz = 0.0;
  BandMeaning meaning = BandMeaning::AllDevices;

  bool operator==(const BandSpec&) const = default;
};

/// The three bandwidth-check bands: 3.5-22 kHz, 9.5-22 kHz, 15-22 kHz.
inline constexpr std::array<BandSpec, 3> kBandwidthCheckBands = {
    BandSpec{3500.0, 22000.0, BandMeaning::AllDevices},
    BandSpec{9500.0, 22000.0, BandMeaning::SwbOrFb},
    BandSpec{15000.0, 22000.0, BandMeaning::FbOnly},
};

void validate_band(const BandSpec& band, int sample_rate_hz);

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

/// Linear-phase FIR band-pass (Kaiser-windowed sinc). The pass band starts at
/// band.low_hz and ends at band.high_hz; the transition lies outside the band.
class BandpassFilter {
 public:
  static constexpr double kDesignAttenuationDb = 90.0;

  BandpassFilter(const BandSpec& band, int sample_rate_hz);

  std::span<const double> taps() const { return taps_; }
  /// Filter group delay in samples; taps().size() == 2 * delay() + 1.
  std::size_t delay() const { return (taps_.size() - 1) / 2; }

  /// Zero-phase filtering, output aligned with the input, zero-extended edges.
  std::vector<double> apply(std::span<const double> x) const;
  /// Only the fully-supported part: x.size() - taps().size() + 1 samples.
  std::vector<double> apply_valid(std::span<const double> x) const;

 private:
  std::vector<double> taps_;
};

struct NoiseOptions {
  double level_db = -30.0;  // RMS of the filtered noise, dBFS
};

/// Seeded white noise band-limited to `band`.
AudioBuffer bandpass_noise(const BandSpec& band, double duration_s, int sample_rate_hz, std::uint64_t seed,
                           const NoiseOptions& options = {});

// ---------------------------------------------------------------------------
// Beep, trapping clips, digit triplets, level normalization
// ---------------------------------------------------------------------------

struct BeepOptions {
  double freq_hz = 1000.0;
  double duration_s = 0.5;
  double level_db = -20.0;  // RMS, dBFS
  double fade_s = 0.01;
};

AudioBuffer synthesize_beep(double freq_hz, double duration_s, int sample_rate_hz, double level_db = -20.0,
                            double fade_s = 0.01);

/// Overlays a spoken instruction on `source` starting at onset_s, at gain_db
/// relative to the source RMS (unscaled when the source is silent). The mix
/// is scaled down as a whole if its peak would exceed 1.
AudioBuffer create_trapping_clip(const AudioBuffer& source, const AudioBuffer& instruction, double onset_s,
                                 double gain_db);

struct DigitTriplet {
  AudioBuffer audio;
  std::array<int, 3> answer{};
  std::string answer_string() const;
};

struct DigitRecording {
  int digit = 0;
  AudioBuffer audio;
};

/// Digits separated by `gap_s` of silence, mixed with `noise` (looped as needed)
/// so that rms(speech) / rms(noise) == snr_db over the whole output.
DigitTriplet assemble_digit_triplet(const std::array<DigitRecording, 3>& digits, const AudioBuffer& noise,
                                    double snr_db, double gap_s = 0.25);

enum class LevelWarning : std::uint8_t { None, Silent, Clipped };

struct NormalizedAudio {
  AudioBuffer audio;
  LevelWarning warning = LevelWarning::None;
};

NormalizedAudio normalize_level(const AudioBuffer& audio, double target_rms_db);

// ---------------------------------------------------------------------------
// Bandwidth check
// ---------------------------------------------------------------------------

struct BandwidthCheckSample {
  AudioBuffer audio;  // part A + beep + part B
  bool has_noise = false;
  std::optional<BandSpec> band;
  std::size_t part_samples = 0;
  std::size_t beep_samples = 0;
};

enum class PairAnswer : std::uint8_t { Same, Different };

std::string_view to_string(PairAnswer a);
PairAnswer pair_answer_from_string(std::string_view s);

struct BandwidthCheckOptions {
  double part_duration_s = 3.0;
  double noise_snr_db = 20.0;  // speech RMS over added-noise RMS
  BeepOptions beep;
  std::uint64_t seed = 1;
};

struct BandwidthCheckSet {
  std::vector<BandwidthCheckSample> samples;  // presentation order
  std::vector<PairAnswer> answer_key;          // parallel to samples
};

/// Five samples: one per band with noise added to part B, two clean pairs.
BandwidthCheckSet make_bandwidth_check_set(const AudioBuffer& speech_clip, const BandwidthCheckOptions& options);

/// Key entry as served and stored by the session service.
struct BandwidthKeyEntry {
  PairAnswer expected = PairAnswer::Same;
  std::optional<BandSpec> band;

  bool operator==(const BandwidthKeyEntry&) const = default;
};

std::vector<BandwidthKeyEntry> bandwidth_key(const BandwidthCheckSet& set);

void to_json(Json& j, const BandSpec& b);
void from_json(const Json& j, BandSpec& b);
void to_json(Json& j, const BandwidthKeyEntry& e);
void from_json(const Json& j, BandwidthKeyEntry& e);

}  // namespace p804
