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

#include "p804/stimuli.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "p804/error.hpp"
#include "p804/random.hpp"

namespace p804 {

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double kaiser_beta(double attenuation_db) {
  if (attenuation_db > 50.0) return 0.1102 * (attenuation_db - 8.7);
  if (attenuation_db >= 21.0) {
    return 0.5842 * std::pow(attenuation_db - 21.0, 0.4) + 0.07886 * (attenuation_db - 21.0);
  }
  return 0.0;
}

void scale_in_place(std::vector<double>& x, double gain) {
  for (auto& v : x) v *= gain;
}

void limit_peak(std::vector<double>& x) {
  const double p = peak(x);
  if (p > 1.0) scale_in_place(x, 1.0 / p);
}

}  // namespace

std::string_view to_string(BandMeaning m) {
  switch (m) {
    case BandMeaning::AllDevices: return "all-devices";
    case BandMeaning::SwbOrFb: return "swb-or-fb";
    case BandMeaning::FbOnly: return "fb-only";
  }
  return "?";
}

void validate_band(const BandSpec& band, int sample_rate_hz) {
  require(sample_rate_hz > 0, "invalid-argument", "sample rate must be positive");
  require(band.low_hz > 0.0 && band.low_hz < band.high_hz, "invalid-argument", "band edges must satisfy 0 < low < high");
  require(band.high_hz <= sample_rate_hz / 2.0, "invalid-argument",
          "band edge " + std::to_string(band.high_hz) + " Hz lies above Nyquist");
}

BandpassFilter::BandpassFilter(const BandSpec& band, int sample_rate_hz) {
  validate_band(band, sample_rate_hz);
  const double fs = sample_rate_hz;
  const double nyquist = fs / 2.0;
  const double third_octave = std::cbrt(2.0);

  // Transition bands sit outside [low, high] and end well before the
  // third-octave points where rejection is measured.
  double transition = 0.5 * band.low_hz * (1.0 - 1.0 / third_octave);
  const bool has_upper = band.high_hz < nyquist;
  if (has_upper) {
    transition = std::min({transition, 0.5 * band.high_hz * (third_octave - 1.0), nyquist - band.high_hz});
  }
  const double low_cut = band.low_hz - transition / 2.0;
  const double high_cut = band.high_hz + transition / 2.0;

  const double a = kDesignAttenuationDb;
  const auto order = static_cast<std::size_t>(std::ceil((a - 7.95) / (2.285 * 2.0 * std::numbers::pi * transition / fs)));
  const std::size_t n = order % 2 == 0 ? order + 1 : order + 2;
  const double beta = kaiser_beta(a);
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  const double centre = static_cast<double>(n - 1) / 2.0;

  taps_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = static_cast<double>(i) - centre;
    const double r = m / centre;
    const double window = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    const double lp_high = has_upper ? 2.0 * high_cut / fs * sinc(2.0 * high_cut / fs * m) : (m == 0.0 ? 1.0 : 0.0);
    const double lp_low = 2.0 * low_cut / fs * sinc(2.0 * low_cut / fs * m);
    taps_[i] = window * (lp_high - lp_low);
  }
}

std::vector<double> BandpassFilter::apply(std::span<const double> x) const {
  const std::size_t n = x.size();
  const std::size_t d = delay();
  const std::size_t taps = taps_.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    // y[i] = sum_k h[k] x[i + k - d]
    const std::size_t k_begin = i < d ? d - i : 0;
    const std::size_t k_end = std::min(taps, n + d - i);
    double acc = 0.0;
    for (std::size_t k = k_begin; k < k_end; ++k) acc += taps_[k] * x[i + k - d];
    y[i] = acc;
  }
  return y;
}

std::vector<double> BandpassFilter::apply_valid(std::span<const double> x) const {
  const std::size_t taps = taps_.size();
  if (x.size() < taps) return {};
  std::vector<double> y(x.size() - taps + 1);
  for (std::size_t i = 0; i < y.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < taps; ++k) acc += taps_[k] * x[i + k];
    y[i] = acc;
  }
  return y;
}

AudioBuffer bandpass_noise(const BandSpec& band, double duration_s, int sample_rate_hz, std::uint64_t seed,
                           const NoiseOptions& options) {
  const BandpassFilter filter(band, sample_rate_hz);
  AudioBuffer out;
  out.sample_rate_hz = sample_rate_hz;
  const std::size_t n = seconds_to_samples(duration_s, sample_rate_hz);
  if (n == 0) return out;

  Rng rng(seed);
  std::vector<double> white(n + filter.taps().size() - 1);
  for (auto& v : white) v = rng.normal();
  out.samples = filter.apply_valid(white);

  const double r = rms(out.samples);
  if (r > 0.0) scale_in_place(out.samples, db_to_gain(options.level_db) / r);
  limit_peak(out.samples);
  return out;
}

AudioBuffer synthesize_beep(double freq_hz, double duration_s, int sample_rate_hz, double level_db, double fade_s) {
  require(freq_hz > 0.0 && freq_hz < sample_rate_hz / 2.0, "invalid-argument", "beep frequency must lie below Nyquist");
  AudioBuffer out;
  out.sample_rate_hz = sample_rate_hz;
  const std::size_t n = seconds_to_samples(duration_s, sample_rate_hz);
  if (n == 0) return out;
  const double amplitude = std::min(1.0, std::numbers::sqrt2 * db_to_gain(level_db));
  const std::size_t fade = std::min(seconds_to_samples(fade_s, sample_rate_hz), n / 2);
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double env = 1.0;
    if (fade > 0) {
      const std::size_t edge = std::min(i, n - 1 - i);
      if (edge < fade) env = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(edge) / fade));
    }
    out.samples[i] = amplitude * env * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / sample_rate_hz);
  }
  return out;
}

AudioBuffer create_trapping_clip(const AudioBuffer& source, const AudioBuffer& instruction, double onset_s,
                                 double gain_db) {
  require(onset_s >= 0.0, "invalid-argument", "onset must be non-negative");
  require(source.sample_rate_hz == instruction.sample_rate_hz, "invalid-argument",
          "source and instruction sample rates differ");
  const std::size_t onset = seconds_to_samples(onset_s, source.sample_rate_hz);

  double gain = 1.0;
  const double source_rms = rms(source.samples);
  const double instruction_rms = rms(instruction.samples);
  if (source_rms > 0.0 && instruction_rms > 0.0) gain = source_rms * db_to_gain(gain_db) / instruction_rms;

  AudioBuffer out;
  out.sample_rate_hz = source.sample_rate_hz;
  out.samples.assign(std::max(source.size(), onset + instruction.size()), 0.0);
  std::copy(source.samples.begin(), source.samples.end(), out.samples.begin());
  for (std::size_t i = 0; i < instruction.size(); ++i) out.samples[onset + i] += gain * instruction.samples[i];
  limit_peak(out.samples);
  return out;
}

std::string DigitTriplet::answer_string() const {
  std::string s;
  for (int d : answer) s += static_cast<char>('0' + d);
  return s;
}

DigitTriplet assemble_digit_triplet(const std::array<DigitRecording, 3>& digits, const AudioBuffer& noise,
                                    double snr_db, double gap_s) {
  const int fs = digits[0].audio.sample_rate_hz;
  for (const auto& d : digits) {
    require(d.digit >= 0 && d.digit <= 9, "invalid-argument", "digit labels must lie in 0..9");
    require(d.audio.sample_rate_hz == fs, "invalid-argument", "digit recordings have mismatched sample rates");
  }
  require(noise.sample_rate_hz == fs, "invalid-argument", "noise sample rate differs from digit recordings");
  require(!noise.empty() && rms(noise.samples) > 0.0, "invalid-argument", "noise must be non-silent");

  DigitTriplet out;
  out.audio.sample_rate_hz = fs;
  const std::size_t gap = seconds_to_samples(gap_s, fs);
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0) out.audio.samples.insert(out.audio.samples.end(), gap, 0.0);
    const auto& s = digits[i].audio.samples;
    out.audio.samples.insert(out.audio.samples.end(), s.begin(), s.end());
    out.answer[i] = digits[i].digit;
  }

  std::vector<double> masker(out.audio.size());
  for (std::size_t i = 0; i < masker.size(); ++i) masker[i] = noise.samples[i % noise.size()];
  const double speech_rms = rms(out.audio.samples);
  const double masker_rms = rms(masker);
  const double gain = speech_rms > 0.0 ? speech_rms / (db_to_gain(snr_db) * masker_rms) : 0.0;
  for (std::size_t i = 0; i < masker.size(); ++i) out.audio.samples[i] += gain * masker[i];
  limit_peak(out.audio.samples);
  return out;
}

NormalizedAudio normalize_level(const AudioBuffer& audio, double target_rms_db) {
  NormalizedAudio out{audio, LevelWarning::None};
  const double r = rms(audio.samples);
  if (r <= 0.0) {
    out.warning = LevelWarning::Silent;
    return out;
  }
  scale_in_place(out.audio.samples, db_to_gain(target_rms_db) / r);
  if (peak(out.audio.samples) > 1.0) {
    for (auto& v : out.audio.samples) v = std::clamp(v, -1.0, 1.0);
    out.warning = LevelWarning::Clipped;
  }
  return out;
}

std::string_view to_string(PairAnswer a) { return a == PairAnswer::Same ? "same" : "different"; }

PairAnswer pair_answer_from_string(std::string_view s) {
  if (s == "same") return PairAnswer::Same;
  if (s == "different") return PairAnswer::Different;
  fail("invalid-argument", "pair answer must be 'same' or 'different', got '" + std::string(s) + "'");
}

BandwidthCheckSet make_bandwidth_check_set(const AudioBuffer& speech_clip, const BandwidthCheckOptions& options) {
  const int fs = speech_clip.sample_rate_hz;
  const std::size_t part = seconds_to_samples(options.part_duration_s, fs);
  require(part > 0, "invalid-argument", "bandwidth-check part duration must be positive");
  require(speech_clip.size() >= part, "clip-too-short",
          "speech clip is shorter than the " + std::to_string(options.part_duration_s) + " s bandwidth-check part");

  const std::vector<double> part_a(speech_clip.samples.begin(), speech_clip.samples.begin() + static_cast<std::ptrdiff_t>(part));
  const AudioBuffer beep = synthesize_beep(options.beep.freq_hz, options.beep.duration_s, fs, options.beep.level_db,
                                           options.beep.fade_s);
  const double speech_rms = rms(part_a);

  auto assemble = [&](const std::vector<double>& part_b) {
    BandwidthCheckSample s;
    s.part_samples = part;
    s.beep_samples = beep.size();
    s.audio.sample_rate_hz = fs;
    s.audio.samples.reserve(2 * part + beep.size());
    s.audio.samples.insert(s.audio.samples.end(), part_a.begin(), part_a.end());
    s.audio.samples.insert(s.audio.samples.end(), beep.samples.begin(), beep.samples.end());
    s.audio.samples.insert(s.audio.samples.end(), part_b.begin(), part_b.end());
    limit_peak(s.audio.samples);
    return s;
  };

  std::vector<BandwidthCheckSample> samples;
  for (std::size_t b = 0; b < kBandwidthCheckBands.size(); ++b) {
    const auto& band = kBandwidthCheckBands[b];
    NoiseOptions noise_options;
    if (speech_rms > 0.0) noise_options.level_db = 20.0 * std::log10(speech_rms) - options.noise_snr_db;
    const AudioBuffer noise = bandpass_noise(band, options.part_duration_s, fs, derive_seed(options.seed, b + 1), noise_options);
    std::vector<double> part_b = part_a;
    for (std::size_t i = 0; i < part_b.size() && i < noise.size(); ++i) part_b[i] += noise.samples[i];
    auto s = assemble(part_b);
    s.has_noise = true;
    s.band = band;
    samples.push_back(std::move(s));
  }
  for (int i = 0; i < 2; ++i) samples.push_back(assemble(part_a));

  Rng rng(derive_seed(options.seed, fnv1a("bandwidth-order")));
  rng.shuffle(samples);

  BandwidthCheckSet set;
  for (auto& s : samples) {
    set.answer_key.push_back(s.has_noise ? PairAnswer::Different : PairAnswer::Same);
    set.samples.push_back(std::move(s));
  }
  return set;
}

std::vector<BandwidthKeyEntry> bandwidth_key(const BandwidthCheckSet& set) {
  std::vector<BandwidthKeyEntry> key;
  for (std::size_t i = 0; i < set.samples.size(); ++i) key.push_back({set.answer_key[i], set.samples[i].band});
  return key;
}

void to_json(Json& j, const BandSpec& b) {
  j = {{"low_hz", b.low_hz}, {"high_hz", b.high_hz}, {"meaning", std::string(to_string(b.meaning))}};
}

void from_json(const Json& j, BandSpec& b) {
  b.low_hz = j.at("low_hz").get<double>();
  b.high_hz = j.at("high_hz").get<double>();
  const auto m = j.at("meaning").get<std::string>();
  if (m == "all-devices") b.meaning = BandMeaning::AllDevices;
  else if (m == "swb-or-fb") b.meaning = BandMeaning::SwbOrFb;
  else if (m == "fb-only") b.meaning = BandMeaning::FbOnly;
  else fail("invalid-argument", "unknown band meaning '" + m + "'");
}

void to_json(Json& j, const BandwidthKeyEntry& e) {
  j = {{"expected", std::string(to_string(e.expected))}, {"band", e.band ? Json(*e.band) : Json(nullptr)}};
}

void from_json(const Json& j, BandwidthKeyEntry& e) {
  e.expected = pair_answer_from_string(j.at("expected").get<std::string>());
  e.band = j.contains("band") && !j["band"].is_null() ? std::optional(j["band"].get<BandSpec>()) : std::nullopt;
}

}  // namespace p804
