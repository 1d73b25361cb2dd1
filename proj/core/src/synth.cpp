// core/src/synth.cpp

// Copyright 2026  MSpec authors

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

#include "mspec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "mspec/audio.hpp"
#include "mspec/errors.hpp"

namespace fs = std::filesystem;

namespace mspec::pipeline {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

SynthProfile synth_profile_from_name(const std::string &name) {
  if (name == "standard") return SynthProfile::kStandard;
  if (name == "split") return SynthProfile::kSplitCue;
  throw ValueError("unknown synth profile '" + name + "' (expected standard or split)");
}

VoiceParams sample_voice(Rng &rng, bool patient, SynthProfile profile, int subtype) {
  std::uniform_real_distribution<double> uf(0.0, 1.0);

  VoiceParams v;
  v.base_f0_hz = 95.0 + 140.0 * uf(rng);
  v.formants[0] = 550.0 + 300.0 * uf(rng);
  v.formants[1] = 1100.0 + 600.0 * uf(rng);

  double g_temporal, g_spectral, g_intensity;
  if (profile == SynthProfile::kStandard || !patient) {
    double g;
    if (profile == SynthProfile::kStandard)
      g = patient ? 0.4 + 0.6 * uf(rng) : 0.3 * uf(rng);
    else
      g = 0.2 * uf(rng);  // split-cue controls stay healthy on both cues
    g_temporal = g_spectral = g_intensity = g;
    v.degradation = g;
    v.cue_subtype = 0;
  } else {
    // split-cue patient: exactly one degraded cue
    const double strong = 0.6 + 0.4 * uf(rng);
    const double weak = 0.2 * uf(rng);
    if (subtype == 1) {
      g_temporal = strong;
      g_spectral = weak;
    } else {
      g_temporal = weak;
      g_spectral = strong;
    }
    g_intensity = 0.0;
    v.degradation = strong;
    v.cue_subtype = subtype;
  }

  v.f0_syllable_sigma = 0.15 * (1.0 - 0.88 * g_spectral);
  v.vibrato_extent = 0.05 * (1.0 - 0.88 * g_spectral);
  v.contour_extent = 0.08 * (1.0 - 0.88 * g_spectral);
  v.attack_ms = 2.5 + 45.0 * g_temporal;
  v.burst_gain = 1.0 - 0.55 * g_temporal;
  v.intensity_sigma_db =
      profile == SynthProfile::kSplitCue ? 2.0 : 5.0 * (1.0 - 0.8 * g_intensity);
  v.severity = eval::kSeverityMax * v.degradation;
  return v;
}

SynthUtterance synth_utterance(const VoiceParams &voice, double seconds, int sample_rate_hz,
                               Rng &rng) {
  if (seconds <= 0.3) throw ValueError("synth_utterance: utterance too short");
  const int n = static_cast<int>(std::lround(seconds * sample_rate_hz));
  SynthUtterance utt;
  utt.samples.assign(static_cast<size_t>(n), 0.0);

  std::uniform_real_distribution<double> uf(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double attack_s = voice.attack_ms * 1e-3;
  const double contour_phase = kTwoPi * uf(rng);
  const double vib_phase = kTwoPi * uf(rng);

  // spectral envelope with two resonance bumps
  auto envelope = [&voice](double f) {
    const double d1 = (f - voice.formants[0]) / 160.0;
    const double d2 = (f - voice.formants[1]) / 220.0;
    return (1.0 + 2.0 * std::exp(-d1 * d1) + 1.2 * std::exp(-d2 * d2)) / (1.0 + f / 900.0);
  };

  double t = 0.06;
  const double period = 0.28;
  while (t + period < seconds - 0.05) {
    const double syllable_start = t;
    utt.burst_times_s.push_back(syllable_start);

    const double syl_gain = std::pow(10.0, gauss(rng) * voice.intensity_sigma_db / 20.0);

    // plosive-like burst: decaying noise through the onset ramp
    {
      const int start = static_cast<int>(std::lround(syllable_start * sample_rate_hz));
      const int len = static_cast<int>(std::lround(0.020 * sample_rate_hz));
      for (int i = 0; i < len && start + i < n; ++i) {
        const double tt = static_cast<double>(i) / sample_rate_hz;
        const double ramp = std::min(1.0, tt / attack_s);
        const double decay = std::exp(-tt / 0.004);
        utt.samples[static_cast<size_t>(start + i)] +=
            0.55 * voice.burst_gain * syl_gain * ramp * decay * gauss(rng);
      }
    }

    // vowel: harmonic source with per-syllable pitch deviation, vibrato and
    // a slow utterance-level contour
    {
      const double dev = gauss(rng) * voice.f0_syllable_sigma;
      const double f0_syl = voice.base_f0_hz * std::max(0.5, 1.0 + dev);
      const double vowel_start = syllable_start + 0.026;
      const double vowel_len = 0.165;
      const int start = static_cast<int>(std::lround(vowel_start * sample_rate_hz));
      const int len = static_cast<int>(std::lround(vowel_len * sample_rate_hz));

      const int n_harm = std::max(1, static_cast<int>(4000.0 / f0_syl));
      std::vector<double> amps(static_cast<size_t>(n_harm));
      for (int h = 1; h <= n_harm; ++h)
        amps[static_cast<size_t>(h - 1)] = envelope(h * f0_syl) / h;

      double phase = 0.0;
      for (int i = 0; i < len && start + i < n; ++i) {
        const double tt = static_cast<double>(i) / sample_rate_hz;
        const double abs_t = vowel_start + tt;
        const double contour =
            1.0 + voice.contour_extent * std::sin(kTwoPi * 0.8 * abs_t + contour_phase);
        const double vibrato =
            1.0 + voice.vibrato_extent * std::sin(kTwoPi * 5.5 * tt + vib_phase);
        const double f0 = f0_syl * contour * vibrato;
        phase += kTwoPi * f0 / sample_rate_hz;

        const double ramp = std::min(1.0, tt / attack_s);
        const double release =
            std::min(1.0, (vowel_len - tt) / 0.040);
        double s = 0.0;
        for (int h = 1; h <= n_harm; ++h) s += amps[static_cast<size_t>(h - 1)] * std::sin(h * phase);
        utt.samples[static_cast<size_t>(start + i)] +=
            0.16 * syl_gain * ramp * std::max(0.0, release) * s;
      }
    }

    t += period * (1.0 + 0.16 * (uf(rng) - 0.5));
  }

  // low noise floor and soft normalization
  for (double &s : utt.samples) s += 1e-4 * gauss(rng);
  double peak = 0.0;
  for (const double s : utt.samples) peak = std::max(peak, std::fabs(s));
  if (peak > 0.95)
    for (double &s : utt.samples) s *= 0.95 / peak;
  return utt;
}

SynthResult synth_corpus(const SynthSpec &spec, uint64_t seed, const std::string &out_dir) {
  if (spec.speakers_per_class < 1 || spec.utterances_per_speaker < 1)
    throw ValueError("synth_corpus: need at least one speaker and utterance per class");

  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "wav", ec);
  if (ec) throw IoError("synth_corpus: cannot create output directory '" + out_dir + "'");

  Manifest manifest;
  SynthResult result;

  int patient_index = 0;
  for (const bool patient : {false, true}) {
    for (int k = 0; k < spec.speakers_per_class; ++k) {
      char id[16];
      std::snprintf(id, sizeof id, "%s%03d", patient ? "p" : "c", k);
      const std::string speaker_id(id);
      result.speaker_ids.push_back(speaker_id);

      Rng rng = make_rng(seed, "speaker_" + speaker_id);
      const int subtype = patient ? (patient_index % 2) + 1 : 0;
      if (patient) ++patient_index;
      const VoiceParams voice = sample_voice(rng, patient, spec.profile, subtype);

      for (int u = 0; u < spec.utterances_per_speaker; ++u) {
        const SynthUtterance utt =
            synth_utterance(voice, spec.utterance_seconds, audio::kPipelineRateHz, rng);
        const std::string wav_name = speaker_id + "_u" + std::to_string(u) + ".wav";
        const fs::path wav_path = fs::path(out_dir) / "wav" / wav_name;
        audio::write_wav_pcm16(wav_path.string(), utt.samples, audio::kPipelineRateHz);

        ManifestRow row;
        row.audio_path = wav_path.string();
        row.speaker_id = speaker_id;
        row.utterance_id = "u" + std::to_string(u);
        row.label = patient ? 1 : -1;
        row.severity = std::round(voice.severity * 10.0) / 10.0;
        manifest.rows.push_back(std::move(row));
      }
    }
  }

  const fs::path manifest_path = fs::path(out_dir) / "manifest.csv";
  write_manifest(manifest, manifest_path.string());
  result.manifest_path = manifest_path.string();
  return result;
}

}  // namespace mspec::pipeline
