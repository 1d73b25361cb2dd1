// core/include/mspec/synth.hpp

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

#ifndef MSPEC_SYNTH_HPP_
#define MSPEC_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mspec/manifest.hpp"
#include "mspec/rng.hpp"

namespace mspec::pipeline {

// Two-class DDK-like corpus generator. Controls get syllable trains with
// high fundamental-frequency variability, sharp burst onsets and varying
// loudness; the patient class blends toward monotone pitch, smeared onsets
// and flat loudness, controlled by a per-speaker degradation coefficient
// that also yields the synthetic severity (0..52).
//
// kSplitCue is a diagnostic profile for the fusion experiments: half of the
// patients carry only the temporal cue (smeared bursts), the other half only
// the spectral cue (monotone pitch).
enum class SynthProfile { kStandard, kSplitCue };

SynthProfile synth_profile_from_name(const std::string &name);

struct SynthSpec {
  int speakers_per_class = 20;
  int utterances_per_speaker = 1;
  double utterance_seconds = 2.0;
  SynthProfile profile = SynthProfile::kStandard;
};

struct VoiceParams {
  double base_f0_hz = 140.0;
  double f0_syllable_sigma = 0.15;   // relative per-syllable pitch spread
  double vibrato_extent = 0.05;      // relative intra-syllable modulation
  double contour_extent = 0.08;      // slow utterance-level pitch contour
  double attack_ms = 3.0;            // onset ramp of bursts and vowels
  double burst_gain = 1.0;           // plosive burst level vs vowel level
  double intensity_sigma_db = 5.0;   // per-syllable loudness spread
  double degradation = 0.0;          // g in [0, 1]
  double severity = 0.0;             // 52 * g
  std::array<double, 2> formants{700.0, 1300.0};
  int cue_subtype = 0;  // 0: both cues follow g; 1: temporal only; 2: spectral only
};

// subtype is only honoured for patients in the kSplitCue profile.
VoiceParams sample_voice(Rng &rng, bool patient, SynthProfile profile, int subtype = 0);

struct SynthUtterance {
  std::vector<double> samples;
  std::vector<double> burst_times_s;  // ground-truth onsets
};

SynthUtterance synth_utterance(const VoiceParams &voice, double seconds, int sample_rate_hz,
                               Rng &rng);

struct SynthResult {
  std::string manifest_path;
  std::vector<std::string> speaker_ids;
};

// Writes <out_dir>/wav/*.wav and <out_dir>/manifest.csv. Fully determined by
// (spec, seed).
SynthResult synth_corpus(const SynthSpec &spec, uint64_t seed, const std::string &out_dir);

}  // namespace mspec::pipeline

#endif  // MSPEC_SYNTH_HPP_
