// core/include/mspec/audio.hpp

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

#ifndef MSPEC_AUDIO_HPP_
#define MSPEC_AUDIO_HPP_

#include <optional>
#include <string>
#include <vector>

#include "mspec/errors.hpp"

namespace mspec::audio {

// Rate every clip is converted to on load. 500 ms of signal at this rate is
// the unit all downstream representations are computed from.
constexpr int kPipelineRateHz = 16000;
constexpr double kSegmentSeconds = 0.5;

struct AudioClip {
  std::vector<double> samples;  // amplitudes in [-1, 1]
  int sample_rate_hz = kPipelineRateHz;
  std::string speaker_id;
  std::string utterance_id;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

// One fixed-length analysis window cut from a clip (zero-padded at clip
// boundaries).
struct Segment {
  std::vector<double> samples;
  double onset_time_s = 0.0;
};

class WavError : public IoError {
 public:
  enum class Kind { kUnreadable, kMultichannel, kUnsupportedEncoding };

  WavError(Kind kind, const std::string &msg) : IoError(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Reads a mono PCM WAV (8/16/24-bit integer or 32-bit float), scales samples
// to [-1, 1] and resamples to kPipelineRateHz when the file rate differs.
AudioClip load_audio(const std::string &path);

// 16-bit PCM writer used by the synthetic corpus generator and the tests.
// Samples are clipped to [-1, 1] before quantization.
void write_wav_pcm16(const std::string &path, const std::vector<double> &samples,
                     int sample_rate_hz);

// Burst-onset proxy: peaks of the 25 ms-hop short-time energy derivative that
// exceed its 80th percentile, thinned to a minimum separation of 150 ms.
// Returns onset times in seconds, ascending.
std::vector<double> detect_onsets(const AudioClip &clip);

// One 500 ms segment per onset. When no alignment list is supplied the
// detector above provides the onsets. Alignments outside the clip duration
// are rejected.
std::vector<Segment> segment_aligned(const AudioClip &clip,
                                     const std::optional<std::vector<double>> &alignments);

// Alignment files: plain text, one onset time in seconds per line.
std::vector<double> read_alignment_file(const std::string &path);

}  // namespace mspec::audio

#endif  // MSPEC_AUDIO_HPP_
