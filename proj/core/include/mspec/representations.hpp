// core/include/mspec/representations.hpp

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

#ifndef MSPEC_REPRESENTATIONS_HPP_
#define MSPEC_REPRESENTATIONS_HPP_

#include <string>
#include <vector>

#include "mspec/audio.hpp"
#include "mspec/matrix.hpp"

namespace mspec::repr {

enum class Kind { kWideband, kNarrowband, kWavelet };

std::string kind_name(Kind kind);
Kind kind_from_name(const std::string &name);

// All produced images share one canonical size.
constexpr int kImageRows = 128;
constexpr int kImageCols = 126;

// Parameters of one time-frequency representation. The three presets follow
// the fixed analysis settings below; target size is always 128 x 126.
struct RepresentationSpec {
  Kind kind = Kind::kNarrowband;
  double window_ms = 30.0;  // unused for kWavelet
  double shift_ms = 10.0;   // unused for kWavelet
  int n_bands = 128;        // Mel bands, or wavelet scale count

  static RepresentationSpec wideband();    // 5 ms window, 3 ms shift, 64 bands
  static RepresentationSpec narrowband();  // 30 ms window, 10 ms shift, 128 bands
  static RepresentationSpec wavelet();     // 64 scales, 80 Hz .. 8 kHz

  int window_samples(int sample_rate_hz) const;
  int hop_samples(int sample_rate_hz) const;
  int fft_size(int sample_rate_hz) const;  // next power of two >= window
};

// Wavelet analysis constants (Morlet).
constexpr double kMorletOmega0 = 6.0;
constexpr double kWaveletFreqMinHz = 80.0;
constexpr double kWaveletFreqMaxHz = 8000.0;

struct TimeFreqImage {
  Matrix values;  // kImageRows x kImageCols, in [0, 1]
  RepresentationSpec spec;
  int segment_index = 0;
  std::string speaker_id;
  std::string utterance_id;
};

// Pre-resize Mel power (n_bands x frames), before log compression. Exposed
// for the analytic band tests and the energy-scaling property.
Matrix mel_power_matrix(const audio::Segment &segment, const RepresentationSpec &spec,
                        int sample_rate_hz);

// Pre-resize scalogram magnitude (n_bands x segment length).
Matrix scalogram_matrix(const audio::Segment &segment, const RepresentationSpec &spec,
                        int sample_rate_hz);

// Pseudo-frequency (Hz) of each scalogram row, ascending.
std::vector<double> scalogram_row_frequencies(const RepresentationSpec &spec,
                                              int sample_rate_hz);

// log(x + 1e-10), bicubic resize to 128 x 126, then per-image min-max to
// [0, 1] (an all-constant image maps to zeros).
Matrix finalize_image(const Matrix &raw);

TimeFreqImage mel_spectrogram(const audio::Segment &segment, const RepresentationSpec &spec,
                              int sample_rate_hz = audio::kPipelineRateHz);

TimeFreqImage wavelet_scalogram(const audio::Segment &segment, const RepresentationSpec &spec,
                                int sample_rate_hz = audio::kPipelineRateHz);

// Dispatches on spec.kind.
TimeFreqImage compute_image(const audio::Segment &segment, const RepresentationSpec &spec,
                            int sample_rate_hz = audio::kPipelineRateHz);

}  // namespace mspec::repr

#endif  // MSPEC_REPRESENTATIONS_HPP_
