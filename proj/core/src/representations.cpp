// core/src/representations.cpp

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

#include "mspec/representations.hpp"

#include <algorithm>
#include <cmath>

#include "mspec/dsp.hpp"
#include "mspec/linalg.hpp"

namespace mspec::repr {

namespace {
constexpr double kLogFloor = 1e-10;
}

std::string kind_name(Kind kind) {
  switch (kind) {
    case Kind::kWideband: return "wideband";
    case Kind::kNarrowband: return "narrowband";
    case Kind::kWavelet: return "wavelet";
  }
  return "unknown";
}

Kind kind_from_name(const std::string &name) {
  if (name == "wideband") return Kind::kWideband;
  if (name == "narrowband") return Kind::kNarrowband;
  if (name == "wavelet") return Kind::kWavelet;
  throw ValueError("unknown representation '" + name +
                   "' (expected wideband, narrowband or wavelet)");
}

RepresentationSpec RepresentationSpec::wideband() {
  return {Kind::kWideband, 5.0, 3.0, 64};
}

RepresentationSpec RepresentationSpec::narrowband() {
  return {Kind::kNarrowband, 30.0, 10.0, 128};
}

RepresentationSpec RepresentationSpec::wavelet() {
  return {Kind::kWavelet, 0.0, 0.0, 64};
}

int RepresentationSpec::window_samples(int sample_rate_hz) const {
  return static_cast<int>(std::lround(window_ms * 1e-3 * sample_rate_hz));
}

int RepresentationSpec::hop_samples(int sample_rate_hz) const {
  return static_cast<int>(std::lround(shift_ms * 1e-3 * sample_rate_hz));
}

int RepresentationSpec::fft_size(int sample_rate_hz) const {
  return dsp::next_pow2(window_samples(sample_rate_hz));
}

Matrix mel_power_matrix(const audio::Segment &segment, const RepresentationSpec &spec,
                        int sample_rate_hz) {
  if (spec.kind == Kind::kWavelet)
    throw ValueError("mel_power_matrix: spec must be wideband or narrowband");
  const int win = spec.window_samples(sample_rate_hz);
  const int hop = spec.hop_samples(sample_rate_hz);
  const int nfft = spec.fft_size(sample_rate_hz);

  const Matrix power = dsp::stft_power(segment.samples, win, hop, nfft);
  const Matrix fb = dsp::mel_filterbank(spec.n_bands, nfft, sample_rate_hz);

  Matrix mel(spec.n_bands, power.cols());
  linalg::matmul(fb.data(), power.data(), mel.data(), fb.rows(), fb.cols(), power.cols());
  return mel;
}

Matrix scalogram_matrix(const audio::Segment &segment, const RepresentationSpec &spec,
                        int sample_rate_hz) {
  if (spec.kind != Kind::kWavelet)
    throw ValueError("scalogram_matrix: spec must be wavelet");
  const std::vector<double> scales = dsp::morlet_scales(
      spec.n_bands, kWaveletFreqMinHz, kWaveletFreqMaxHz, sample_rate_hz, kMorletOmega0);
  return dsp::cwt_magnitude(segment.samples, scales, kMorletOmega0);
}

std::vector<double> scalogram_row_frequencies(const RepresentationSpec &spec,
                                              int sample_rate_hz) {
  const std::vector<double> scales = dsp::morlet_scales(
      spec.n_bands, kWaveletFreqMinHz, kWaveletFreqMaxHz, sample_rate_hz, kMorletOmega0);
  std::vector<double> freqs(scales.size());
  for (size_t i = 0; i < scales.size(); ++i)
    freqs[i] = dsp::morlet_pseudo_frequency(scales[i], sample_rate_hz, kMorletOmega0);
  return freqs;
}

Matrix finalize_image(const Matrix &raw) {
  Matrix logged(raw.rows(), raw.cols());
  for (int r = 0; r < raw.rows(); ++r)
    for (int c = 0; c < raw.cols(); ++c)
      logged(r, c) = std::log(raw(r, c) + kLogFloor);

  Matrix resized = dsp::bicubic_resize(logged, kImageRows, kImageCols);

  double lo = resized(0, 0), hi = resized(0, 0);
  for (const double v : resized.storage()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // a span at rounding-noise level means the raw image was constant
  const double span = hi - lo;
  if (span <= 1e-12 * std::max({1.0, std::fabs(hi), std::fabs(lo)})) {
    std::fill(resized.storage().begin(), resized.storage().end(), 0.0);
    return resized;
  }
  for (double &v : resized.storage()) v = (v - lo) / span;
  return resized;
}

namespace {

TimeFreqImage make_image(Matrix values, const RepresentationSpec &spec) {
  TimeFreqImage image;
  image.values = std::move(values);
  image.spec = spec;
  return image;
}

}  // namespace

TimeFreqImage mel_spectrogram(const audio::Segment &segment, const RepresentationSpec &spec,
                              int sample_rate_hz) {
  if (spec.kind == Kind::kWavelet)
    throw ValueError("mel_spectrogram: spec must be wideband or narrowband");
  return make_image(finalize_image(mel_power_matrix(segment, spec, sample_rate_hz)), spec);
}

TimeFreqImage wavelet_scalogram(const audio::Segment &segment, const RepresentationSpec &spec,
                                int sample_rate_hz) {
  if (spec.kind != Kind::kWavelet)
    throw ValueError("wavelet_scalogram: spec must be wavelet");
  return make_image(finalize_image(scalogram_matrix(segment, spec, sample_rate_hz)), spec);
}

TimeFreqImage compute_image(const audio::Segment &segment, const RepresentationSpec &spec,
                            int sample_rate_hz) {
  return spec.kind == Kind::kWavelet ? wavelet_scalogram(segment, spec, sample_rate_hz)
                                     : mel_spectrogram(segment, spec, sample_rate_hz);
}

}  // namespace mspec::repr
