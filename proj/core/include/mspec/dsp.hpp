// core/include/mspec/dsp.hpp

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

#ifndef MSPEC_DSP_HPP_
#define MSPEC_DSP_HPP_

#include <complex>
#include <vector>

#include "mspec/matrix.hpp"

namespace mspec::dsp {

// ---------------------------------------------------------------------------
// FFT (radix-2, power-of-two sizes). A dependency-free transform keeps the
// whole front-end bit-deterministic across builds with different BLAS/FFT
// packages installed.
// ---------------------------------------------------------------------------

int next_pow2(int n);

// In-place complex FFT. size must be a power of two. The inverse transform
// includes the 1/N scaling.
void fft_inplace(std::vector<std::complex<double>> &buf, bool inverse);

// ---------------------------------------------------------------------------
// Short-time analysis
// ---------------------------------------------------------------------------

// Number of full analysis frames: floor((n - win) / hop) + 1, or 0 if the
// signal is shorter than one window.
int frame_count(long long n_samples, int win_len, int hop);

// Symmetric Hann window of the given length.
std::vector<double> hann_window(int length);

// Power spectrogram, (nfft/2 + 1) rows x frame_count columns. Each frame is
// Hann-windowed and zero-padded to nfft.
Matrix stft_power(const std::vector<double> &samples, int win_len, int hop, int nfft);

// HTK Mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular, area-unnormalized Mel filterbank spanning 0..Nyquist:
// n_bands rows x (nfft/2 + 1) columns.
Matrix mel_filterbank(int n_bands, int nfft, double sample_rate_hz);

// ---------------------------------------------------------------------------
// Continuous wavelet transform (Morlet)
// ---------------------------------------------------------------------------

// Centre frequency (in Hz) of the Morlet wavelet at the given scale, for the
// convention pseudo_f = (omega0 / 2pi) * sample_rate / scale.
double morlet_pseudo_frequency(double scale, double sample_rate_hz, double omega0);

// n_scales scales whose pseudo-frequencies are log-spaced over
// [f_min_hz, f_max_hz], ordered by ascending pseudo-frequency (row 0 of the
// scalogram is the lowest band, matching the spectrogram orientation).
std::vector<double> morlet_scales(int n_scales, double f_min_hz, double f_max_hz,
                                  double sample_rate_hz, double omega0);

// |CWT| with an L2-normalized analytic Morlet wavelet, computed in the
// frequency domain with zero padding. scales.size() rows x samples.size()
// columns.
Matrix cwt_magnitude(const std::vector<double> &samples, const std::vector<double> &scales,
                     double omega0);

// ---------------------------------------------------------------------------
// Image resizing
// ---------------------------------------------------------------------------

// Cubic-convolution resize (kernel parameter a = -0.5), corner-aligned
// coordinate mapping. Border taps use linear extrapolation so constants and
// ramps are reproduced across the whole output. Requires all four
// dimensions >= 2.
Matrix bicubic_resize(const Matrix &in, int out_rows, int out_cols);

// ---------------------------------------------------------------------------
// Sample-rate conversion
// ---------------------------------------------------------------------------

// Band-limited (windowed-sinc) resampling. Output length is
// round(n * dst_rate / src_rate).
std::vector<double> resample(const std::vector<double> &x, int src_rate, int dst_rate);

}  // namespace mspec::dsp

#endif  // MSPEC_DSP_HPP_
