// core/src/dsp.cpp

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

#include "mspec/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mspec/errors.hpp"

namespace mspec::dsp {

namespace {
constexpr double kPi = std::numbers::pi;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::vector<std::complex<double>> &buf, bool inverse) {
  const size_t n = buf.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw ValueError("fft_inplace: size must be a nonzero power of two");

  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(buf[i], buf[j]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = buf[i + k];
        const std::complex<double> v = buf[i + k + len / 2] * w;
        buf[i + k] = u + v;
        buf[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto &z : buf) z *= scale;
  }
}

int frame_count(long long n_samples, int win_len, int hop) {
  if (win_len <= 0 || hop <= 0) throw ValueError("frame_count: window and hop must be positive");
  if (n_samples < win_len) return 0;
  return static_cast<int>((n_samples - win_len) / hop) + 1;
}

std::vector<double> hann_window(int length) {
  if (length <= 0) throw ValueError("hann_window: length must be positive");
  std::vector<double> w(length);
  if (length == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int n = 0; n < length; ++n)
    w[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * n / (length - 1));
  return w;
}

Matrix stft_power(const std::vector<double> &samples, int win_len, int hop, int nfft) {
  if (nfft < win_len) throw ValueError("stft_power: nfft must be >= window length");
  const int frames = frame_count(static_cast<long long>(samples.size()), win_len, hop);
  const int bins = nfft / 2 + 1;
  Matrix power(bins, std::max(frames, 0));
  if (frames <= 0) return power;

  const std::vector<double> window = hann_window(win_len);
  std::vector<std::complex<double>> buf(nfft);
  for (int f = 0; f < frames; ++f) {
    const size_t start = static_cast<size_t>(f) * hop;
    for (int i = 0; i < win_len; ++i)
      buf[i] = samples[start + i] * window[i];
    std::fill(buf.begin() + win_len, buf.end(), std::complex<double>(0.0, 0.0));
    fft_inplace(buf, false);
    for (int k = 0; k < bins; ++k) power(k, f) = std::norm(buf[k]);
  }
  return power;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(int n_bands, int nfft, double sample_rate_hz) {
  if (n_bands <= 0) throw ValueError("mel_filterbank: n_bands must be positive");
  const int bins = nfft / 2 + 1;
  const double nyquist = sample_rate_hz / 2.0;
  const double mel_max = hz_to_mel(nyquist);

  std::vector<double> mel_points(n_bands + 2);
  for (int j = 0; j < n_bands + 2; ++j)
    mel_points[j] = mel_max * static_cast<double>(j) / (n_bands + 1);

  Matrix fb(n_bands, bins);
  for (int k = 0; k < bins; ++k) {
    const double mel_k = hz_to_mel(static_cast<double>(k) * sample_rate_hz / nfft);
    for (int i = 0; i < n_bands; ++i) {
      const double lo = mel_points[i], mid = mel_points[i + 1], hi = mel_points[i + 2];
      double w = 0.0;
      if (mel_k > lo && mel_k < hi)
        w = (mel_k <= mid) ? (mel_k - lo) / (mid - lo) : (hi - mel_k) / (hi - mid);
      fb(i, k) = w;
    }
  }
  return fb;
}

double morlet_pseudo_frequency(double scale, double sample_rate_hz, double omega0) {
  return omega0 / (2.0 * kPi) * sample_rate_hz / scale;
}

std::vector<double> morlet_scales(int n_scales, double f_min_hz, double f_max_hz,
                                  double sample_rate_hz, double omega0) {
  if (n_scales < 2 || f_min_hz <= 0.0 || f_max_hz <= f_min_hz)
    throw ValueError("morlet_scales: need n_scales >= 2 and 0 < f_min < f_max");
  const double fc = omega0 / (2.0 * kPi);
  std::vector<double> scales(n_scales);
  const double log_min = std::log(f_min_hz), log_max = std::log(f_max_hz);
  for (int i = 0; i < n_scales; ++i) {
    const double f = std::exp(log_min + (log_max - log_min) * i / (n_scales - 1));
    scales[i] = fc * sample_rate_hz / f;
  }
  return scales;
}

Matrix cwt_magnitude(const std::vector<double> &samples, const std::vector<double> &scales,
                     double omega0) {
  const int n = static_cast<int>(samples.size());
  if (n == 0) throw ValueError("cwt_magnitude: empty input");
  // pad to 2x next power of two so wavelet tails at the largest scale do not
  // wrap around the segment
  const int nfft = next_pow2(n) * 2;

  std::vector<std::complex<double>> spectrum(nfft, std::complex<double>(0.0, 0.0));
  for (int i = 0; i < n; ++i) spectrum[i] = samples[i];
  fft_inplace(spectrum, false);

  Matrix out(static_cast<int>(scales.size()), n);
  const double norm0 = std::pow(kPi, -0.25);

  std::vector<std::complex<double>> buf(nfft);
  for (size_t si = 0; si < scales.size(); ++si) {
    const double s = scales[si];
    // analytic Morlet: support on positive frequencies only
    for (int k = 0; k < nfft; ++k) {
      if (k == 0 || k > nfft / 2) {
        buf[k] = 0.0;
        continue;
      }
      const double omega = 2.0 * kPi * k / nfft;
      const double arg = s * omega - omega0;
      const double psi = norm0 * std::exp(-0.5 * arg * arg) * std::sqrt(s);
      buf[k] = spectrum[k] * psi;
    }
    fft_inplace(buf, true);
    for (int i = 0; i < n; ++i) out(static_cast<int>(si), i) = std::abs(buf[i]);
  }
  return out;
}

namespace {

// Keys cubic-convolution kernel, a = -0.5.
inline double cubic_kernel(double x) {
  constexpr double a = -0.5;
  x = std::fabs(x);
  if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
  return 0.0;
}

// Sample with linear extrapolation beyond the borders, which keeps the
// interpolation exact for affine inputs everywhere.
inline double tap(const double *v, int n, int i) {
  if (i < 0) return v[0] + static_cast<double>(i) * (v[1] - v[0]);
  if (i >= n) return v[n - 1] + static_cast<double>(i - (n - 1)) * (v[n - 1] - v[n - 2]);
  return v[i];
}

// 1-D pass along a strided vector.
void resize_line(const double *src, int n_src, int stride_src, double *dst, int n_dst,
                 int stride_dst) {
  const double scale = static_cast<double>(n_src - 1) / (n_dst - 1);
  std::vector<double> line(n_src);
  for (int i = 0; i < n_src; ++i) line[i] = src[static_cast<size_t>(i) * stride_src];
  for (int o = 0; o < n_dst; ++o) {
    const double x = o * scale;
    const int x0 = static_cast<int>(std::floor(x));
    const double fx = x - x0;
    // accumulate offsets from an anchor sample and renormalize the kernel
    // sum; constant inputs then reproduce bit-exactly
    const double anchor = tap(line.data(), n_src, x0);
    double acc = 0.0, wsum = 0.0;
    for (int t = -1; t <= 2; ++t) {
      const double w = cubic_kernel(fx - t);
      acc += (tap(line.data(), n_src, x0 + t) - anchor) * w;
      wsum += w;
    }
    dst[static_cast<size_t>(o) * stride_dst] = anchor + acc / wsum;
  }
}

}  // namespace

Matrix bicubic_resize(const Matrix &in, int out_rows, int out_cols) {
  if (in.rows() < 2 || in.cols() < 2)
    throw ShapeError("bicubic_resize: input must be at least 2x2");
  if (out_rows < 2 || out_cols < 2)
    throw ShapeError("bicubic_resize: target must be at least 2x2");

  // horizontal pass, then vertical; the tensor-product kernel is separable
  Matrix mid(in.rows(), out_cols);
  for (int r = 0; r < in.rows(); ++r)
    resize_line(in.data() + static_cast<size_t>(r) * in.cols(), in.cols(), 1,
                mid.data() + static_cast<size_t>(r) * out_cols, out_cols, 1);

  Matrix out(out_rows, out_cols);
  for (int c = 0; c < out_cols; ++c)
    resize_line(mid.data() + c, mid.rows(), out_cols, out.data() + c, out_rows, out_cols);
  return out;
}

std::vector<double> resample(const std::vector<double> &x, int src_rate, int dst_rate) {
  if (src_rate <= 0 || dst_rate <= 0)
    throw ValueError("resample: rates must be positive");
  if (src_rate == dst_rate) return x;
  if (x.empty()) return {};

  const double ratio = static_cast<double>(dst_rate) / src_rate;
  // cutoff slightly below the narrower Nyquist, in cycles per input sample
  const double fc = 0.45 * std::min(1.0, ratio);
  const int half_width = static_cast<int>(std::ceil(32.0 / std::min(1.0, ratio)));

  const long long n_out = std::llround(static_cast<double>(x.size()) * ratio);
  std::vector<double> y(static_cast<size_t>(n_out), 0.0);

#pragma omp parallel for schedule(static)
  for (long long m = 0; m < n_out; ++m) {
    const double t = static_cast<double>(m) / ratio;
    const int k_lo = static_cast<int>(std::ceil(t)) - half_width;
    const int k_hi = static_cast<int>(std::floor(t)) + half_width;
    double acc = 0.0, wsum = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) {
      const double d = static_cast<double>(k) - t;
      const double arg = 2.0 * fc * d;
      const double sinc = (arg == 0.0) ? 1.0 : std::sin(kPi * arg) / (kPi * arg);
      const double win = 0.5 + 0.5 * std::cos(kPi * d / half_width);
      const double w = sinc * win;
      wsum += w;
      if (k >= 0 && k < static_cast<int>(x.size())) acc += w * x[k];
    }
    y[m] = (wsum != 0.0) ? acc / wsum : 0.0;
  }
  return y;
}

}  // namespace mspec::dsp
