// tests/unit/test_dsp.cpp

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "mspec/dsp.hpp"

using namespace mspec;
using mspec::dsp::bicubic_resize;

namespace {

// counting oracle for the frame formula: walk the signal step by step
int count_frames_oracle(long long n, int win, int hop) {
  int frames = 0;
  for (long long start = 0; start + win <= n; start += hop) ++frames;
  return frames;
}

// brute-force DFT magnitude at one bin
double dft_mag(const std::vector<double> &x, int k) {
  std::complex<double> acc(0.0, 0.0);
  const double w = -2.0 * std::numbers::pi * k / static_cast<double>(x.size());
  for (size_t n = 0; n < x.size(); ++n)
    acc += x[n] * std::complex<double>(std::cos(w * n), std::sin(w * n));
  return std::abs(acc);
}

}  // namespace

TEST_CASE("fft matches a brute-force DFT and round-trips") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::complex<double>> buf(64);
  std::vector<double> real(64);
  for (int i = 0; i < 64; ++i) {
    real[i] = u(rng);
    buf[i] = real[i];
  }
  auto copy = buf;
  dsp::fft_inplace(buf, false);
  for (int k : {0, 1, 7, 31}) CHECK(std::abs(buf[k]) == doctest::Approx(dft_mag(real, k)).epsilon(1e-9));
  dsp::fft_inplace(buf, true);
  for (int i = 0; i < 64; ++i) CHECK(std::abs(buf[i] - copy[i]) < 1e-12);

  std::vector<std::complex<double>> bad(12);
  CHECK_THROWS_AS(dsp::fft_inplace(bad, false), ValueError);
}

TEST_CASE("frame count formula matches the counting oracle on random draws") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 20; ++t) {
    const int win = 2 + static_cast<int>(rng() % 700);
    const int hop = 1 + static_cast<int>(rng() % 300);
    const long long n = win + static_cast<long long>(rng() % 20000);
    CHECK(dsp::frame_count(n, win, hop) == count_frames_oracle(n, win, hop));
  }
  CHECK(dsp::frame_count(100, 200, 10) == 0);
  // the narrowband case: 500 ms at 16 kHz, 30 ms window, 10 ms hop
  CHECK(dsp::frame_count(8000, 480, 160) == 48);
}

TEST_CASE("mel filterbank: nonnegative, unimodal, bins covered") {
  for (const auto [bands, nfft] : {std::pair{128, 512}, std::pair{64, 128}}) {
    const Matrix fb = dsp::mel_filterbank(bands, nfft, 16000.0);
    REQUIRE(fb.rows() == bands);
    REQUIRE(fb.cols() == nfft / 2 + 1);

    for (int i = 0; i < fb.rows(); ++i) {
      // weights nonnegative and unimodal (rise then fall)
      int direction = 1;
      for (int k = 0; k < fb.cols(); ++k) {
        CHECK(fb(i, k) >= 0.0);
        if (k > 0) {
          if (direction == 1 && fb(i, k) < fb(i, k - 1)) direction = -1;
          if (direction == -1) CHECK(fb(i, k) <= fb(i, k - 1) + 1e-15);
        }
      }
    }

    // every bin between the first and last filter centres has support
    const double mel_max = dsp::hz_to_mel(8000.0);
    const double first_centre = dsp::mel_to_hz(mel_max * 1.0 / (bands + 1));
    const double last_centre = dsp::mel_to_hz(mel_max * bands / (bands + 1.0));
    for (int k = 0; k < fb.cols(); ++k) {
      const double f = k * 16000.0 / nfft;
      if (f <= first_centre || f >= last_centre) continue;
      double total = 0.0;
      for (int i = 0; i < fb.rows(); ++i) total += fb(i, k);
      CHECK(total > 0.0);
    }
  }
}

TEST_CASE("bicubic reproduces constants exactly at any size") {
  Matrix m(5, 9, 7.0);
  const Matrix out = bicubic_resize(m, 128, 126);
  REQUIRE(out.rows() == 128);
  REQUIRE(out.cols() == 126);
  for (const double v : out.storage()) CHECK(v == doctest::Approx(7.0).epsilon(1e-14));
}

TEST_CASE("bicubic resizes 128x48 to the canonical 128x126 shape") {
  Matrix m(128, 48);
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) m(r, c) = std::sin(0.05 * r) * std::cos(0.11 * c);
  const Matrix out = bicubic_resize(m, 128, 126);
  CHECK(out.rows() == 128);
  CHECK(out.cols() == 126);
}

TEST_CASE("bicubic reproduces an affine ramp to 1e-9") {
  // f(i, j) = i + 2 j sampled on an 8x8 grid, upsampled to 16x16; with
  // corner-aligned mapping the analytic value at output (r, c) is
  // f(r * 7 / 15, c * 7 / 15)
  Matrix m(8, 8);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) m(r, c) = r + 2.0 * c;
  const Matrix out = bicubic_resize(m, 16, 16);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) {
      const double expected = r * 7.0 / 15.0 + 2.0 * (c * 7.0 / 15.0);
      CHECK(std::fabs(out(r, c) - expected) < 1e-9);
    }
}

TEST_CASE("bicubic reproduces quadratics away from the border") {
  Matrix m(12, 12);
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < 12; ++c) m(r, c) = r * r + 0.5 * c * c + r * c;
  const Matrix out = bicubic_resize(m, 23, 23);
  const double scale = 11.0 / 22.0;
  for (int r = 4; r < 19; ++r)
    for (int c = 4; c < 19; ++c) {
      const double x = r * scale, y = c * scale;
      CHECK(std::fabs(out(r, c) - (x * x + 0.5 * y * y + x * y)) < 1e-9);
    }
}

TEST_CASE("bicubic rejects degenerate dimensions") {
  Matrix tiny(1, 5, 1.0);
  CHECK_THROWS_AS(bicubic_resize(tiny, 4, 4), ShapeError);
  Matrix ok(4, 4, 1.0);
  CHECK_THROWS_AS(bicubic_resize(ok, 1, 8), ShapeError);
}

TEST_CASE("morlet scales span the requested pseudo-frequency range") {
  const auto scales = dsp::morlet_scales(64, 80.0, 8000.0, 16000, 6.0);
  REQUIRE(scales.size() == 64);
  CHECK(dsp::morlet_pseudo_frequency(scales.front(), 16000, 6.0) == doctest::Approx(80.0));
  CHECK(dsp::morlet_pseudo_frequency(scales.back(), 16000, 6.0) == doctest::Approx(8000.0));
  for (size_t i = 1; i < scales.size(); ++i) CHECK(scales[i] < scales[i - 1]);
}

TEST_CASE("cwt magnitude peaks at the scale nearest a sine's frequency") {
  const int sr = 16000;
  const auto scales = dsp::morlet_scales(64, 80.0, 8000.0, sr, 6.0);
  std::vector<double> x(8000);
  for (size_t n = 0; n < x.size(); ++n)
    x[n] = std::sin(2.0 * std::numbers::pi * 440.0 * n / sr);
  const Matrix mag = dsp::cwt_magnitude(x, scales, 6.0);

  // oracle: the scale whose pseudo-frequency is nearest 440 Hz
  int expected = 0;
  double best = 1e18;
  for (size_t i = 0; i < scales.size(); ++i) {
    const double d = std::fabs(dsp::morlet_pseudo_frequency(scales[i], sr, 6.0) - 440.0);
    if (d < best) {
      best = d;
      expected = static_cast<int>(i);
    }
  }

  int argmax = 0;
  double best_mean = -1.0;
  for (int i = 0; i < mag.rows(); ++i) {
    double mean = 0.0;
    for (int c = 0; c < mag.cols(); ++c) mean += mag(i, c);
    if (mean > best_mean) {
      best_mean = mean;
      argmax = i;
    }
  }
  CHECK(argmax == expected);
}

TEST_CASE("resample preserves a sine's dominant frequency (8 kHz -> 16 kHz)") {
  const int src = 8000, dst = 16000;
  std::vector<double> x(8000);
  for (size_t n = 0; n < x.size(); ++n)
    x[n] = std::sin(2.0 * std::numbers::pi * 440.0 * n / src);
  const std::vector<double> y = dsp::resample(x, src, dst);
  REQUIRE(y.size() == 16000);

  // oracle: DFT argmax of the resampled signal is still 440 Hz +- one bin
  int argmax = 0;
  double best = -1.0;
  for (int k = 1; k < 2000; ++k) {
    const double m = dft_mag(y, k);
    if (m > best) {
      best = m;
      argmax = k;
    }
  }
  const double bin_hz = static_cast<double>(dst) / static_cast<double>(y.size());
  CHECK(std::fabs(argmax * bin_hz - 440.0) <= bin_hz + 1e-9);
}

TEST_CASE("resample reproduces constants and rejects bad rates") {
  std::vector<double> x(500, 0.25);
  const std::vector<double> y = dsp::resample(x, 22050, 16000);
  // skip the filter's support at both edges; interior samples are exact
  for (size_t i = 64; i + 64 < y.size(); ++i)
    CHECK(y[i] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK_THROWS_AS(dsp::resample(x, 0, 16000), ValueError);
}
