// tests/unit/test_audio.cpp

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
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "mspec/audio.hpp"

using namespace mspec;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string &name) {
  return (fs::temp_directory_path() / name).string();
}

// minimal WAV writer with arbitrary format fields, for error-path tests
void write_raw_wav(const std::string &path, uint16_t format, uint16_t channels,
                   uint32_t rate, uint16_t bits, const std::vector<uint8_t> &payload) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  auto u32 = [&out](uint32_t v) { out.write(reinterpret_cast<const char *>(&v), 4); };
  auto u16 = [&out](uint16_t v) { out.write(reinterpret_cast<const char *>(&v), 2); };
  out.write("RIFF", 4);
  u32(36 + static_cast<uint32_t>(payload.size()));
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(static_cast<uint16_t>(channels * bits / 8));
  u16(bits);
  out.write("data", 4);
  u32(static_cast<uint32_t>(payload.size()));
  out.write(reinterpret_cast<const char *>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
}

}  // namespace

TEST_CASE("load_audio: silence maps to zeros, full-scale maps to 32767/32768") {
  const std::string path = temp_path("t_silence.wav");
  audio::write_wav_pcm16(path, std::vector<double>(1600, 0.0), 16000);
  const audio::AudioClip clip = audio::load_audio(path);
  REQUIRE(clip.samples.size() == 1600);
  for (const double s : clip.samples) CHECK(s == 0.0);

  std::vector<uint8_t> payload(3200);
  for (size_t i = 0; i < payload.size(); i += 2) {
    payload[i] = 0xff;
    payload[i + 1] = 0x7f;  // 32767 little-endian
  }
  const std::string full = temp_path("t_full.wav");
  write_raw_wav(full, 1, 1, 16000, 16, payload);
  const audio::AudioClip loud = audio::load_audio(full);
  for (const double s : loud.samples) CHECK(s == doctest::Approx(32767.0 / 32768.0));
}

TEST_CASE("load_audio: 8-bit and 24-bit integer and 32-bit float encodings") {
  // 8-bit unsigned: 128 -> 0, 255 -> ~+1
  write_raw_wav(temp_path("t_u8.wav"), 1, 1, 16000, 8, std::vector<uint8_t>(256, 128));
  const audio::AudioClip mid = audio::load_audio(temp_path("t_u8.wav"));
  for (const double s : mid.samples) CHECK(s == 0.0);

  // 24-bit: value 0x400000 = 2^22 -> 0.5
  std::vector<uint8_t> p24;
  for (int i = 0; i < 64; ++i) {
    p24.push_back(0x00);
    p24.push_back(0x00);
    p24.push_back(0x40);
  }
  write_raw_wav(temp_path("t_24.wav"), 1, 1, 16000, 24, p24);
  const audio::AudioClip clip24 = audio::load_audio(temp_path("t_24.wav"));
  for (const double s : clip24.samples) CHECK(s == doctest::Approx(0.5));

  // 32-bit float: store 0.25f
  std::vector<uint8_t> pf(4 * 32);
  const float v = 0.25f;
  for (size_t i = 0; i < pf.size(); i += 4) std::memcpy(pf.data() + i, &v, 4);
  write_raw_wav(temp_path("t_f32.wav"), 3, 1, 16000, 32, pf);
  const audio::AudioClip clipf = audio::load_audio(temp_path("t_f32.wav"));
  for (const double s : clipf.samples) CHECK(s == doctest::Approx(0.25));
}

TEST_CASE("load_audio resamples a 8 kHz sine to the 16 kHz pipeline rate") {
  std::vector<double> x(8000);
  for (size_t n = 0; n < x.size(); ++n)
    x[n] = 0.5 * std::sin(2.0 * std::numbers::pi * 440.0 * n / 8000.0);
  const std::string path = temp_path("t_8k.wav");
  audio::write_wav_pcm16(path, x, 8000);
  const audio::AudioClip clip = audio::load_audio(path);
  CHECK(clip.sample_rate_hz == 16000);
  CHECK(clip.samples.size() == 16000);
}

TEST_CASE("load_audio error taxonomy: unreadable, multichannel, unsupported") {
  try {
    audio::load_audio(temp_path("definitely_missing.wav"));
    FAIL("expected WavError");
  } catch (const audio::WavError &e) {
    CHECK(e.kind() == audio::WavError::Kind::kUnreadable);
  }

  write_raw_wav(temp_path("t_stereo.wav"), 1, 2, 16000, 16, std::vector<uint8_t>(64, 0));
  try {
    audio::load_audio(temp_path("t_stereo.wav"));
    FAIL("expected WavError");
  } catch (const audio::WavError &e) {
    CHECK(e.kind() == audio::WavError::Kind::kMultichannel);
  }

  // mu-law format tag
  write_raw_wav(temp_path("t_mulaw.wav"), 7, 1, 8000, 8, std::vector<uint8_t>(64, 0));
  try {
    audio::load_audio(temp_path("t_mulaw.wav"));
    FAIL("expected WavError");
  } catch (const audio::WavError &e) {
    CHECK(e.kind() == audio::WavError::Kind::kUnsupportedEncoding);
  }

  {
    std::ofstream junk(temp_path("t_junk.wav"), std::ios::binary);
    junk << "this is not a wav file at all";
  }
  CHECK_THROWS_AS(audio::load_audio(temp_path("t_junk.wav")), audio::WavError);
}

TEST_CASE("segment_aligned: explicit alignments pass through") {
  audio::AudioClip clip;
  clip.sample_rate_hz = 16000;
  clip.samples.assign(32000, 0.1);  // 2 s
  const auto segments =
      audio::segment_aligned(clip, std::vector<double>{0.0, 0.5, 1.0});
  REQUIRE(segments.size() == 3);
  for (const auto &seg : segments) CHECK(seg.samples.size() == 8000);
  CHECK(segments[1].onset_time_s == 0.5);
  // the final segment (1.0 .. 1.5 s) lies fully inside the clip
  for (const double s : segments[2].samples) CHECK(s == doctest::Approx(0.1));
}

TEST_CASE("segment_aligned zero-pads at clip boundaries") {
  audio::AudioClip clip;
  clip.sample_rate_hz = 16000;
  clip.samples.assign(4000, 0.5);  // 250 ms
  const auto segments = audio::segment_aligned(clip, std::vector<double>{0.0});
  REQUIRE(segments.size() == 1);
  REQUIRE(segments[0].samples.size() == 8000);
  for (size_t i = 0; i < 4000; ++i) CHECK(segments[0].samples[i] == doctest::Approx(0.5));
  for (size_t i = 4000; i < 8000; ++i) CHECK(segments[0].samples[i] == 0.0);
}

TEST_CASE("segment_aligned rejects bad input") {
  audio::AudioClip clip;
  clip.sample_rate_hz = 16000;
  CHECK_THROWS_AS(audio::segment_aligned(clip, std::nullopt), ValueError);
  clip.samples.assign(16000, 0.0);
  CHECK_THROWS_AS(audio::segment_aligned(clip, std::vector<double>{2.0}), ValueError);
}

TEST_CASE("onset detector finds synthetic bursts within one 25 ms frame") {
  // five bursts at known positions in 2.5 s of near-silence
  const std::vector<double> truth{0.30, 0.65, 1.10, 1.55, 2.05};
  audio::AudioClip clip;
  clip.sample_rate_hz = 16000;
  clip.samples.assign(40000, 0.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (size_t i = 0; i < clip.samples.size(); ++i) clip.samples[i] = 1e-4 * noise(rng);
  for (const double t : truth) {
    const int start = static_cast<int>(t * 16000);
    for (int i = 0; i < 800; ++i) {
      const double decay = std::exp(-i / 1200.0);
      clip.samples[static_cast<size_t>(start + i)] += 0.6 * decay * noise(rng);
    }
  }

  const std::vector<double> onsets = audio::detect_onsets(clip);
  REQUIRE(onsets.size() == truth.size());
  for (size_t i = 0; i < truth.size(); ++i) CHECK(std::fabs(onsets[i] - truth[i]) <= 0.025);
}

TEST_CASE("alignment files parse one onset per line and report bad lines") {
  const std::string path = temp_path("t_align.txt");
  {
    std::ofstream out(path);
    out << "0.0\n0.5\n 1.25 \n";
  }
  const std::vector<double> onsets = audio::read_alignment_file(path);
  REQUIRE(onsets.size() == 3);
  CHECK(onsets[2] == doctest::Approx(1.25));

  {
    std::ofstream out(path);
    out << "0.0\nnot-a-number\n";
  }
  CHECK_THROWS_AS(audio::read_alignment_file(path), FormatError);
}
