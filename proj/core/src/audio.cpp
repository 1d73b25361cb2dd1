// core/src/audio.cpp

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

#include "mspec/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mspec/dsp.hpp"

namespace mspec::audio {

namespace {

uint32_t read_u32le(const unsigned char *p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16le(const unsigned char *p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

[[noreturn]] void unreadable(const std::string &path, const std::string &why) {
  throw WavError(WavError::Kind::kUnreadable, "cannot read WAV '" + path + "': " + why);
}

}  // namespace

AudioClip load_audio(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) unreadable(path, "file not found or not readable");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44) unreadable(path, "truncated header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    unreadable(path, "not a RIFF/WAVE file");

  uint16_t format_tag = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  bool have_fmt = false;
  size_t data_off = 0, data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint32_t chunk_len = read_u32le(bytes.data() + pos + 4);
    const unsigned char *id = bytes.data() + pos;
    const size_t body = pos + 8;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (body + 16 > bytes.size()) unreadable(path, "truncated fmt chunk");
      format_tag = read_u16le(bytes.data() + body);
      channels = read_u16le(bytes.data() + body + 2);
      sample_rate = read_u32le(bytes.data() + body + 4);
      bits = read_u16le(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = body;
      data_len = std::min<size_t>(chunk_len, bytes.size() - body);
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_off == 0) unreadable(path, "missing fmt or data chunk");
  if (sample_rate == 0) unreadable(path, "zero sample rate");
  if (channels != 1)
    throw WavError(WavError::Kind::kMultichannel,
                   "WAV '" + path + "' has " + std::to_string(channels) +
                       " channels; only mono input is supported");

  const bool pcm_int = format_tag == 1 && (bits == 8 || bits == 16 || bits == 24);
  const bool pcm_float = format_tag == 3 && bits == 32;
  if (!pcm_int && !pcm_float)
    throw WavError(WavError::Kind::kUnsupportedEncoding,
                   "WAV '" + path + "' has unsupported encoding (format tag " +
                       std::to_string(format_tag) + ", " + std::to_string(bits) + " bits)");

  const size_t bytes_per_sample = bits / 8;
  const size_t n = data_len / bytes_per_sample;
  std::vector<double> samples(n);
  const unsigned char *d = bytes.data() + data_off;
  switch (bits) {
    case 8:  // unsigned
      for (size_t i = 0; i < n; ++i)
        samples[i] = (static_cast<int>(d[i]) - 128) / 128.0;
      break;
    case 16:
      for (size_t i = 0; i < n; ++i) {
        const int16_t v = static_cast<int16_t>(read_u16le(d + 2 * i));
        samples[i] = v / 32768.0;
      }
      break;
    case 24:
      for (size_t i = 0; i < n; ++i) {
        const unsigned char *p = d + 3 * i;
        int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
        if (v & 0x800000) v |= ~0xffffff;  // sign-extend
        samples[i] = v / 8388608.0;
      }
      break;
    case 32:
      for (size_t i = 0; i < n; ++i) {
        uint32_t u = read_u32le(d + 4 * i);
        float f;
        std::memcpy(&f, &u, sizeof f);
        samples[i] = std::clamp(static_cast<double>(f), -1.0, 1.0);
      }
      break;
  }
  if (samples.empty()) unreadable(path, "empty data chunk");

  AudioClip clip;
  clip.sample_rate_hz = kPipelineRateHz;
  clip.samples = (static_cast<int>(sample_rate) == kPipelineRateHz)
                     ? std::move(samples)
                     : dsp::resample(samples, static_cast<int>(sample_rate), kPipelineRateHz);
  return clip;
}

void write_wav_pcm16(const std::string &path, const std::vector<double> &samples,
                     int sample_rate_hz) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  const uint32_t data_len = static_cast<uint32_t>(samples.size() * 2);
  auto put_u32 = [&out](uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char *>(b), 4);
  };
  auto put_u16 = [&out](uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char *>(b), 2);
  };

  out.write("RIFF", 4);
  put_u32(36 + data_len);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(static_cast<uint32_t>(sample_rate_hz));
  put_u32(static_cast<uint32_t>(sample_rate_hz) * 2);
  put_u16(2);
  put_u16(16);
  out.write("data", 4);
  put_u32(data_len);
  for (const double s : samples) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    const int v = static_cast<int>(std::lround(clipped * 32767.0));
    put_u16(static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
  if (!out) throw IoError("short write to '" + path + "'");
}

std::vector<double> detect_onsets(const AudioClip &clip) {
  if (clip.samples.empty()) throw ValueError("detect_onsets: empty clip");
  const int hop = static_cast<int>(std::lround(0.025 * clip.sample_rate_hz));
  const int n_frames = static_cast<int>(clip.samples.size()) / hop;
  if (n_frames < 2) return {0.0};

  std::vector<double> energy(n_frames, 0.0);
  for (int f = 0; f < n_frames; ++f) {
    double acc = 0.0;
    for (int i = f * hop; i < (f + 1) * hop; ++i) acc += clip.samples[i] * clip.samples[i];
    energy[f] = acc;
  }

  std::vector<double> deriv(n_frames, 0.0);
  for (int f = 1; f < n_frames; ++f) deriv[f] = energy[f] - energy[f - 1];

  std::vector<double> sorted(deriv.begin() + 1, deriv.end());
  std::sort(sorted.begin(), sorted.end());
  // 80th percentile of the derivative, floored at a fraction of its global
  // maximum so rounding-level fluctuations in quiet clips never qualify
  const double p80 = sorted[static_cast<size_t>(0.8 * (sorted.size() - 1))];
  const double threshold = std::max(p80, 0.05 * sorted.back());

  // local maxima of the derivative above the 80th percentile
  std::vector<std::pair<double, int>> peaks;  // (value, frame)
  for (int f = 1; f < n_frames; ++f) {
    const bool left_ok = deriv[f] >= deriv[f - 1];
    const bool right_ok = (f + 1 >= n_frames) || (deriv[f] > deriv[f + 1]);
    if (left_ok && right_ok && deriv[f] >= threshold && deriv[f] > 0.0)
      peaks.emplace_back(deriv[f], f);
  }
  // greedy thinning, strongest first, 150 ms minimum separation
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const auto &a, const auto &b) { return a.first > b.first; });
  const double min_sep_s = 0.150;
  std::vector<double> onsets;
  for (const auto &[value, frame] : peaks) {
    (void)value;
    const double t = static_cast<double>(frame) * hop / clip.sample_rate_hz;
    bool keep = true;
    for (const double o : onsets)
      if (std::fabs(o - t) < min_sep_s) keep = false;
    if (keep) onsets.push_back(t);
  }
  std::sort(onsets.begin(), onsets.end());
  if (onsets.empty()) onsets.push_back(0.0);
  return onsets;
}

std::vector<Segment> segment_aligned(const AudioClip &clip,
                                     const std::optional<std::vector<double>> &alignments) {
  if (clip.samples.empty()) throw ValueError("segment_aligned: empty clip");

  std::vector<double> onsets;
  if (alignments.has_value()) {
    onsets = *alignments;
    const double dur = clip.duration_s();
    for (const double t : onsets)
      if (t < 0.0 || t > dur)
        throw ValueError("segment_aligned: alignment " + std::to_string(t) +
                         " s outside clip duration " + std::to_string(dur) + " s");
  } else {
    onsets = detect_onsets(clip);
  }

  const size_t seg_len =
      static_cast<size_t>(std::lround(kSegmentSeconds * clip.sample_rate_hz));
  std::vector<Segment> segments;
  segments.reserve(onsets.size());
  for (const double t : onsets) {
    Segment seg;
    seg.onset_time_s = t;
    seg.samples.assign(seg_len, 0.0);
    const long long start = std::llround(t * clip.sample_rate_hz);
    for (size_t i = 0; i < seg_len; ++i) {
      const long long src = start + static_cast<long long>(i);
      if (src >= 0 && src < static_cast<long long>(clip.samples.size()))
        seg.samples[i] = clip.samples[static_cast<size_t>(src)];
    }
    segments.push_back(std::move(seg));
  }
  return segments;
}

std::vector<double> read_alignment_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read alignment file '" + path + "'");
  std::vector<double> onsets;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(b, e - b + 1);
    try {
      size_t used = 0;
      const double t = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      onsets.push_back(t);
    } catch (const std::exception &) {
      throw FormatError("alignment file '" + path + "' line " + std::to_string(line_no) +
                        ": expected one onset time in seconds, got '" + tok + "'");
    }
  }
  return onsets;
}

}  // namespace mspec::audio
