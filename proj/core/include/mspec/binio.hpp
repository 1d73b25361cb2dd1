// core/include/mspec/binio.hpp

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

#ifndef MSPEC_BINIO_HPP_
#define MSPEC_BINIO_HPP_

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "mspec/errors.hpp"

namespace mspec::io {

// Little-endian byte buffer writer/reader used by the model archive. Doubles
// are stored as raw IEEE-754 bits so round trips are bit-exact.

class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void i32(int32_t v) { u32(static_cast<uint32_t>(v)); }
  void f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }
  void str(const std::string &s) {
    u32(static_cast<uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void f64_vec(const std::vector<double> &v) {
    u32(static_cast<uint32_t>(v.size()));
    for (const double x : v) f64(x);
  }
  void i32_vec(const std::vector<int> &v) {
    u32(static_cast<uint32_t>(v.size()));
    for (const int x : v) i32(x);
  }

  const std::vector<uint8_t> &bytes() const { return buf_; }
  std::vector<uint8_t> &bytes() { return buf_; }

 private:
  std::vector<uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const uint8_t *data, size_t size) : data_(data), size_(size) {}

  uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  int32_t i32() { return static_cast<int32_t>(u32()); }
  double f64() {
    const uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string str() {
    const uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char *>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::vector<double> f64_vec() {
    const uint32_t n = u32();
    std::vector<double> v(n);
    for (uint32_t i = 0; i < n; ++i) v[i] = f64();
    return v;
  }
  std::vector<int> i32_vec() {
    const uint32_t n = u32();
    std::vector<int> v(n);
    for (uint32_t i = 0; i < n; ++i) v[i] = i32();
    return v;
  }

  bool exhausted() const { return pos_ == size_; }
  size_t position() const { return pos_; }

 private:
  void need(size_t n) {
    if (pos_ + n > size_) throw FormatError("binary payload truncated");
  }
  const uint8_t *data_;
  size_t size_;
  size_t pos_ = 0;
};

// CRC-32 (IEEE 802.3 polynomial, reflected).
inline uint32_t crc32(const uint8_t *data, size_t size) {
  static uint32_t table[256];
  static bool init = false;
  if (!init) {
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      table[i] = c;
    }
    init = true;
  }
  uint32_t c = 0xffffffffu;
  for (size_t i = 0; i < size; ++i) c = table[(c ^ data[i]) & 0xffu] ^ (c >> 8);
  return c ^ 0xffffffffu;
}

}  // namespace mspec::io

#endif  // MSPEC_BINIO_HPP_
