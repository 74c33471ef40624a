// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

// Little-endian primitives for the on-disk formats. Values are assembled
// byte by byte so the files are identical on every host.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace bioner::io {

class TruncatedInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void write_u32(std::ostream& os, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(bytes, 4);
}

inline void write_i32(std::ostream& os, std::int32_t v) { write_u32(os, static_cast<std::uint32_t>(v)); }

inline void write_f32(std::ostream& os, float v) { write_u32(os, std::bit_cast<std::uint32_t>(v)); }

inline bool read_u32(std::istream& is, std::uint32_t& v) {
  unsigned char bytes[4];
  if (!is.read(reinterpret_cast<char*>(bytes), 4)) return false;
  v = static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
      (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
  return true;
}

inline std::uint32_t expect_u32(std::istream& is, const char* what) {
  std::uint32_t v = 0;
  if (!read_u32(is, v)) throw TruncatedInput(std::string("unexpected end of file reading ") + what);
  return v;
}

inline std::int32_t expect_i32(std::istream& is, const char* what) {
  return static_cast<std::int32_t>(expect_u32(is, what));
}

inline float expect_f32(std::istream& is, const char* what) { return std::bit_cast<float>(expect_u32(is, what)); }

inline std::string expect_bytes(std::istream& is, std::size_t n, const char* what) {
  std::string s(n, '\0');
  if (n > 0 && !is.read(s.data(), static_cast<std::streamsize>(n))) {
    throw TruncatedInput(std::string("unexpected end of file reading ") + what);
  }
  return s;
}

}  // namespace bioner::io
