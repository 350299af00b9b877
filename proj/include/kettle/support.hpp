// Copyright 2026 The Kettle Authors
//
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

#ifndef KETTLE_SUPPORT_HPP
#define KETTLE_SUPPORT_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kettle/errors.hpp"

namespace kettle {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

inline constexpr std::string_view kettle_version = "0.4.0";

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

inline Bytes to_byte_vector(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
  return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

inline void append(Bytes& out, ByteView more) {
  out.insert(out.end(), more.begin(), more.end());
}

// 8-byte big-endian length prefix used by the Merkle node construction.
inline std::array<uint8_t, 8> be64(uint64_t v) {
  std::array<uint8_t, 8> out{};
  for (int i = 7; i >= 0; --i) {
    out[static_cast<size_t>(i)] = static_cast<uint8_t>(v & 0xff);
    v >>= 8;
  }
  return out;
}

inline void put_be32(Bytes& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

inline void put_be16(Bytes& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

namespace detail {
inline constexpr char hex_chars[] = "0123456789abcdef";

inline int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;  // uppercase is rejected: digests are lowercase throughout
}
}  // namespace detail

inline std::string to_hex(ByteView data) {
  std::string out;
  out.resize(data.size() * 2);
  for (size_t i = 0; i < data.size(); ++i) {
    out[i * 2] = detail::hex_chars[data[i] >> 4];
    out[i * 2 + 1] = detail::hex_chars[data[i] & 0x0f];
  }
  return out;
}

inline bool is_lower_hex(std::string_view s) {
  if (s.size() % 2 != 0) return false;
  for (char c : s) {
    if (detail::hex_nibble(c) < 0) return false;
  }
  return true;
}

inline Bytes from_hex(std::string_view s) {
  if (s.size() % 2 != 0) {
    throw Error(Errc::bad_digest, "hex string has odd length");
  }
  Bytes out;
  out.reserve(s.size() / 2);
  for (size_t i = 0; i < s.size(); i += 2) {
    int hi = detail::hex_nibble(s[i]);
    int lo = detail::hex_nibble(s[i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(Errc::bad_digest, "invalid hex character");
    }
    out.push_back(static_cast<uint8_t>((hi << 4) | lo));
  }
  return out;
}

template <size_t N>
std::array<uint8_t, N> from_hex_fixed(std::string_view s) {
  if (s.size() != N * 2) {
    throw Error(Errc::bad_digest, "hex string has wrong length");
  }
  Bytes raw = from_hex(s);
  std::array<uint8_t, N> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

namespace detail {
inline constexpr char b64_chars[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}
}  // namespace detail

inline std::string base64_encode(ByteView data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    uint32_t n = (uint32_t(data[i]) << 16) | (uint32_t(data[i + 1]) << 8) |
                 uint32_t(data[i + 2]);
    out.push_back(detail::b64_chars[(n >> 18) & 0x3f]);
    out.push_back(detail::b64_chars[(n >> 12) & 0x3f]);
    out.push_back(detail::b64_chars[(n >> 6) & 0x3f]);
    out.push_back(detail::b64_chars[n & 0x3f]);
  }
  size_t rest = data.size() - i;
  if (rest == 1) {
    uint32_t n = uint32_t(data[i]) << 16;
    out.push_back(detail::b64_chars[(n >> 18) & 0x3f]);
    out.push_back(detail::b64_chars[(n >> 12) & 0x3f]);
    out.append("==");
  } else if (rest == 2) {
    uint32_t n = (uint32_t(data[i]) << 16) | (uint32_t(data[i + 1]) << 8);
    out.push_back(detail::b64_chars[(n >> 18) & 0x3f]);
    out.push_back(detail::b64_chars[(n >> 12) & 0x3f]);
    out.push_back(detail::b64_chars[(n >> 6) & 0x3f]);
    out.push_back('=');
  }
  return out;
}

inline Bytes base64_decode(std::string_view s) {
  if (s.size() % 4 != 0) {
    throw Error(Errc::malformed_input, "base64 length not a multiple of 4");
  }
  Bytes out;
  out.reserve(s.size() / 4 * 3);
  for (size_t i = 0; i < s.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      char c = s[i + k];
      if (c == '=') {
        // padding only in the last two positions of the final group
        if (i + 4 != s.size() || k < 2) {
          throw Error(Errc::malformed_input, "misplaced base64 padding");
        }
        v[k] = 0;
        ++pad;
      } else {
        if (pad > 0) {
          throw Error(Errc::malformed_input, "misplaced base64 padding");
        }
        v[k] = detail::b64_value(c);
        if (v[k] < 0) {
          throw Error(Errc::malformed_input, "invalid base64 character");
        }
      }
    }
    uint32_t n = (uint32_t(v[0]) << 18) | (uint32_t(v[1]) << 12) |
                 (uint32_t(v[2]) << 6) | uint32_t(v[3]);
    out.push_back(static_cast<uint8_t>((n >> 16) & 0xff));
    if (pad < 2) out.push_back(static_cast<uint8_t>((n >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<uint8_t>(n & 0xff));
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::missing_file, "cannot open " + path.string());
  }
  std::string out;
  out.assign(std::istreambuf_iterator<char>(in),
             std::istreambuf_iterator<char>());
  return out;
}

inline Bytes read_file_bytes(const std::filesystem::path& path) {
  return to_byte_vector(read_file(path));
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(Errc::io_failure, "cannot write " + path.string());
  }
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) {
    throw Error(Errc::io_failure, "short write to " + path.string());
  }
}

inline void write_file(const std::filesystem::path& path, ByteView data) {
  write_file(path, std::string_view(reinterpret_cast<const char*>(data.data()),
                                    data.size()));
}

}  // namespace kettle

#endif  // KETTLE_SUPPORT_HPP
