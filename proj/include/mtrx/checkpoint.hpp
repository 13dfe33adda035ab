// SPDX-License-Identifier: Apache-2.0
/// \file checkpoint.hpp
/// \brief Binary checkpoint files.
///
/// Layout (all little-endian):
///
///   offset  size        content
///   0       4           magic "MTRX"
///   4       4   u32     format version (1)
///   8       4   u32     n
///   12      8   f64     L
///   20      48  6xf64   alpha, qbar, epsilon, qhat, mu, eta
///   68      8   f64     time
///   76      48 n^2      planes u_x, u_y, v_x, v_y, T_e, q_e (f64, row-major, x fastest)
///   end-4   4   u32     CRC-32 (IEEE, as zlib) of every preceding byte
#pragma once

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "mtrx/errors.hpp"
#include "mtrx/model.hpp"

namespace mtrx {

inline constexpr std::array<char, 4> kCheckpointMagic{'M', 'T', 'R', 'X'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderSize = 76;

struct CheckpointHeader {
  std::uint32_t version = kCheckpointVersion;
  std::uint32_t n = 0;
  double length = 0.0;
  ModelParams params;
  double time = 0.0;
};

namespace detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put_le(std::vector<unsigned char>& out, T value) {
  std::array<unsigned char, sizeof(T)> b;
  std::memcpy(b.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  out.insert(out.end(), b.begin(), b.end());
}

template <class T>
T get_le(const unsigned char* p) {
  std::array<unsigned char, sizeof(T)> b;
  std::memcpy(b.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

inline std::uint32_t crc32_of(const unsigned char* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths.
  while (size > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

inline std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline CheckpointHeader parse_header(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < kCheckpointHeaderSize + 4) throw FormatError("checkpoint truncated (header)");
  if (std::memcmp(bytes.data(), kCheckpointMagic.data(), 4) != 0) throw FormatError("bad checkpoint magic");
  CheckpointHeader h;
  h.version = get_le<std::uint32_t>(&bytes[4]);
  if (h.version != kCheckpointVersion)
    throw UnsupportedVersion("unsupported checkpoint version " + std::to_string(h.version));
  h.n = get_le<std::uint32_t>(&bytes[8]);
  h.length = get_le<double>(&bytes[12]);
  const unsigned char* p = &bytes[20];
  h.params.alpha = get_le<double>(p);
  h.params.qbar = get_le<double>(p + 8);
  h.params.epsilon = get_le<double>(p + 16);
  h.params.qhat = get_le<double>(p + 24);
  h.params.mu = get_le<double>(p + 32);
  h.params.eta = get_le<double>(p + 40);
  h.time = get_le<double>(&bytes[68]);
  return h;
}

} // namespace detail

inline std::vector<unsigned char> encode_checkpoint(const State& s, const ModelParams& p) {
  const Grid& g = s.grid();
  std::vector<unsigned char> out;
  out.reserve(kCheckpointHeaderSize + 6 * 8 * g.size() + 4);
  out.insert(out.end(), kCheckpointMagic.begin(), kCheckpointMagic.end());
  detail::put_le<std::uint32_t>(out, kCheckpointVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.n()));
  detail::put_le<double>(out, g.length());
  for (double v : {p.alpha, p.qbar, p.epsilon, p.qhat, p.mu, p.eta}) detail::put_le<double>(out, v);
  detail::put_le<double>(out, s.time);
  for (const Field* f : {&s.u.x, &s.u.y, &s.v.x, &s.v.y, &s.T_e, &s.q_e})
    for (double v : f->values()) detail::put_le<double>(out, v);
  detail::put_le<std::uint32_t>(out, detail::crc32_of(out.data(), out.size()));
  return out;
}

struct Checkpoint {
  State state;
  ModelParams params;
};

/// Decodes a complete checkpoint. Nothing is returned unless magic, version,
/// size and CRC all check out.
inline Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes) {
  const CheckpointHeader h = detail::parse_header(bytes);
  if (h.n < 16 || h.n % 2 != 0 || h.n > (1u << 15)) throw FormatError("checkpoint: implausible grid size");
  const std::size_t nn = static_cast<std::size_t>(h.n) * h.n;
  const std::size_t expected = kCheckpointHeaderSize + 6 * 8 * nn + 4;
  if (bytes.size() < expected) throw FormatError("checkpoint truncated");
  if (bytes.size() > expected) throw FormatError("checkpoint has trailing bytes");
  const std::uint32_t stored = detail::get_le<std::uint32_t>(&bytes[expected - 4]);
  if (stored != detail::crc32_of(bytes.data(), expected - 4)) throw FormatError("checkpoint CRC mismatch");

  const Grid grid(h.n, h.length);
  State s(grid);
  s.time = h.time;
  const unsigned char* p = &bytes[kCheckpointHeaderSize];
  for (Field* f : {&s.u.x, &s.u.y, &s.v.x, &s.v.y, &s.T_e, &s.q_e})
    for (double& v : f->values()) {
      v = detail::get_le<double>(p);
      p += 8;
    }
  return {std::move(s), h.params};
}

inline void checkpoint_write(const State& s, const ModelParams& p, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(s, p);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

inline Checkpoint checkpoint_read(const std::filesystem::path& path) {
  return decode_checkpoint(detail::read_all(path));
}

/// Header fields plus whether the CRC matches; used by `mtrx inspect`.
struct CheckpointSummary {
  CheckpointHeader header;
  std::size_t file_size = 0;
  bool crc_ok = false;
};

inline CheckpointSummary checkpoint_inspect(const std::filesystem::path& path) {
  const auto bytes = detail::read_all(path);
  CheckpointSummary s;
  s.header = detail::parse_header(bytes);
  s.file_size = bytes.size();
  const std::size_t nn = static_cast<std::size_t>(s.header.n) * s.header.n;
  const std::size_t expected = kCheckpointHeaderSize + 6 * 8 * nn + 4;
  s.crc_ok = bytes.size() == expected &&
             detail::get_le<std::uint32_t>(&bytes[expected - 4]) == detail::crc32_of(bytes.data(), expected - 4);
  return s;
}

} // namespace mtrx
