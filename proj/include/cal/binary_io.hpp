#pragma once

// Little-endian fixed-width serialization used by every snapshot format.

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "cal/bitvec.hpp"

namespace cal {

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace io {

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  std::array<char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(buf.data(), buf.size());
}

template <typename T>
T get(std::istream& in) {
  static_assert(std::is_unsigned_v<T>);
  std::array<unsigned char, sizeof(T)> buf{};
  in.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (!in) throw SnapshotError("snapshot: unexpected end of stream");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
  return value;
}

inline void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put(out, bits);
}

inline double get_f64(std::istream& in) {
  const auto bits = get<std::uint64_t>(in);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

inline void put_tag(std::ostream& out, std::string_view tag) { out.write(tag.data(), static_cast<std::streamsize>(tag.size())); }

inline void expect_tag(std::istream& in, std::string_view tag) {
  std::string got(tag.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (!in || got != tag) throw SnapshotError("snapshot: bad header, expected '" + std::string(tag) + "'");
}

inline void put_string(std::ostream& out, std::string_view s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  if (n > (1u << 24)) throw SnapshotError("snapshot: implausible string length");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw SnapshotError("snapshot: unexpected end of stream");
  return s;
}

inline void put_bits(std::ostream& out, const SparseBitVector& v) {
  put<std::uint64_t>(out, v.length());
  put<std::uint64_t>(out, v.cardinality());
  for (Index i : v) put<std::uint32_t>(out, i);
}

inline SparseBitVector get_bits(std::istream& in) {
  const auto length = get<std::uint64_t>(in);
  const auto count = get<std::uint64_t>(in);
  if (count > length) throw SnapshotError("snapshot: bit vector cardinality exceeds length");
  std::vector<Index> idx(count);
  for (auto& i : idx) i = get<std::uint32_t>(in);
  try {
    return SparseBitVector(length, std::move(idx));
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(std::string("snapshot: ") + e.what());
  }
}

}  // namespace io
}  // namespace cal
