#pragma once

// Sparse binary vectors (sorted active indices plus a declared length) and the
// set operations used throughout the network.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cal {

using Index = std::uint32_t;

/// Real-valued excitation, one entry per dendrite or segment.
using DenseExcitation = std::vector<double>;

class SparseBitVector {
 public:
  SparseBitVector() = default;

  explicit SparseBitVector(std::size_t length) : length_(length) {}

  /// `active` must be strictly increasing and below `length`.
  SparseBitVector(std::size_t length, std::vector<Index> active)
      : length_(length), active_(std::move(active)) {
    validate();
  }

  SparseBitVector(std::size_t length, std::initializer_list<Index> active)
      : SparseBitVector(length, std::vector<Index>(active)) {}

  /// Sorts and deduplicates arbitrary indices.
  static SparseBitVector from_unsorted(std::size_t length, std::vector<Index> idx) {
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return SparseBitVector(length, std::move(idx));
  }

  /// Builds from a dense 0/1 mask.
  template <typename T>
  static SparseBitVector from_mask(std::span<const T> mask) {
    std::vector<Index> idx;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) idx.push_back(static_cast<Index>(i));
    }
    SparseBitVector v;
    v.length_ = mask.size();
    v.active_ = std::move(idx);
    return v;
  }

  static SparseBitVector full(std::size_t length) {
    std::vector<Index> idx(length);
    for (std::size_t i = 0; i < length; ++i) idx[i] = static_cast<Index>(i);
    SparseBitVector v;
    v.length_ = length;
    v.active_ = std::move(idx);
    return v;
  }

  std::size_t length() const noexcept { return length_; }
  std::size_t cardinality() const noexcept { return active_.size(); }
  bool empty() const noexcept { return active_.empty(); }
  std::span<const Index> active() const noexcept { return active_; }
  const std::vector<Index>& indices() const noexcept { return active_; }

  bool test(std::size_t i) const {
    return std::binary_search(active_.begin(), active_.end(), static_cast<Index>(i));
  }

  std::vector<std::uint8_t> to_mask() const {
    std::vector<std::uint8_t> m(length_, 0);
    for (Index i : active_) m[i] = 1;
    return m;
  }

  auto begin() const noexcept { return active_.begin(); }
  auto end() const noexcept { return active_.end(); }

  bool operator==(const SparseBitVector&) const = default;

 private:
  void validate() const {
    for (std::size_t i = 0; i < active_.size(); ++i) {
      if (active_[i] >= length_) {
        throw std::invalid_argument("SparseBitVector: index " + std::to_string(active_[i]) +
                                    " out of range for length " + std::to_string(length_));
      }
      if (i > 0 && active_[i - 1] >= active_[i]) {
        throw std::invalid_argument("SparseBitVector: indices must be strictly increasing");
      }
    }
  }

  std::size_t length_ = 0;
  std::vector<Index> active_;
};

inline std::size_t cardinality(const SparseBitVector& v) noexcept { return v.cardinality(); }

namespace detail {
inline void require_same_length(const SparseBitVector& a, const SparseBitVector& b, const char* op) {
  if (a.length() != b.length()) {
    throw std::invalid_argument(std::string(op) + ": length mismatch (" + std::to_string(a.length()) +
                                " vs " + std::to_string(b.length()) + ")");
  }
}
}  // namespace detail

inline std::size_t overlap(const SparseBitVector& a, const SparseBitVector& b) {
  detail::require_same_length(a, b, "overlap");
  std::size_t n = 0;
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n, ++i, ++j;
    }
  }
  return n;
}

inline SparseBitVector set_union(const SparseBitVector& a, const SparseBitVector& b) {
  detail::require_same_length(a, b, "union");
  std::vector<Index> out;
  out.reserve(a.cardinality() + b.cardinality());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return SparseBitVector(a.length(), std::move(out));
}

inline SparseBitVector set_intersection(const SparseBitVector& a, const SparseBitVector& b) {
  detail::require_same_length(a, b, "intersection");
  std::vector<Index> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return SparseBitVector(a.length(), std::move(out));
}

inline SparseBitVector set_difference(const SparseBitVector& a, const SparseBitVector& b) {
  detail::require_same_length(a, b, "difference");
  std::vector<Index> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return SparseBitVector(a.length(), std::move(out));
}

/// |a ∩ b| / |a ∪ b|; two empty vectors are identical (1.0).
inline double jaccard(const SparseBitVector& a, const SparseBitVector& b) {
  const std::size_t inter = overlap(a, b);
  const std::size_t uni = a.cardinality() + b.cardinality() - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

inline SparseBitVector concat(std::span<const SparseBitVector> vs) {
  if (vs.empty()) throw std::invalid_argument("concat: empty list");
  std::size_t length = 0, count = 0;
  for (const auto& v : vs) length += v.length(), count += v.cardinality();
  std::vector<Index> idx;
  idx.reserve(count);
  std::size_t offset = 0;
  for (const auto& v : vs) {
    for (Index i : v) idx.push_back(static_cast<Index>(offset + i));
    offset += v.length();
  }
  return SparseBitVector(length, std::move(idx));
}

inline SparseBitVector concat(std::initializer_list<SparseBitVector> vs) {
  return concat(std::span<const SparseBitVector>(vs.begin(), vs.size()));
}

/// Inverse of concat for the given segment widths.
inline std::vector<SparseBitVector> split(const SparseBitVector& v, std::span<const std::size_t> widths) {
  std::size_t total = 0;
  for (auto w : widths) total += w;
  if (total != v.length()) throw std::invalid_argument("split: widths do not sum to vector length");
  std::vector<SparseBitVector> out;
  out.reserve(widths.size());
  auto it = v.begin();
  std::size_t offset = 0;
  for (auto w : widths) {
    std::vector<Index> idx;
    while (it != v.end() && *it < offset + w) {
      idx.push_back(static_cast<Index>(*it - offset));
      ++it;
    }
    out.emplace_back(w, std::move(idx));
    offset += w;
  }
  return out;
}

/// Logical OR of equal-length vectors.
inline SparseBitVector union_window(std::span<const SparseBitVector> vs) {
  if (vs.empty()) throw std::invalid_argument("union_window: empty list");
  SparseBitVector acc(vs.front().length());
  for (const auto& v : vs) acc = set_union(acc, v);
  return acc;
}

/// Restricts `v` to indices [offset, offset + width), re-based to zero.
inline SparseBitVector slice(const SparseBitVector& v, std::size_t offset, std::size_t width) {
  if (offset + width > v.length()) throw std::invalid_argument("slice: out of range");
  auto lo = std::lower_bound(v.begin(), v.end(), static_cast<Index>(offset));
  std::vector<Index> idx;
  for (auto it = lo; it != v.end() && *it < offset + width; ++it) idx.push_back(static_cast<Index>(*it - offset));
  return SparseBitVector(width, std::move(idx));
}

/// `len:N;idx:i1,i2,...`
inline std::string to_string(const SparseBitVector& v) {
  std::string s = "len:" + std::to_string(v.length()) + ";idx:";
  bool first = true;
  for (Index i : v) {
    if (!first) s += ',';
    s += std::to_string(i);
    first = false;
  }
  return s;
}

inline SparseBitVector parse_bitvec(std::string_view text) {
  auto fail = [&]() -> SparseBitVector {
    throw std::invalid_argument("parse_bitvec: malformed '" + std::string(text) + "'");
  };
  constexpr std::string_view kLen = "len:", kIdx = ";idx:";
  if (text.substr(0, kLen.size()) != kLen) return fail();
  const auto sep = text.find(kIdx);
  if (sep == std::string_view::npos) return fail();
  auto parse_num = [&](std::string_view s) -> std::uint64_t {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) fail();
    return value;
  };
  const auto length = parse_num(text.substr(kLen.size(), sep - kLen.size()));
  std::vector<Index> idx;
  auto rest = text.substr(sep + kIdx.size());
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    idx.push_back(static_cast<Index>(parse_num(rest.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
    if (rest.empty()) fail();
  }
  return SparseBitVector(length, std::move(idx));
}

}  // namespace cal
