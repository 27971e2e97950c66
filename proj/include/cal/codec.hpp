#pragma once

// Slide-bar scalar encoder/decoder and binary frame ingestion.
//
// A scalar s in [s_min, s_max] falls into bin b = round((s - s_min) / r) and
// is encoded by the k consecutive bits b*d .. b*d + k - 1 of an N-bit vector,
// N = d * (bins - 1) + k. Decoding picks the bin whose encoding overlaps the
// input most; ties go to the bin centred nearest the active bits, then the
// lowest bin.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cal/bitvec.hpp"
#include "cal/image.hpp"

namespace cal {

enum class ScalarKind { real, integer };

struct EncoderSpec {
  double s_min = 0.0;
  double s_max = 1.0;
  double resolution = 1.0;
  std::uint32_t k = 1;  // active bits per encoding
  std::uint32_t d = 1;  // displacement between neighbouring bins
  ScalarKind kind = ScalarKind::real;
  std::uint32_t bins = 1;
  std::uint32_t width = 1;  // N

  bool operator==(const EncoderSpec&) const = default;
};

/// `d == 0` selects the default displacement: k for integers, 1 for reals.
inline EncoderSpec make_encoder(double s_min, double s_max, double resolution, std::uint32_t k, ScalarKind kind,
                                std::uint32_t d = 0) {
  if (!(resolution > 0.0)) throw std::invalid_argument("make_encoder: resolution must be positive");
  if (!(s_max > s_min)) throw std::invalid_argument("make_encoder: s_max must exceed s_min");
  if (k < 1) throw std::invalid_argument("make_encoder: k must be >= 1");
  EncoderSpec spec;
  spec.s_min = s_min;
  spec.s_max = s_max;
  spec.resolution = resolution;
  spec.k = k;
  spec.kind = kind;
  const double steps = (s_max - s_min) / resolution;
  const double rounded = std::round(steps);
  if (kind == ScalarKind::integer) {
    if (resolution != 1.0) throw std::invalid_argument("make_encoder: integer channels use resolution 1");
    if (std::abs(steps - rounded) > 1e-9 || std::abs(s_min - std::round(s_min)) > 1e-9)
      throw std::invalid_argument("make_encoder: integer range must span a whole number of bins");
    if (d != 0 && d != k) throw std::invalid_argument("make_encoder: integer channels require d == k");
    spec.d = k;
  } else {
    if (std::abs(steps - rounded) > 1e-6 * std::max(1.0, rounded))
      throw std::invalid_argument("make_encoder: range is not a whole number of resolution steps");
    spec.d = d == 0 ? 1 : d;
    if (spec.d > k) throw std::invalid_argument("make_encoder: real channels require 1 <= d <= k");
  }
  spec.bins = static_cast<std::uint32_t>(rounded) + 1;
  spec.width = spec.d * (spec.bins - 1) + k;
  return spec;
}

/// Integer channel spanning the character codes that occur in `text`.
inline EncoderSpec make_char_encoder(std::string_view text, std::uint32_t k = 5) {
  if (text.empty()) throw std::invalid_argument("make_char_encoder: empty text");
  unsigned char lo = 255, hi = 0;
  for (unsigned char c : text) lo = std::min(lo, c), hi = std::max(hi, c);
  if (lo == hi) ++hi;
  return make_encoder(lo, hi, 1.0, k, ScalarKind::integer);
}

inline std::uint32_t bin_of(const EncoderSpec& spec, double s) {
  const double half = spec.resolution / 2.0;
  if (!(s >= spec.s_min - half && s <= spec.s_max + half)) {
    throw std::out_of_range("encode: value " + std::to_string(s) + " outside [" + std::to_string(spec.s_min) + ", " +
                            std::to_string(spec.s_max) + "]");
  }
  const double b = std::round((s - spec.s_min) / spec.resolution);
  return static_cast<std::uint32_t>(std::clamp(b, 0.0, static_cast<double>(spec.bins - 1)));
}

inline double bin_value(const EncoderSpec& spec, std::uint32_t bin) {
  return static_cast<double>(bin) * spec.resolution + spec.s_min;
}

inline SparseBitVector encode_bin(const EncoderSpec& spec, std::uint32_t bin) {
  std::vector<Index> idx(spec.k);
  for (std::uint32_t i = 0; i < spec.k; ++i) idx[i] = bin * spec.d + i;
  return SparseBitVector(spec.width, std::move(idx));
}

inline SparseBitVector encode(const EncoderSpec& spec, double s) { return encode_bin(spec, bin_of(spec, s)); }

namespace detail {

// Among equally scored bins, the one whose encoding is centred closest to the
// mean active position; lowest bin on an exact tie.
inline std::uint32_t nearest_centre(const EncoderSpec& spec, const SparseBitVector& x,
                                    const std::vector<std::uint32_t>& tied) {
  if (tied.size() == 1) return tied.front();
  double mean = 0.0;
  for (Index j : x) mean += static_cast<double>(j);
  mean /= static_cast<double>(x.cardinality());
  std::uint32_t best = tied.front();
  double best_gap = INFINITY;
  for (auto b : tied) {
    const double centre = static_cast<double>(b) * spec.d + (static_cast<double>(spec.k) - 1.0) / 2.0;
    const double gap = std::abs(centre - mean);
    if (gap < best_gap) best = b, best_gap = gap;
  }
  return best;
}

}  // namespace detail

/// Bin whose encoding best overlaps `x`; nullopt when `x` is empty.
inline std::optional<std::uint32_t> best_bin(const EncoderSpec& spec, const SparseBitVector& x) {
  if (x.length() != spec.width) throw std::invalid_argument("decode: vector length does not match encoder width");
  if (x.empty()) return std::nullopt;
  // Bits i*d .. i*d+k-1 belong to bin i, so bit j is covered by bins
  // ceil((j-k+1)/d) .. floor(j/d).
  std::vector<std::uint32_t> score(spec.bins, 0);
  const std::int64_t k = spec.k, d = spec.d;
  for (Index j : x) {
    const std::int64_t lo = std::max<std::int64_t>(0, (static_cast<std::int64_t>(j) - k + 1 + d - 1) / d);
    const std::int64_t hi = std::min<std::int64_t>(spec.bins - 1, static_cast<std::int64_t>(j) / d);
    for (std::int64_t b = lo; b <= hi; ++b) ++score[b];
  }
  std::uint32_t top = 0;
  for (auto s : score) top = std::max(top, s);
  std::vector<std::uint32_t> tied;
  for (std::uint32_t b = 0; b < spec.bins; ++b)
    if (score[b] == top) tied.push_back(b);
  return detail::nearest_centre(spec, x, tied);
}

/// Decoded scalar, or nullopt ("no prediction") for an all-zero vector.
inline std::optional<double> decode(const EncoderSpec& spec, const SparseBitVector& x) {
  auto b = best_bin(spec, x);
  if (!b) return std::nullopt;
  return bin_value(spec, *b);
}

/// Look-up table with one column per bin holding that bin's encoding.
class DecodeTable {
 public:
  explicit DecodeTable(const EncoderSpec& spec) : spec_(spec), columns_(spec.bins) {
    for (std::uint32_t b = 0; b < spec.bins; ++b) columns_[b] = encode_bin(spec, b);
  }

  const SparseBitVector& column(std::uint32_t bin) const { return columns_.at(bin); }
  std::size_t size() const noexcept { return columns_.size(); }

  /// Matrix-product decode: scores every column by overlap with `x`.
  std::optional<double> decode(const SparseBitVector& x) const {
    if (x.length() != spec_.width) throw std::invalid_argument("decode: vector length does not match encoder width");
    if (x.empty()) return std::nullopt;
    std::vector<std::size_t> score(columns_.size());
    std::size_t top = 0;
    for (std::size_t b = 0; b < columns_.size(); ++b) top = std::max(top, score[b] = overlap(columns_[b], x));
    std::vector<std::uint32_t> tied;
    for (std::size_t b = 0; b < columns_.size(); ++b)
      if (score[b] == top) tied.push_back(static_cast<std::uint32_t>(b));
    return bin_value(spec_, detail::nearest_centre(spec_, x, tied));
  }

 private:
  EncoderSpec spec_;
  std::vector<SparseBitVector> columns_;
};

/// Unwraps a frame column-major: pixel (i, j) -> j * rows + i.
inline SparseBitVector ingest_frame(const BinaryImage& image) {
  if (image.rows == 0 || image.cols == 0) throw std::invalid_argument("ingest_frame: empty image");
  std::vector<Index> idx;
  for (std::size_t j = 0; j < image.cols; ++j)
    for (std::size_t i = 0; i < image.rows; ++i)
      if (image.at(i, j)) idx.push_back(static_cast<Index>(j * image.rows + i));
  return SparseBitVector(image.rows * image.cols, std::move(idx));
}

}  // namespace cal
