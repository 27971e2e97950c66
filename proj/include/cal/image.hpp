#pragma once

// Binary frames plus plain portable bitmap (P1) and graymap (P2) I/O.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cal {

struct BinaryImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 0 or 1

  BinaryImage() = default;
  BinaryImage(std::size_t r, std::size_t c) : rows(r), cols(c), pixels(r * c, 0) {}

  std::uint8_t at(std::size_t i, std::size_t j) const { return pixels[i * cols + j]; }
  void set(std::size_t i, std::size_t j, bool on = true) { pixels[i * cols + j] = on ? 1 : 0; }

  /// Sub-image [r0, r0+h) x [c0, c0+w).
  BinaryImage crop(std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) const {
    if (r0 + h > rows || c0 + w > cols) throw std::invalid_argument("BinaryImage::crop: out of bounds");
    BinaryImage out(h, w);
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) out.pixels[i * w + j] = at(r0 + i, c0 + j);
    return out;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto p : pixels) n += p;
    return n;
  }

  bool operator==(const BinaryImage&) const = default;
};

namespace detail {
inline std::string next_pnm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}
}  // namespace detail

inline BinaryImage read_pbm(std::istream& in) {
  if (detail::next_pnm_token(in) != "P1") throw std::runtime_error("read_pbm: expected P1 header");
  const auto cols = std::stoul(detail::next_pnm_token(in));
  const auto rows = std::stoul(detail::next_pnm_token(in));
  if (rows == 0 || cols == 0) throw std::runtime_error("read_pbm: empty image");
  BinaryImage img(rows, cols);
  std::size_t k = 0;
  char c;
  while (k < img.pixels.size() && in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (c == '0' || c == '1') {
      img.pixels[k++] = static_cast<std::uint8_t>(c - '0');
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      throw std::runtime_error("read_pbm: bad pixel character");
    }
  }
  if (k != img.pixels.size()) throw std::runtime_error("read_pbm: truncated pixel data");
  return img;
}

inline void write_pbm(std::ostream& out, const BinaryImage& img) {
  out << "P1\n" << img.cols << ' ' << img.rows << '\n';
  for (std::size_t i = 0; i < img.rows; ++i) {
    for (std::size_t j = 0; j < img.cols; ++j) out << (j ? " " : "") << int(img.at(i, j));
    out << '\n';
  }
}

/// Plain graymap; values are scaled so the largest maps to `maxval`.
template <typename Matrix>
void write_pgm(std::ostream& out, const Matrix& m, int maxval = 255) {
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  double peak = 0.0;
  for (const auto& row : m)
    for (auto v : row) peak = std::max(peak, static_cast<double>(v));
  out << "P2\n" << cols << ' ' << rows << '\n' << maxval << '\n';
  for (const auto& row : m) {
    bool first = true;
    for (auto v : row) {
      const int g = peak > 0 ? static_cast<int>(static_cast<double>(v) / peak * maxval + 0.5) : 0;
      out << (first ? "" : " ") << g;
      first = false;
    }
    out << '\n';
  }
}

}  // namespace cal
