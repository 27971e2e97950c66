#pragma once

// Input generators: the 2:3 Lissajous pair, the logistic population map,
// rotating line-drawn shapes and the sentence corpus.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cal/image.hpp"
#include "cal/rng.hpp"

namespace cal::gen {

/// (sin(4πt/360), sin(6πt/360 + π/6)); period 360.
inline std::pair<double, double> lissajous(double t) {
  const double pi = std::numbers::pi;
  return {std::sin(4.0 * pi * t / 360.0), std::sin(6.0 * pi * t / 360.0 + pi / 6.0)};
}

inline double popeq(double s, double beta) { return beta * s * (1.0 - s); }

enum class Shape { square, hexagon, pentagon, triangle, star5, star6, circle3d };

inline constexpr std::array<Shape, 7> kAllShapes{Shape::square, Shape::hexagon, Shape::pentagon, Shape::triangle,
                                                 Shape::star5,  Shape::star6,   Shape::circle3d};

inline std::string_view shape_name(Shape s) {
  switch (s) {
    case Shape::square: return "square";
    case Shape::hexagon: return "hexagon";
    case Shape::pentagon: return "pentagon";
    case Shape::triangle: return "triangle";
    case Shape::star5: return "star5";
    case Shape::star6: return "star6";
    case Shape::circle3d: return "circle3d";
  }
  return "?";
}

inline Shape parse_shape(std::string_view name) {
  for (auto s : kAllShapes)
    if (shape_name(s) == name) return s;
  throw std::invalid_argument("unknown shape '" + std::string(name) + "'");
}

struct ShapeSpec {
  Shape kind = Shape::square;
  std::size_t size = 48;       // square frame edge in pixels
  double step_degrees = 10.0;  // rotation per frame
  double radius_fraction = 0.42;

  std::size_t frames_per_revolution() const { return static_cast<std::size_t>(std::lround(360.0 / step_degrees)); }
};

namespace detail {

inline void plot(BinaryImage& img, long r, long c) {
  if (r >= 0 && c >= 0 && static_cast<std::size_t>(r) < img.rows && static_cast<std::size_t>(c) < img.cols)
    img.set(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
}

// Bresenham between pixel centres. Endpoints are ordered first so a segment
// rasterizes the same whichever way round it is given.
inline void line(BinaryImage& img, long r0, long c0, long r1, long c1) {
  if (std::pair(r1, c1) < std::pair(r0, c0)) std::swap(r0, r1), std::swap(c0, c1);
  const long dr = std::abs(r1 - r0), dc = std::abs(c1 - c0);
  const long sr = r0 < r1 ? 1 : -1, sc = c0 < c1 ? 1 : -1;
  long err = dc - dr;
  for (;;) {
    plot(img, r0, c0);
    if (r0 == r1 && c0 == c1) break;
    const long e2 = 2 * err;
    if (e2 > -dr) err -= dr, c0 += sc;
    if (e2 < dc) err += dc, r0 += sr;
  }
}

struct Vertex {
  long r, c;
};

// Vertex at polar angle `deg` (degrees, normalized so symmetric rotations
// produce bit-identical coordinates).
inline Vertex polar(double centre, double radius, double deg) {
  deg = std::fmod(deg, 360.0);
  if (deg < 0) deg += 360.0;
  const double a = deg * std::numbers::pi / 180.0;
  return {std::lround(centre - radius * std::sin(a)), std::lround(centre + radius * std::cos(a))};
}

inline void polygon(BinaryImage& img, const std::vector<Vertex>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % v.size()];
    line(img, a.r, a.c, b.r, b.c);
  }
}

inline std::vector<Vertex> regular(double centre, double radius, int sides, double angle) {
  std::vector<Vertex> v;
  for (int i = 0; i < sides; ++i) v.push_back(polar(centre, radius, angle + 90.0 + 360.0 * i / sides));
  return v;
}

}  // namespace detail

/// Outline of `spec.kind` rotated by `angle` degrees about the frame centre.
/// circle3d instead turns about the horizontal axis (face-on at 0°).
inline BinaryImage shape_frame(const ShapeSpec& spec, double angle) {
  if (spec.size < 8) throw std::invalid_argument("shape_frame: frame too small");
  BinaryImage img(spec.size, spec.size);
  const double centre = static_cast<double>(spec.size / 2);
  const double radius = spec.radius_fraction * static_cast<double>(spec.size);
  using detail::polygon, detail::regular;
  switch (spec.kind) {
    case Shape::square: polygon(img, regular(centre, radius, 4, angle + 45.0)); break;
    case Shape::hexagon: polygon(img, regular(centre, radius, 6, angle)); break;
    case Shape::pentagon: polygon(img, regular(centre, radius, 5, angle)); break;
    case Shape::triangle: polygon(img, regular(centre, radius, 3, angle)); break;
    case Shape::star5: {
      std::vector<detail::Vertex> v;
      for (int i = 0; i < 10; ++i)
        v.push_back(detail::polar(centre, i % 2 ? radius * 0.4 : radius, angle + 90.0 + 36.0 * i));
      polygon(img, v);
      break;
    }
    case Shape::star6:
      polygon(img, regular(centre, radius, 3, angle));
      polygon(img, regular(centre, radius, 3, angle + 60.0));
      break;
    case Shape::circle3d: {
      const double tilt = std::cos(angle * std::numbers::pi / 180.0);
      std::vector<detail::Vertex> v;
      for (int i = 0; i < 72; ++i) {
        const double phi = i * 5.0 * std::numbers::pi / 180.0;
        v.push_back({std::lround(centre - radius * tilt * std::sin(phi)), std::lround(centre + radius * std::cos(phi))});
      }
      polygon(img, v);
      break;
    }
  }
  return img;
}

/// The nine 16x16 (for a 48x48 frame) receptive fields, row-major over the grid.
inline std::vector<BinaryImage> receptive_fields(const BinaryImage& frame, std::size_t grid = 3) {
  if (frame.rows % grid || frame.cols % grid) throw std::invalid_argument("receptive_fields: frame not divisible by grid");
  const std::size_t h = frame.rows / grid, w = frame.cols / grid;
  std::vector<BinaryImage> out;
  for (std::size_t gi = 0; gi < grid; ++gi)
    for (std::size_t gj = 0; gj < grid; ++gj) out.push_back(frame.crop(gi * h, gj * w, h, w));
  return out;
}

/// Three sentences, 130 characters together.
inline const std::array<std::string, 3>& sentences() {
  static const std::array<std::string, 3> s{
      "the quick brown fox jumps over the lazy dog. ",
      "a stitch in time saves nine, or so they say. ",
      "every cloud has a silver lining, i say. ",
  };
  return s;
}

/// `sets` random orderings of 0..count-1, concatenated. No index follows
/// itself, including across set boundaries.
inline std::vector<std::size_t> block_order(std::size_t sets, std::size_t count, Rng& rng) {
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s < sets; ++s) {
    std::vector<std::size_t> perm(count);
    for (std::size_t i = 0; i < count; ++i) perm[i] = i;
    do {
      rng.shuffle(perm);
    } while (count > 1 && !order.empty() && perm.front() == order.back());
    order.insert(order.end(), perm.begin(), perm.end());
  }
  return order;
}

}  // namespace cal::gen
