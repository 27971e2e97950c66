#pragma once

// Running metrics and the plain-text outputs (CSV, matrices) of the runners.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cal/image.hpp"

namespace cal::metrics {

/// RMS of the last `window` errors; missing errors (no prediction) are skipped.
class RunningRms {
 public:
  explicit RunningRms(std::size_t window = 50) : window_(window) {
    if (window == 0) throw std::invalid_argument("RunningRms: window must be positive");
  }

  void push(std::optional<double> error) {
    buf_.push_back(error);
    if (error) sum_ += *error * *error, ++count_;
    if (buf_.size() > window_) {
      if (buf_.front()) sum_ -= *buf_.front() * *buf_.front(), --count_;
      buf_.pop_front();
    }
  }

  /// nullopt when the window holds no errors at all.
  std::optional<double> value() const {
    if (count_ == 0) return std::nullopt;
    return std::sqrt(std::max(0.0, sum_) / static_cast<double>(count_));
  }

 private:
  std::size_t window_;
  std::deque<std::optional<double>> buf_;
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

/// Running mean over a fixed window.
class RunningMean {
 public:
  explicit RunningMean(std::size_t window = 50) : window_(window) {}

  void push(double v) {
    buf_.push_back(v);
    if (buf_.size() > window_) buf_.pop_front();
  }

  double value() const {
    if (buf_.empty()) return 0.0;
    double s = 0.0;
    for (double v : buf_) s += v;
    return s / static_cast<double>(buf_.size());
  }

 private:
  std::size_t window_;
  std::deque<double> buf_;
};

/// %.9g; empty for NaN.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string fmt(std::optional<double> v) { return v ? fmt(*v) : std::string(); }

class CsvWriter {
 public:
  CsvWriter() = default;
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) { open(path, header); }

  void open(const std::filesystem::path& path, const std::vector<std::string>& header) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    row(header);
  }

  bool is_open() const { return out_.is_open(); }

  void row(const std::vector<std::string>& cells) {
    if (!out_.is_open()) return;
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

template <typename Matrix>
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& row : m) {
    bool first = true;
    for (auto v : row) {
      out << (first ? "" : ",") << fmt(static_cast<double>(v));
      first = false;
    }
    out << '\n';
  }
}

template <typename Matrix>
void write_matrix_pgm(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_pgm(out, m);
}

}  // namespace cal::metrics
