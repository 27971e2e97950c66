#pragma once

// Binary correlator: the feed-forward synapse array that selects the active
// mini-columns of a region, and its reverse (reconstruction).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cal/binary_io.hpp"
#include "cal/bitvec.hpp"
#include "cal/rng.hpp"
#include "cal/synapses.hpp"

namespace cal {

enum class CorrelatorMode { hardwired, learning };

/// How a learning correlator wires axons it has no synapse for.
///   deficit: when fewer than k columns respond, k - |y| fresh columns copy
///            the input; other unwired axons grow onto the winners.
///   novelty: fresh columns copy the input in proportion to the share of
///            active axons that are unwired (at least the deficit); nothing
///            grows onto winners.
enum class Recruitment { deficit, novelty };

/// round(sqrt(n)) active columns keeps accidental overlaps of random codes rare.
inline std::size_t default_k(std::size_t columns) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(columns)))));
}

/// Top-k of r restricted to [offset, offset + width), positive entries only.
inline std::vector<Index> top_k_segment(std::span<const double> r, std::size_t offset, std::size_t width, std::size_t k) {
  auto part = top_k(r.subspan(offset, width), k);
  std::vector<Index> out;
  for (Index i : part) out.push_back(static_cast<Index>(i + offset));
  return out;
}

class Correlator {
 public:
  Correlator() = default;

  Correlator(SynapseArray array, std::size_t k_out, CorrelatorMode mode, PlasticityParams plasticity = {})
      : array_(std::move(array)), k_out_(k_out), mode_(mode), plasticity_(plasticity) {
    if (k_out_ < 1 || k_out_ > array_.dendrites()) throw std::invalid_argument("Correlator: k_out must lie in [1, n]");
    grow_init_ = min_connected_permanence(array_.weight_bits());
  }

  std::size_t inputs() const noexcept { return array_.axons(); }
  std::size_t columns() const noexcept { return array_.dendrites(); }
  std::size_t k_out() const noexcept { return k_out_; }
  CorrelatorMode mode() const noexcept { return mode_; }
  void set_mode(CorrelatorMode mode) noexcept { mode_ = mode; }
  const SynapseArray& array() const noexcept { return array_; }
  SynapseArray& array() noexcept { return array_; }
  const PlasticityParams& plasticity() const noexcept { return plasticity_; }
  const UpdateStats& last_update() const noexcept { return last_update_; }
  PermanenceQ grow_permanence() const noexcept { return grow_init_; }
  void set_grow_permanence(PermanenceQ q) { grow_init_ = q; }
  /// Starting permanence of synapses placed on recruited columns.
  PermanenceQ recruit_permanence() const noexcept { return recruit_init_; }
  void set_recruit_permanence(PermanenceQ q) { recruit_init_ = std::max(q, grow_init_); }
  Recruitment recruitment() const noexcept { return recruitment_; }
  void set_recruitment(Recruitment r) noexcept { recruitment_ = r; }

  /// Active columns for input x with optional per-axon gain. In learning mode
  /// the winners are then reinforced against the raw binary x.
  SparseBitVector forward(const SparseBitVector& x, std::span<const double> gain = {}) {
    if (x.length() != inputs()) throw std::invalid_argument("Correlator::forward: input width mismatch");
    for (double g : gain)
      if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("Correlator::forward: gain must be finite and >= 0");
    auto y = top_k(array_.excite(x, gain), k_out_);
    if (mode_ == CorrelatorMode::learning) learn(x, y);
    return y;
  }

  /// Activation only; never modifies synapses.
  SparseBitVector activate(const SparseBitVector& x, std::span<const double> gain = {}) const {
    if (x.length() != inputs()) throw std::invalid_argument("Correlator::activate: input width mismatch");
    return top_k(array_.excite(x, gain), k_out_);
  }

  /// x̂ = top-k_in of W ŷ.
  SparseBitVector reconstruct(const SparseBitVector& y_hat, std::size_t k_in) const {
    if (y_hat.length() != columns()) throw std::invalid_argument("Correlator::reconstruct: column width mismatch");
    return top_k(array_.back_excite(y_hat), k_in);
  }

  /// Per-channel reconstruction: top-k_in[c] within each channel's slice.
  SparseBitVector reconstruct(const SparseBitVector& y_hat, std::span<const std::size_t> widths,
                              std::span<const std::size_t> k_in) const {
    if (y_hat.length() != columns()) throw std::invalid_argument("Correlator::reconstruct: column width mismatch");
    if (widths.size() != k_in.size()) throw std::invalid_argument("Correlator::reconstruct: channel count mismatch");
    if (std::accumulate(widths.begin(), widths.end(), std::size_t{0}) != inputs())
      throw std::invalid_argument("Correlator::reconstruct: channel widths do not cover the input");
    const auto r = array_.back_excite(y_hat);
    std::vector<Index> idx;
    std::size_t offset = 0;
    for (std::size_t c = 0; c < widths.size(); ++c) {
      auto part = top_k_segment(r, offset, widths[c], k_in[c]);
      idx.insert(idx.end(), part.begin(), part.end());
      offset += widths[c];
    }
    return SparseBitVector(inputs(), std::move(idx));
  }

  /// Dense m x m matrix: entry (i, j) counts dendrites connected to both axons.
  std::vector<std::vector<std::uint32_t>> covariance() const {
    const std::size_t m = inputs();
    std::vector<std::vector<std::uint32_t>> c(m, std::vector<std::uint32_t>(m, 0));
    std::vector<Index> conn;
    for (std::size_t j = 0; j < columns(); ++j) {
      conn.clear();
      for (Index i : array_.column(j))
        if (array_.is_connected(i, j)) conn.push_back(i);
      for (Index a : conn)
        for (Index b : conn) ++c[a][b];
    }
    return c;
  }

  void write(std::ostream& out) const {
    io::put_tag(out, "CALCOR");
    io::put<std::uint16_t>(out, 1);
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(k_out_));
    io::put<std::uint8_t>(out, mode_ == CorrelatorMode::learning ? 1 : 0);
    io::put<std::uint16_t>(out, grow_init_);
    array_.write(out);
  }

  /// Restores wiring and mode; plasticity parameters stay as configured.
  void read(std::istream& in) {
    io::expect_tag(in, "CALCOR");
    if (io::get<std::uint16_t>(in) != 1) throw SnapshotError("correlator snapshot: unsupported version");
    const auto k = io::get<std::uint32_t>(in);
    const auto mode = io::get<std::uint8_t>(in) ? CorrelatorMode::learning : CorrelatorMode::hardwired;
    const auto grow = io::get<std::uint16_t>(in);
    auto arr = SynapseArray::read(in);
    if (arr.axons() != array_.axons() || arr.dendrites() != array_.dendrites() || k != k_out_)
      throw SnapshotError("correlator snapshot: geometry mismatch");
    mode_ = mode;
    grow_init_ = grow;
    array_ = std::move(arr);
  }

  bool operator==(const Correlator& o) const {
    return k_out_ == o.k_out_ && mode_ == o.mode_ && plasticity_ == o.plasticity_ && grow_init_ == o.grow_init_ &&
           recruitment_ == o.recruitment_ && array_ == o.array_;
  }

 private:
  void learn(const SparseBitVector& x, const SparseBitVector& y) {
    last_update_ = array_.update(x, y, plasticity_);
    if (x.empty()) return;
    std::size_t need = k_out_ > y.cardinality() ? k_out_ - y.cardinality() : 0;
    if (recruitment_ == Recruitment::novelty) {
      std::size_t unwired = 0;
      for (Index i : x) unwired += array_.fanout(i) == 0;
      need = std::max(need, (k_out_ * unwired + x.cardinality() - 1) / x.cardinality());
    }
    if (need) array_.connect(x, recruits(y, need), std::max(recruit_init_, grow_init_));
    if (recruitment_ == Recruitment::deficit && !y.empty()) array_.grow(x, y, grow_init_);
  }

  // The `need` least-connected silent columns, lowest index first.
  SparseBitVector recruits(const SparseBitVector& y, std::size_t need) const {
    std::vector<Index> silent;
    for (std::size_t j = 0; j < columns(); ++j)
      if (!y.test(j)) silent.push_back(static_cast<Index>(j));
    need = std::min(need, silent.size());
    std::partial_sort(silent.begin(), silent.begin() + static_cast<std::ptrdiff_t>(need), silent.end(),
                      [&](Index a, Index b) {
                        const auto fa = array_.fanin(a), fb = array_.fanin(b);
                        return fa < fb || (fa == fb && a < b);
                      });
    silent.resize(need);
    return SparseBitVector::from_unsorted(columns(), std::move(silent));
  }

  SynapseArray array_;
  std::size_t k_out_ = 1;
  CorrelatorMode mode_ = CorrelatorMode::hardwired;
  PlasticityParams plasticity_;
  PermanenceQ grow_init_ = 1;
  PermanenceQ recruit_init_ = 1;
  Recruitment recruitment_ = Recruitment::deficit;
  UpdateStats last_update_;
};

/// Unit-permanence wiring with exactly `fanin` synapses per column and axon
/// fan-outs that differ by at most one, laid out by a seeded permutation.
inline SynapseArray hardwire_array(std::size_t m, std::size_t n, std::size_t fanin, std::uint64_t seed,
                                   unsigned weight_bits = 0, double permanence = 1.0) {
  if (m == 0 || n == 0 || fanin == 0) throw std::invalid_argument("hardwire: dimensions must be positive");
  if (fanin > m) throw std::invalid_argument("hardwire: fan-in exceeds axon count");
  if (fanin * n < m) throw std::invalid_argument("hardwire: fanin * n must cover every axon");
  Rng rng(seed);
  const std::size_t total = fanin * n;
  std::vector<Index> slots;
  slots.reserve(total);
  std::vector<Index> perm(m);
  while (slots.size() < total) {
    std::iota(perm.begin(), perm.end(), Index{0});
    rng.shuffle(perm);
    for (std::size_t i = 0; i < m && slots.size() < total; ++i) slots.push_back(perm[i]);
  }
  // Repair duplicates inside a column by swapping with a later slot.
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t base = j * fanin;
    for (std::size_t a = base; a < base + fanin; ++a) {
      auto dup = [&](Index axon) {
        for (std::size_t b = base; b < base + fanin; ++b)
          if (b != a && slots[b] == axon) return true;
        return false;
      };
      if (!dup(slots[a])) continue;
      bool fixed = false;
      for (std::size_t c = 0; c < total && !fixed; ++c) {
        if (c >= base && c < base + fanin) continue;
        // Swap only if it keeps both columns duplicate-free.
        const std::size_t cb = (c / fanin) * fanin;
        bool ok = !dup(slots[c]);
        for (std::size_t b = cb; b < cb + fanin && ok; ++b)
          if (b != c && slots[b] == slots[a]) ok = false;
        if (ok) {
          std::swap(slots[a], slots[c]);
          fixed = true;
        }
      }
      if (!fixed) throw std::invalid_argument("hardwire: could not place distinct axons per column");
    }
  }
  SynapseArray arr(m, n, weight_bits);
  const auto q = to_fixed(permanence);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t a = j * fanin; a < (j + 1) * fanin; ++a) arr.set_fixed(slots[a], j, q);
  return arr;
}

inline Correlator hardwire(std::size_t m, std::size_t n, std::size_t fanin, std::uint64_t seed, std::size_t k_out = 0) {
  return Correlator(hardwire_array(m, n, fanin, seed), k_out ? k_out : default_k(n), CorrelatorMode::hardwired);
}

}  // namespace cal
