#pragma once

// Mini-column sequence memory.
//
// Cells are indexed column-major (cell i of column j is j * N_cell + i) and
// lateral segments cell-major (segment q of cell c is c * N_seg + q), so the
// D = N_seg * N_cell segments of column j occupy [j * D, (j + 1) * D).
//
// One step:
//   v = cells of active columns that were predicted          (verified)
//   u = active columns holding no predicted cell            (unpredicted)
//   a = v | all cells of u                                  (active)
//   learn: previous activity a(t-1) is the axon vector; the segments that
//          predicted at t-1 plus, for every bursting column, the segment that
//          came closest to being predicted by a(t-1) are the dendrite vector.
//   d = aᵀ W, s = k-WTA(d), z = cells owning a segment of s (predicted)

#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "cal/binary_io.hpp"
#include "cal/bitvec.hpp"
#include "cal/rng.hpp"
#include "cal/synapses.hpp"

namespace cal {

struct SMGeometry {
  std::uint32_t columns = 1;
  std::uint32_t cells_per_column = 1;
  std::uint32_t segments_per_cell = 1;

  std::size_t cells() const noexcept { return std::size_t{columns} * cells_per_column; }
  std::size_t segments() const noexcept { return cells() * segments_per_cell; }
  std::size_t segments_per_column() const noexcept { return std::size_t{segments_per_cell} * cells_per_column; }

  void validate() const {
    if (columns < 1 || cells_per_column < 1 || segments_per_cell < 1)
      throw std::invalid_argument("SMGeometry: all dimensions must be >= 1");
  }

  bool operator==(const SMGeometry&) const = default;
};

namespace detail {
inline void require_length(const SparseBitVector& v, std::size_t n, const char* what) {
  if (v.length() != n) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}
}  // namespace detail

/// Every cell of the given columns.
inline SparseBitVector bursting(const SMGeometry& g, const SparseBitVector& u) {
  detail::require_length(u, g.columns, "bursting");
  std::vector<Index> idx;
  idx.reserve(u.cardinality() * g.cells_per_column);
  for (Index j : u)
    for (std::uint32_t i = 0; i < g.cells_per_column; ++i) idx.push_back(j * g.cells_per_column + i);
  return SparseBitVector(g.cells(), std::move(idx));
}

/// Columns containing at least one of the given cells.
inline SparseBitVector columns_of(const SMGeometry& g, const SparseBitVector& cells) {
  detail::require_length(cells, g.cells(), "columns_of");
  std::vector<Index> idx;
  for (Index c : cells) {
    const Index j = c / g.cells_per_column;
    if (idx.empty() || idx.back() != j) idx.push_back(j);
  }
  return SparseBitVector(g.columns, std::move(idx));
}

inline SparseBitVector verified(const SMGeometry& g, const SparseBitVector& y, const SparseBitVector& z_prev) {
  detail::require_length(y, g.columns, "verified");
  detail::require_length(z_prev, g.cells(), "verified");
  std::vector<Index> idx;
  for (Index c : z_prev)
    if (y.test(c / g.cells_per_column)) idx.push_back(c);
  return SparseBitVector(g.cells(), std::move(idx));
}

inline SparseBitVector unpredicted_columns(const SMGeometry& g, const SparseBitVector& y, const SparseBitVector& z_prev) {
  detail::require_length(y, g.columns, "unpredicted_columns");
  return set_difference(y, columns_of(g, z_prev));
}

inline SparseBitVector active_cells(const SparseBitVector& v, const SparseBitVector& b) { return set_union(v, b); }

/// d = aᵀ W_SM.
inline DenseExcitation excite(const SparseBitVector& a, const SynapseArray& w) { return w.excite(a); }

/// k-WTA over d, then one segment per unpredicted column: its most excited
/// segment, or a uniformly random one when the column's slice is all zero.
/// Random draws are consumed in ascending column order.
inline SparseBitVector select_segments(const SMGeometry& g, std::span<const double> d, const SparseBitVector& u,
                                       std::size_t k, Rng& rng) {
  if (d.size() != g.segments()) throw std::invalid_argument("select_segments: excitation length mismatch");
  detail::require_length(u, g.columns, "select_segments");
  if (k < 1) throw std::invalid_argument("select_segments: k must be >= 1");
  auto s = top_k(d, k);
  if (u.empty()) return s;
  const std::size_t per_col = g.segments_per_column();
  std::vector<Index> extra;
  for (Index j : u) {
    const std::size_t base = std::size_t{j} * per_col;
    std::size_t best = 0;
    for (std::size_t i = 1; i < per_col; ++i)
      if (d[base + i] > d[base + best]) best = i;
    if (!(d[base + best] > 0.0)) best = static_cast<std::size_t>(rng.below(per_col));
    extra.push_back(static_cast<Index>(base + best));
  }
  return set_union(s, SparseBitVector(g.segments(), std::move(extra)));
}

/// z[c] = 1 iff any of cell c's segments is in s.
inline SparseBitVector predict_cells(const SMGeometry& g, const SparseBitVector& s) {
  detail::require_length(s, g.segments(), "predict_cells");
  std::vector<Index> idx;
  for (Index q : s) {
    const Index c = q / g.segments_per_cell;
    if (idx.empty() || idx.back() != c) idx.push_back(c);
  }
  return SparseBitVector(g.cells(), std::move(idx));
}

struct SMParams {
  PlasticityParams plasticity{0.1, 0.05, 0.02, false, false, 0};
  unsigned weight_bits = 0;
  std::size_t max_fanin = 0;  // synapses per segment, 0 = unlimited
  std::size_t grow_budget = std::numeric_limits<std::size_t>::max();
  // Also grow up to k synapses onto each bursting column's chosen segment
  // from axons already wired to other targets.
  bool burst_grow = false;
  bool learning = true;

  bool operator==(const SMParams&) const = default;
};

struct SMStep {
  SparseBitVector v;  // verified cells
  SparseBitVector u;  // unpredicted (bursting) columns
  SparseBitVector a;  // active cells
  SparseBitVector s;  // predicting segments
  SparseBitVector z;  // predicted cells
  UpdateStats learned;
  std::size_t grown = 0;
};

class SequenceMemory {
 public:
  SequenceMemory() = default;

  SequenceMemory(const SMGeometry& geometry, const SMParams& params, std::uint64_t seed)
      : g_(geometry), params_(params), rng_(seed) {
    g_.validate();
    w_ = SynapseArray(g_.cells(), g_.segments(), params_.weight_bits, params_.max_fanin);
    grow_init_ = min_connected_permanence(params_.weight_bits);
    clear_history();
  }

  const SMGeometry& geometry() const noexcept { return g_; }
  const SMParams& params() const noexcept { return params_; }
  const SynapseArray& synapses() const noexcept { return w_; }
  SynapseArray& synapses() noexcept { return w_; }
  const Rng& rng() const noexcept { return rng_; }
  void set_learning(bool on) noexcept { params_.learning = on; }
  bool learning() const noexcept { return params_.learning; }
  void set_meta(bool on) noexcept { params_.plasticity.meta = on; }

  const SparseBitVector& previous_active() const noexcept { return a_prev_; }
  const SparseBitVector& previous_prediction() const noexcept { return z_prev_; }
  bool has_history() const noexcept { return has_prev_; }

  /// Forgets the previous step (e.g. at a sequence boundary); synapses stay.
  void clear_history() {
    a_prev_ = SparseBitVector(g_.cells());
    z_prev_ = SparseBitVector(g_.cells());
    d_prev_.assign(g_.segments(), 0.0);
    has_prev_ = false;
  }

  SMStep step(const SparseBitVector& y, std::size_t k) {
    detail::require_length(y, g_.columns, "SequenceMemory::step");
    SMStep out;
    out.v = verified(g_, y, z_prev_);
    out.u = unpredicted_columns(g_, y, z_prev_);
    out.a = active_cells(out.v, bursting(g_, out.u));

    if (params_.learning && has_prev_) learn(out, k);

    auto d = excite(out.a, w_);
    out.s = top_k(d, k);
    out.z = predict_cells(g_, out.s);

    a_prev_ = out.a;
    z_prev_ = out.z;
    d_prev_ = std::move(d);
    has_prev_ = true;
    return out;
  }

  void write(std::ostream& out) const {
    io::put_tag(out, "CALSM");
    io::put<std::uint16_t>(out, 1);
    io::put<std::uint32_t>(out, g_.columns);
    io::put<std::uint32_t>(out, g_.cells_per_column);
    io::put<std::uint32_t>(out, g_.segments_per_cell);
    io::put<std::uint64_t>(out, rng_.seed());
    io::put<std::uint64_t>(out, rng_.counter());
    io::put<std::uint8_t>(out, has_prev_ ? 1 : 0);
    io::put<std::uint8_t>(out, params_.learning ? 1 : 0);
    io::put<std::uint8_t>(out, params_.plasticity.meta ? 1 : 0);
    io::put_bits(out, a_prev_);
    io::put_bits(out, z_prev_);
    w_.write(out);
  }

  /// Restores state into an instance built with the same geometry.
  void read(std::istream& in) {
    io::expect_tag(in, "CALSM");
    if (io::get<std::uint16_t>(in) != 1) throw SnapshotError("sequence memory snapshot: unsupported version");
    SMGeometry g;
    g.columns = io::get<std::uint32_t>(in);
    g.cells_per_column = io::get<std::uint32_t>(in);
    g.segments_per_cell = io::get<std::uint32_t>(in);
    if (!(g == g_)) throw SnapshotError("sequence memory snapshot: geometry mismatch");
    const auto seed = io::get<std::uint64_t>(in);
    const auto counter = io::get<std::uint64_t>(in);
    const bool has_prev = io::get<std::uint8_t>(in) != 0;
    params_.learning = io::get<std::uint8_t>(in) != 0;
    params_.plasticity.meta = io::get<std::uint8_t>(in) != 0;
    auto a = io::get_bits(in);
    auto z = io::get_bits(in);
    if (a.length() != g_.cells() || z.length() != g_.cells()) throw SnapshotError("sequence memory snapshot: bad history");
    auto w = SynapseArray::read(in);
    if (w.axons() != g_.cells() || w.dendrites() != g_.segments())
      throw SnapshotError("sequence memory snapshot: synapse array geometry mismatch");
    rng_ = Rng(seed, counter);
    has_prev_ = has_prev;
    a_prev_ = std::move(a);
    z_prev_ = std::move(z);
    w_ = std::move(w);
    // The cached excitation is a pure function of a_prev and W.
    d_prev_ = excite(a_prev_, w_);
  }

  bool operator==(const SequenceMemory& o) const {
    return g_ == o.g_ && params_ == o.params_ && rng_ == o.rng_ && has_prev_ == o.has_prev_ && a_prev_ == o.a_prev_ &&
           z_prev_ == o.z_prev_ && w_ == o.w_;
  }

 private:
  void learn(SMStep& out, std::size_t k) {
    const auto candidates = select_segments(g_, d_prev_, out.u, k, rng_);
    std::vector<Index> hits;
    for (Index q : candidates)
      if (out.a.test(q / g_.segments_per_cell)) hits.push_back(q);
    const SparseBitVector targets(g_.segments(), std::move(hits));
    out.learned = w_.update(a_prev_, targets, params_.plasticity, &candidates);
    out.grown = w_.grow(a_prev_, targets, grow_init_, params_.grow_budget);
    // Without this a context already wired to another prediction can never
    // be learned by a bursting column.
    if (!params_.burst_grow) return;
    const std::size_t per_col = g_.segments_per_column();
    for (Index q : targets) {
      if (!out.u.test(q / per_col) || out.grown >= params_.grow_budget) continue;
      out.grown += w_.grow(a_prev_, SparseBitVector(g_.segments(), {q}), grow_init_,
                           std::min(k, params_.grow_budget - out.grown));
    }
  }

  SMGeometry g_;
  SMParams params_;
  Rng rng_;
  SynapseArray w_;
  PermanenceQ grow_init_ = 1;
  SparseBitVector a_prev_;
  SparseBitVector z_prev_;
  DenseExcitation d_prev_;
  bool has_prev_ = false;
};

}  // namespace cal
