#pragma once

// Plastic synapse arrays.
//
// A SynapseArray connects m axons to n dendrites. Only realized synapses are
// stored; each carries a permanence in [0, 1] held as 16-bit fixed point
// (q / 65535), so snapshots round-trip exactly and every update is
// reproducible bit for bit. The weight seen by activation is the permanence
// quantized to `weight_bits` (0 = full precision); weight 0 means
// disconnected.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cal/binary_io.hpp"
#include "cal/bitvec.hpp"

namespace cal {

using PermanenceQ = std::uint16_t;
inline constexpr double kPermanenceScale = 65535.0;

inline constexpr double to_permanence(PermanenceQ q) noexcept { return static_cast<double>(q) / kPermanenceScale; }

inline PermanenceQ to_fixed(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("permanence must lie in [0, 1]");
  return static_cast<PermanenceQ>(std::lround(p * kPermanenceScale));
}

inline bool valid_weight_bits(unsigned bits) noexcept {
  return bits == 0 || bits == 1 || bits == 2 || bits == 3 || bits == 4 || bits == 8;
}

/// Weight for permanence p at the given precision; bits == 0 is full precision.
inline double quantize(double p, unsigned bits) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantize: permanence must lie in [0, 1]");
  if (bits == 0) return p;
  const double levels = static_cast<double>((1u << bits) - 1u);
  return std::round(p * levels) / levels;
}

/// Multiplier on anti-Hebbian decrements: the most permanent synapses are immune.
inline double metaplastic_factor(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("metaplastic_factor: permanence must lie in [0, 1]");
  return 1.0 - p;
}

/// Smallest fixed-point permanence whose weight is nonzero.
inline PermanenceQ min_connected_permanence(unsigned bits) {
  if (bits == 0) return 1;
  const double levels = static_cast<double>((1u << bits) - 1u);
  auto q = static_cast<PermanenceQ>(std::ceil(0.5 / levels * kPermanenceScale));
  while (q > 1 && quantize(to_permanence(q - 1), bits) > 0.0) --q;
  while (quantize(to_permanence(q), bits) == 0.0) ++q;
  return q;
}

struct PlasticityParams {
  double delta_aa = 0.1;   // Hebbian increment (the region's learning rate)
  double delta_ai = 0.02;  // axon active, dendrite inactive
  double delta_ia = 0.02;  // axon inactive, dendrite active
  bool balance = true;     // scale anti-Hebbian terms so total decrement matches total increment
  bool meta = false;       // shrink decrements of permanent synapses by (1 - p)
  std::uint64_t rng_seed = 0;

  bool operator==(const PlasticityParams&) const = default;
};

struct UpdateStats {
  std::size_t aa_pairs = 0;
  std::size_t ai_pairs = 0;
  std::size_t ia_pairs = 0;
  std::size_t strengthened = 0;
  std::size_t weakened = 0;
  std::size_t pruned = 0;
  double increment = 0.0;  // sum of applied permanence increases
  double decrement = 0.0;  // sum of applied permanence decreases (positive)
  double delta_ai = 0.0;   // coefficients actually used
  double delta_ia = 0.0;

  UpdateStats& operator+=(const UpdateStats& o) {
    aa_pairs += o.aa_pairs, ai_pairs += o.ai_pairs, ia_pairs += o.ia_pairs;
    strengthened += o.strengthened, weakened += o.weakened, pruned += o.pruned;
    increment += o.increment, decrement += o.decrement;
    return *this;
  }
};

/// Indices of the k largest positive entries, lowest index first among ties.
inline SparseBitVector top_k(std::span<const double> e, std::size_t k) {
  std::vector<Index> cand;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] > 0.0) cand.push_back(static_cast<Index>(i));
  auto better = [&](Index a, Index b) { return e[a] > e[b] || (e[a] == e[b] && a < b); };
  if (cand.size() > k) {
    std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(), better);
    cand.resize(k);
  }
  std::sort(cand.begin(), cand.end());
  return SparseBitVector(e.size(), std::move(cand));
}

class SynapseArray {
 public:
  struct Synapse {
    Index dendrite;
    PermanenceQ q;
    bool operator==(const Synapse&) const = default;
  };

  SynapseArray() = default;

  SynapseArray(std::size_t axons, std::size_t dendrites, unsigned weight_bits = 0, std::size_t max_fanin = 0)
      : m_(axons), n_(dendrites), bits_(weight_bits), max_fanin_(max_fanin), rows_(axons), cols_(dendrites) {
    if (!valid_weight_bits(weight_bits)) throw std::invalid_argument("SynapseArray: unsupported weight precision");
  }

  std::size_t axons() const noexcept { return m_; }
  std::size_t dendrites() const noexcept { return n_; }
  unsigned weight_bits() const noexcept { return bits_; }
  std::size_t max_fanin() const noexcept { return max_fanin_; }
  std::size_t size() const noexcept { return count_; }
  std::size_t fanin(std::size_t j) const { return cols_.at(j).size(); }
  std::size_t fanout(std::size_t i) const { return rows_.at(i).size(); }
  std::span<const Synapse> row(std::size_t i) const { return rows_.at(i); }
  std::span<const Index> column(std::size_t j) const { return cols_.at(j); }

  double weight_of(PermanenceQ q) const noexcept {
    const double p = to_permanence(q);
    if (bits_ == 0) return p;
    const double levels = static_cast<double>((1u << bits_) - 1u);
    return std::round(p * levels) / levels;
  }

  std::optional<PermanenceQ> fixed(std::size_t i, std::size_t j) const {
    const auto& r = rows_.at(i);
    auto it = find_in_row(r, static_cast<Index>(j));
    if (it == r.end()) return std::nullopt;
    return it->q;
  }

  std::optional<double> permanence(std::size_t i, std::size_t j) const {
    auto q = fixed(i, j);
    if (!q) return std::nullopt;
    return to_permanence(*q);
  }

  double weight(std::size_t i, std::size_t j) const {
    auto q = fixed(i, j);
    return q ? weight_of(*q) : 0.0;
  }

  /// Creates, changes, or (for q == 0) removes the synapse i -> j.
  void set_fixed(std::size_t i, std::size_t j, PermanenceQ q) {
    check_index(i, j);
    auto& r = rows_[i];
    auto it = std::lower_bound(r.begin(), r.end(), static_cast<Index>(j),
                               [](const Synapse& s, Index d) { return s.dendrite < d; });
    const bool exists = it != r.end() && it->dendrite == j;
    if (q == 0) {
      if (exists) erase(i, j);
      return;
    }
    if (exists) {
      it->q = q;
      return;
    }
    r.insert(it, Synapse{static_cast<Index>(j), q});
    auto& c = cols_[j];
    c.insert(std::lower_bound(c.begin(), c.end(), static_cast<Index>(i)), static_cast<Index>(i));
    ++count_;
  }

  void set_permanence(std::size_t i, std::size_t j, double p) { set_fixed(i, j, to_fixed(p)); }

  std::size_t connected() const {
    std::size_t n = 0;
    for (const auto& r : rows_)
      for (const auto& s : r) n += weight_of(s.q) > 0.0;
    return n;
  }

  bool is_connected(std::size_t i, std::size_t j) const { return weight(i, j) > 0.0; }

  /// e = (x ⊙ g)ᵀ W; an empty gain means unit gain. Contributions accumulate
  /// in ascending axon order.
  DenseExcitation excite(const SparseBitVector& x, std::span<const double> gain = {}) const {
    if (x.length() != m_) throw std::invalid_argument("excite: input length does not match axon count");
    if (!gain.empty() && gain.size() != m_) throw std::invalid_argument("excite: gain length does not match axon count");
    DenseExcitation e(n_, 0.0);
    for (Index i : x) {
      const double g = gain.empty() ? 1.0 : gain[i];
      for (const auto& s : rows_[i]) e[s.dendrite] += g * weight_of(s.q);
    }
    return e;
  }

  /// r = W y, accumulated over active dendrites in ascending order.
  DenseExcitation back_excite(const SparseBitVector& y) const {
    if (y.length() != n_) throw std::invalid_argument("back_excite: output length does not match dendrite count");
    DenseExcitation r(m_, 0.0);
    for (Index j : y)
      for (Index i : cols_[j]) r[i] += weight(i, j);
    return r;
  }

  /// Applies δP = δ_AA x yᵀ − δ_AI x (e_n − y)ᵀ − δ_IA (e_m − x) yᵀ to the
  /// realized synapses, clips to [0, 1] and prunes synapses that reach zero.
  /// `ai_scope`, when given, restricts the axon-only term to those dendrites.
  UpdateStats update(const SparseBitVector& x, const SparseBitVector& y, const PlasticityParams& params,
                     const SparseBitVector* ai_scope = nullptr) {
    if (x.length() != m_) throw std::invalid_argument("update: input length does not match axon count");
    if (y.length() != n_) throw std::invalid_argument("update: output length does not match dendrite count");
    if (ai_scope && ai_scope->length() != n_) throw std::invalid_argument("update: scope length mismatch");

    std::vector<std::uint8_t> xm(m_, 0), ym(n_, 0), scope(n_, ai_scope ? 0 : 1);
    for (Index i : x) xm[i] = 1;
    for (Index j : y) ym[j] = 1;
    if (ai_scope)
      for (Index j : *ai_scope) scope[j] = 1;

    UpdateStats st;
    for (Index i : x)
      for (const auto& s : rows_[i]) {
        if (ym[s.dendrite]) {
          ++st.aa_pairs;
        } else if (scope[s.dendrite]) {
          ++st.ai_pairs;
        }
      }
    for (Index j : y)
      for (Index i : cols_[j]) st.ia_pairs += xm[i] ? 0 : 1;

    if (params.balance) {
      const double share = params.delta_aa * static_cast<double>(st.aa_pairs) /
                           static_cast<double>(std::max<std::size_t>(1, st.ai_pairs + st.ia_pairs));
      st.delta_ai = st.delta_ia = share;
    } else {
      st.delta_ai = params.delta_ai;
      st.delta_ia = params.delta_ia;
    }

    auto apply = [&](PermanenceQ& q, double delta) {
      if (delta < 0.0 && params.meta) delta *= metaplastic_factor(to_permanence(q));
      const long next = std::clamp<long>(std::lround(static_cast<double>(q) + delta * kPermanenceScale), 0, 65535);
      const double change = static_cast<double>(next - static_cast<long>(q)) / kPermanenceScale;
      if (next > q) {
        ++st.strengthened, st.increment += change;
      } else if (next < q) {
        ++st.weakened, st.decrement -= change;
      }
      q = static_cast<PermanenceQ>(next);
    };

    std::vector<std::pair<Index, Index>> dead;
    for (Index i : x)
      for (auto& s : rows_[i]) {
        if (ym[s.dendrite]) {
          apply(s.q, params.delta_aa);
        } else if (scope[s.dendrite]) {
          apply(s.q, -st.delta_ai);
        } else {
          continue;
        }
        if (s.q == 0) dead.emplace_back(i, s.dendrite);
      }
    for (Index j : y)
      for (Index i : cols_[j]) {
        if (xm[i]) continue;
        auto it = find_in_row(rows_[i], j);
        apply(it->q, -st.delta_ia);
        if (it->q == 0) dead.emplace_back(i, j);
      }
    for (auto [i, j] : dead) erase(i, j);
    st.pruned = dead.size();
    return st;
  }

  /// For every active axon without a connected synapse onto any candidate
  /// dendrite, creates one (permanence `init`) on the candidate with the fewest
  /// synapses, lowest index first. Honors max_fanin and stops after `budget`.
  std::size_t grow(const SparseBitVector& x, const SparseBitVector& candidates, PermanenceQ init,
                   std::size_t budget = std::numeric_limits<std::size_t>::max()) {
    if (x.length() != m_) throw std::invalid_argument("grow: input length does not match axon count");
    if (candidates.length() != n_) throw std::invalid_argument("grow: candidate length does not match dendrite count");
    if (init == 0) throw std::invalid_argument("grow: initial permanence must be positive");
    if (candidates.empty()) return 0;
    std::vector<std::uint8_t> cm(n_, 0);
    for (Index j : candidates) cm[j] = 1;
    std::size_t created = 0;
    for (Index i : x) {
      if (created >= budget) break;
      bool linked = false;
      for (const auto& s : rows_[i])
        if (cm[s.dendrite] && weight_of(s.q) > 0.0) {
          linked = true;
          break;
        }
      if (linked) continue;
      std::optional<Index> target;
      for (Index j : candidates) {
        if (max_fanin_ && cols_[j].size() >= max_fanin_ && !fixed(i, j)) continue;
        if (!target || cols_[j].size() < cols_[*target].size()) target = j;
      }
      if (!target) continue;
      const auto current = fixed(i, *target);
      set_fixed(i, *target, std::max(init, current.value_or(0)));
      ++created;
    }
    return created;
  }

  /// Realizes every missing (active axon, candidate dendrite) pair at
  /// permanence `init`, i.e. the Hebbian term of the update applied to
  /// potential synapses. Honors max_fanin; returns the number created.
  std::size_t connect(const SparseBitVector& x, const SparseBitVector& candidates, PermanenceQ init) {
    if (x.length() != m_) throw std::invalid_argument("connect: input length does not match axon count");
    if (candidates.length() != n_) throw std::invalid_argument("connect: candidate length does not match dendrite count");
    if (init == 0) throw std::invalid_argument("connect: initial permanence must be positive");
    std::size_t created = 0;
    for (Index j : candidates)
      for (Index i : x) {
        if (max_fanin_ && cols_[j].size() >= max_fanin_) break;
        if (find_in_row(rows_[i], j) != rows_[i].end()) continue;
        set_fixed(i, j, init);
        ++created;
      }
    return created;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < m_; ++i)
      for (const auto& s : rows_[i]) f(static_cast<Index>(i), s.dendrite, s.q);
  }

  void write(std::ostream& out) const {
    io::put_tag(out, "CALSYN");
    io::put<std::uint16_t>(out, 1);
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(m_));
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(n_));
    io::put<std::uint8_t>(out, static_cast<std::uint8_t>(bits_));
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(max_fanin_));
    io::put<std::uint64_t>(out, count_);
    for_each([&](Index i, Index j, PermanenceQ q) {
      io::put<std::uint32_t>(out, i);
      io::put<std::uint32_t>(out, j);
      io::put<std::uint16_t>(out, q);
    });
  }

  static SynapseArray read(std::istream& in) {
    io::expect_tag(in, "CALSYN");
    if (io::get<std::uint16_t>(in) != 1) throw SnapshotError("synapse snapshot: unsupported version");
    const auto m = io::get<std::uint32_t>(in);
    const auto n = io::get<std::uint32_t>(in);
    const auto bits = io::get<std::uint8_t>(in);
    const auto max_fanin = io::get<std::uint32_t>(in);
    if (!valid_weight_bits(bits)) throw SnapshotError("synapse snapshot: bad weight precision");
    SynapseArray a(m, n, bits, max_fanin);
    const auto count = io::get<std::uint64_t>(in);
    if (count > static_cast<std::uint64_t>(m) * n) throw SnapshotError("synapse snapshot: synapse count exceeds m*n");
    for (std::uint64_t k = 0; k < count; ++k) {
      const auto i = io::get<std::uint32_t>(in);
      const auto j = io::get<std::uint32_t>(in);
      const auto q = io::get<std::uint16_t>(in);
      if (i >= m || j >= n || q == 0) throw SnapshotError("synapse snapshot: bad synapse record");
      a.set_fixed(i, j, q);
    }
    return a;
  }

  bool operator==(const SynapseArray& o) const {
    return m_ == o.m_ && n_ == o.n_ && bits_ == o.bits_ && max_fanin_ == o.max_fanin_ && rows_ == o.rows_;
  }

 private:
  static std::vector<Synapse>::const_iterator find_in_row(const std::vector<Synapse>& r, Index j) {
    auto it = std::lower_bound(r.begin(), r.end(), j, [](const Synapse& s, Index d) { return s.dendrite < d; });
    return (it != r.end() && it->dendrite == j) ? it : r.end();
  }
  static std::vector<Synapse>::iterator find_in_row(std::vector<Synapse>& r, Index j) {
    auto it = std::lower_bound(r.begin(), r.end(), j, [](const Synapse& s, Index d) { return s.dendrite < d; });
    return (it != r.end() && it->dendrite == j) ? it : r.end();
  }

  void check_index(std::size_t i, std::size_t j) const {
    if (i >= m_ || j >= n_) throw std::out_of_range("SynapseArray: synapse index out of range");
  }

  void erase(std::size_t i, std::size_t j) {
    auto& r = rows_[i];
    auto it = find_in_row(r, static_cast<Index>(j));
    if (it == r.end()) return;
    r.erase(it);
    auto& c = cols_[j];
    c.erase(std::lower_bound(c.begin(), c.end(), static_cast<Index>(i)));
    --count_;
  }

  std::size_t m_ = 0;
  std::size_t n_ = 0;
  unsigned bits_ = 0;
  std::size_t max_fanin_ = 0;
  std::size_t count_ = 0;
  std::vector<std::vector<Synapse>> rows_;
  std::vector<std::vector<Index>> cols_;
};

/// y = the k most excited dendrites of xᵀW (positive excitation only).
inline SparseBitVector kwta_activate(const SynapseArray& arr, const SparseBitVector& x, std::size_t k) {
  if (k < 1 || k > arr.dendrites()) throw std::invalid_argument("kwta_activate: k must lie in [1, n]");
  const auto e = arr.excite(x);
  return top_k(e, k);
}

}  // namespace cal
