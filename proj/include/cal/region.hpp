#pragma once

// One cortical region: feed-forward correlator, sequence memory and the
// apical (feedback) array, plus the temporal pooling buffer.
//
//   x      = concat(ff inputs)
//   pooled = OR of the last pool_window x's
//   g      = 1 + fᵀ W_Ap            (per feed-forward axon; absent f => g = 1)
//   y      = k-WTA((pooled ⊙ g)ᵀ W)
//   v, z   = sequence memory step on y
//   x̂      = per-channel top-k of W · columns(z)

#include <cstddef>
#include <cstdint>
#include <deque>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cal/binary_io.hpp"
#include "cal/bitvec.hpp"
#include "cal/correlator.hpp"
#include "cal/rng.hpp"
#include "cal/sequence_memory.hpp"
#include "cal/synapses.hpp"

namespace cal {

struct RegionConfig {
  std::vector<std::size_t> channel_widths{1};  // feed-forward channels, concatenated in order
  std::vector<std::size_t> channel_k;          // reconstruction k per channel (empty: skip reconstruction)
  SMGeometry geometry;
  std::size_t k_out = 0;  // 0 = round(sqrt(columns))
  std::size_t pool_window = 1;

  CorrelatorMode correlator_mode = CorrelatorMode::hardwired;
  std::size_t hardwire_fanin = 1;
  unsigned correlator_bits = 0;
  std::size_t correlator_max_fanin = 0;
  PlasticityParams correlator_plasticity;
  Recruitment recruitment = Recruitment::deficit;
  double recruit_permanence = 0.0;    // 0 = the grow permanence
  std::size_t initial_fanin = 0;      // learning mode: random starting wiring per column (0 = start empty)
  double initial_permanence = 0.5;

  bool sequence_memory = true;
  SMParams sm;

  std::size_t feedback_width = 0;
  unsigned apical_bits = 0;
  PlasticityParams apical_plasticity{0.1, 0.02, 0.02, true, false, 0};

  std::size_t input_width() const { return std::accumulate(channel_widths.begin(), channel_widths.end(), std::size_t{0}); }
  std::size_t k() const { return k_out ? k_out : default_k(geometry.columns); }

  void validate() const {
    geometry.validate();
    if (channel_widths.empty()) throw std::invalid_argument("RegionConfig: at least one input channel required");
    for (auto w : channel_widths)
      if (w == 0) throw std::invalid_argument("RegionConfig: channel widths must be positive");
    if (!channel_k.empty() && channel_k.size() != channel_widths.size())
      throw std::invalid_argument("RegionConfig: channel_k must list one k per channel");
    if (pool_window < 1) throw std::invalid_argument("RegionConfig: pool_window must be >= 1");
    if (k() > geometry.columns) throw std::invalid_argument("RegionConfig: k_out exceeds column count");
  }
};

struct RegionOutput {
  SparseBitVector x;       // concatenated feed-forward input
  SparseBitVector pooled;  // temporally pooled input
  SparseBitVector y;       // active columns
  SparseBitVector v;       // verified cells
  SparseBitVector z;       // predicted cells
  SparseBitVector x_hat;   // reconstructed predicted input (empty when nothing is predicted)
  double persistence = 1.0;
};

/// g = 1 + fᵀ W_Ap.
inline DenseExcitation apical_gain(const SparseBitVector& f, const SynapseArray& apical) {
  auto g = apical.excite(f);
  for (auto& e : g) e += 1.0;
  return g;
}

class Region {
 public:
  Region() = default;

  Region(RegionConfig config, std::uint64_t seed) : cfg_(std::move(config)) {
    cfg_.validate();
    const std::size_t m = cfg_.input_width();
    const std::size_t n = cfg_.geometry.columns;
    if (cfg_.correlator_mode == CorrelatorMode::hardwired) {
      correlator_ = Correlator(hardwire_array(m, n, cfg_.hardwire_fanin, derive_seed(seed, 1), cfg_.correlator_bits),
                               cfg_.k(), CorrelatorMode::hardwired, cfg_.correlator_plasticity);
    } else {
      auto array = cfg_.initial_fanin
                       ? hardwire_array(m, n, cfg_.initial_fanin, derive_seed(seed, 1), cfg_.correlator_bits,
                                        cfg_.initial_permanence)
                       : SynapseArray(m, n, cfg_.correlator_bits, cfg_.correlator_max_fanin);
      correlator_ = Correlator(std::move(array), cfg_.k(), CorrelatorMode::learning, cfg_.correlator_plasticity);
    }
    correlator_.set_recruitment(cfg_.recruitment);
    correlator_.set_recruit_permanence(to_fixed(cfg_.recruit_permanence));
    if (cfg_.sequence_memory) sm_ = SequenceMemory(cfg_.geometry, cfg_.sm, derive_seed(seed, 2));
    apical_ = SynapseArray(cfg_.feedback_width, m, cfg_.apical_bits);
    prev_y_ = SparseBitVector(n);
  }

  const RegionConfig& config() const noexcept { return cfg_; }
  const Correlator& correlator() const noexcept { return correlator_; }
  Correlator& correlator() noexcept { return correlator_; }
  const SequenceMemory& sequence_memory() const noexcept { return sm_; }
  SequenceMemory& sequence_memory() noexcept { return sm_; }
  const SynapseArray& apical() const noexcept { return apical_; }
  std::size_t cells() const noexcept { return cfg_.geometry.cells(); }
  std::size_t columns() const noexcept { return cfg_.geometry.columns; }

  /// Stops all plasticity (correlator, sequence memory and apical array).
  void set_learning(bool on) {
    learning_ = on;
    if (cfg_.correlator_mode == CorrelatorMode::learning)
      correlator_.set_mode(on ? CorrelatorMode::learning : CorrelatorMode::hardwired);
    if (cfg_.sequence_memory) sm_.set_learning(on);
  }
  bool learning() const noexcept { return learning_; }

  RegionOutput step(std::span<const SparseBitVector> inputs, const SparseBitVector* feedback = nullptr) {
    if (inputs.size() != cfg_.channel_widths.size()) throw std::invalid_argument("Region::step: channel count mismatch");
    for (std::size_t c = 0; c < inputs.size(); ++c)
      if (inputs[c].length() != cfg_.channel_widths[c]) throw std::invalid_argument("Region::step: channel width mismatch");
    RegionOutput out;
    out.x = concat(inputs);
    return step_concat(std::move(out), feedback);
  }

  RegionOutput step(const SparseBitVector& x, const SparseBitVector* feedback = nullptr) {
    if (x.length() != cfg_.input_width()) throw std::invalid_argument("Region::step: input width mismatch");
    RegionOutput out;
    out.x = x;
    return step_concat(std::move(out), feedback);
  }

  /// Per-channel reconstruction of an arbitrary column set.
  SparseBitVector reconstruct(const SparseBitVector& columns) const {
    if (cfg_.channel_k.empty()) return correlator_.reconstruct(columns, cfg_.input_width());
    return correlator_.reconstruct(columns, cfg_.channel_widths, cfg_.channel_k);
  }

  void write(std::ostream& out) const {
    io::put_tag(out, "CALREG");
    io::put<std::uint16_t>(out, 1);
    io::put<std::uint8_t>(out, learning_ ? 1 : 0);
    correlator_.write(out);
    io::put<std::uint8_t>(out, cfg_.sequence_memory ? 1 : 0);
    if (cfg_.sequence_memory) sm_.write(out);
    apical_.write(out);
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(history_.size()));
    for (const auto& h : history_) io::put_bits(out, h);
    io::put_bits(out, prev_y_);
  }

  void read(std::istream& in) {
    io::expect_tag(in, "CALREG");
    if (io::get<std::uint16_t>(in) != 1) throw SnapshotError("region snapshot: unsupported version");
    const bool learning = io::get<std::uint8_t>(in) != 0;
    correlator_.read(in);
    const bool has_sm = io::get<std::uint8_t>(in) != 0;
    if (has_sm != cfg_.sequence_memory) throw SnapshotError("region snapshot: sequence memory presence mismatch");
    if (has_sm) sm_.read(in);
    auto apical = SynapseArray::read(in);
    if (apical.axons() != apical_.axons() || apical.dendrites() != apical_.dendrites())
      throw SnapshotError("region snapshot: apical geometry mismatch");
    apical_ = std::move(apical);
    const auto depth = io::get<std::uint32_t>(in);
    if (depth >= cfg_.pool_window + 1) throw SnapshotError("region snapshot: pooling history too deep");
    history_.clear();
    for (std::uint32_t i = 0; i < depth; ++i) {
      auto h = io::get_bits(in);
      if (h.length() != cfg_.input_width()) throw SnapshotError("region snapshot: pooling history width mismatch");
      history_.push_back(std::move(h));
    }
    auto y = io::get_bits(in);
    if (y.length() != columns()) throw SnapshotError("region snapshot: column vector width mismatch");
    prev_y_ = std::move(y);
    learning_ = learning;
  }

  bool operator==(const Region& o) const {
    return learning_ == o.learning_ && correlator_ == o.correlator_ && cfg_.sequence_memory == o.cfg_.sequence_memory &&
           (!cfg_.sequence_memory || sm_ == o.sm_) && apical_ == o.apical_ && history_ == o.history_ &&
           prev_y_ == o.prev_y_;
  }

 private:
  RegionOutput step_concat(RegionOutput out, const SparseBitVector* feedback) {
    history_.push_back(out.x);
    while (history_.size() > cfg_.pool_window) history_.pop_front();
    out.pooled = cfg_.pool_window == 1 ? out.x : union_window(std::vector<SparseBitVector>(history_.begin(), history_.end()));

    DenseExcitation gain;
    const bool fb = cfg_.feedback_width > 0 && feedback != nullptr;
    if (fb) {
      if (feedback->length() != cfg_.feedback_width) throw std::invalid_argument("Region::step: feedback width mismatch");
      if (!feedback->empty()) gain = apical_gain(*feedback, apical_);
    }
    out.y = correlator_.forward(out.pooled, gain);

    if (cfg_.sequence_memory) {
      auto r = sm_.step(out.y, cfg_.k());
      out.v = std::move(r.v);
      out.z = std::move(r.z);
      out.x_hat = reconstruct(columns_of(cfg_.geometry, out.z));
    } else {
      out.v = SparseBitVector(cells());
      out.z = SparseBitVector(cells());
      out.x_hat = reconstruct(out.y);
    }

    if (fb && learning_ && !feedback->empty()) learn_apical(*feedback, out);
    out.persistence = jaccard(out.y, prev_y_);
    prev_y_ = out.y;
    return out;
  }

  // Gain slots are feed-forward axons; the apical target is the pooled input
  // that is wired onto a winning column.
  void learn_apical(const SparseBitVector& f, const RegionOutput& out) {
    std::vector<Index> idx;
    const auto& w = correlator_.array();
    for (Index i : out.pooled)
      for (Index j : out.y)
        if (w.is_connected(i, j)) {
          idx.push_back(i);
          break;
        }
    const SparseBitVector target(cfg_.input_width(), std::move(idx));
    apical_.update(f, target, cfg_.apical_plasticity);
    apical_.grow(f, target, min_connected_permanence(cfg_.apical_bits));
  }

  RegionConfig cfg_;
  Correlator correlator_;
  SequenceMemory sm_;
  SynapseArray apical_;
  std::deque<SparseBitVector> history_;
  SparseBitVector prev_y_;
  bool learning_ = true;
};

}  // namespace cal
