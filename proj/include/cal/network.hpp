#pragma once

// Hierarchy of regions with one tick of latency on every feed-forward and
// feedback edge. Level-1 regions read sensors; a level-L region reads the
// verified cells of its level L-1 sources as they were one tick earlier and
// receives, as feedback, the active columns of higher regions from one tick
// earlier.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <future>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cal/binary_io.hpp"
#include "cal/bitvec.hpp"
#include "cal/codec.hpp"
#include "cal/region.hpp"

namespace cal {

enum class SensorKind { scalar, image, binary };

struct SensorSpec {
  std::string id;
  SensorKind kind = SensorKind::binary;
  EncoderSpec encoder;     // scalar sensors
  std::size_t rows = 0;    // image sensors
  std::size_t cols = 0;
  std::size_t width = 0;   // always set: the encoded width

  std::size_t k() const { return kind == SensorKind::scalar ? encoder.k : 0; }
};

struct RegionSpec {
  std::string id;
  int level = 1;
  std::vector<std::string> inputs;    // sensors (level 1) or level-1-lower regions, in concatenation order
  std::vector<std::string> feedback;  // higher regions whose active columns feed the apical array
  RegionConfig config;                // channel widths and feedback width are filled in by the builder
};

struct TopologySpec {
  std::vector<SensorSpec> sensors;
  std::vector<RegionSpec> regions;
  bool parallel = false;  // step the regions of one tick concurrently
};

class TopologyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline PlasticityParams parse_plasticity(const nlohmann::json& j, PlasticityParams p) {
  p.delta_aa = j.value("delta_aa", p.delta_aa);
  p.delta_ai = j.value("delta_ai", p.delta_ai);
  p.delta_ia = j.value("delta_ia", p.delta_ia);
  p.balance = j.value("balance", p.balance);
  p.meta = j.value("meta", p.meta);
  if (!(p.delta_aa > 0.0)) throw TopologyError("plasticity: delta_aa must be positive");
  return p;
}

inline SensorSpec parse_sensor(const nlohmann::json& j) {
  SensorSpec s;
  s.id = j.at("id").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "real" || kind == "integer") {
    s.kind = SensorKind::scalar;
    s.encoder = make_encoder(j.at("min").get<double>(), j.at("max").get<double>(), j.value("resolution", 1.0),
                             j.value("k", 5u), kind == "real" ? ScalarKind::real : ScalarKind::integer, j.value("d", 0u));
    s.width = s.encoder.width;
  } else if (kind == "image") {
    s.kind = SensorKind::image;
    s.rows = j.at("rows").get<std::size_t>();
    s.cols = j.at("cols").get<std::size_t>();
    s.width = s.rows * s.cols;
  } else if (kind == "binary") {
    s.kind = SensorKind::binary;
    s.width = j.at("width").get<std::size_t>();
  } else {
    throw TopologyError("sensor '" + s.id + "': unknown kind '" + kind + "'");
  }
  if (s.width == 0) throw TopologyError("sensor '" + s.id + "': zero width");
  return s;
}

inline RegionSpec parse_region(const nlohmann::json& j) {
  RegionSpec r;
  r.id = j.at("id").get<std::string>();
  r.level = j.value("level", 1);
  r.inputs = j.at("inputs").get<std::vector<std::string>>();
  r.feedback = j.value("feedback", std::vector<std::string>{});
  auto& c = r.config;
  c.geometry.columns = j.at("columns").get<std::uint32_t>();
  c.geometry.cells_per_column = j.value("cells", 1u);
  c.geometry.segments_per_cell = j.value("segments", 1u);
  c.k_out = j.value("k", std::size_t{0});
  c.pool_window = j.value("pool_window", std::size_t{1});
  if (auto it = j.find("correlator"); it != j.end()) {
    const auto mode = it->value("mode", std::string("hardwired"));
    if (mode != "hardwired" && mode != "learning") throw TopologyError("region '" + r.id + "': unknown correlator mode");
    c.correlator_mode = mode == "learning" ? CorrelatorMode::learning : CorrelatorMode::hardwired;
    c.hardwire_fanin = it->value("fanin", std::size_t{1});
    c.correlator_bits = it->value("bits", 0u);
    c.correlator_max_fanin = it->value("max_fanin", std::size_t{0});
    c.correlator_plasticity = parse_plasticity(*it, c.correlator_plasticity);
    const auto rec = it->value("recruit", std::string("deficit"));
    if (rec != "deficit" && rec != "novelty") throw TopologyError("region '" + r.id + "': unknown recruit policy");
    c.recruitment = rec == "novelty" ? Recruitment::novelty : Recruitment::deficit;
    c.recruit_permanence = it->value("recruit_permanence", 0.0);
    c.initial_fanin = it->value("initial_fanin", std::size_t{0});
    c.initial_permanence = it->value("initial_permanence", 0.5);
  }
  if (auto it = j.find("sequence_memory"); it != j.end()) {
    c.sequence_memory = it->value("enabled", true);
    c.sm.plasticity = parse_plasticity(*it, c.sm.plasticity);
    c.sm.weight_bits = it->value("bits", 0u);
    c.sm.max_fanin = it->value("max_fanin", std::size_t{0});
    c.sm.burst_grow = it->value("burst_grow", false);
  }
  if (auto it = j.find("apical"); it != j.end()) {
    c.apical_bits = it->value("bits", 0u);
    c.apical_plasticity = parse_plasticity(*it, c.apical_plasticity);
  }
  return r;
}

}  // namespace detail

/// Reads a topology from its JSON form; see README for the schema.
inline TopologySpec parse_topology(const nlohmann::json& j) {
  TopologySpec t;
  for (const auto& s : j.at("sensors")) t.sensors.push_back(detail::parse_sensor(s));
  for (const auto& r : j.at("regions")) t.regions.push_back(detail::parse_region(r));
  t.parallel = j.value("parallel", false);
  return t;
}

struct NetworkOutput {
  std::vector<RegionOutput> regions;  // in topology order
};

class Network {
 public:
  Network() = default;

  Network(TopologySpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) { build(); }

  const TopologySpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return regions_.size(); }
  std::uint64_t tick_count() const noexcept { return tick_; }
  Region& region(std::size_t i) { return regions_.at(i); }
  const Region& region(std::size_t i) const { return regions_.at(i); }
  Region& region(const std::string& id) { return regions_.at(index_of(id)); }
  std::size_t index_of(const std::string& id) const {
    auto it = region_index_.find(id);
    if (it == region_index_.end()) throw std::out_of_range("Network: no region '" + id + "'");
    return it->second;
  }
  const SensorSpec& sensor(std::size_t i) const { return spec_.sensors.at(i); }
  void set_parallel(bool on) noexcept { spec_.parallel = on; }

  void set_learning(bool on) {
    for (auto& r : regions_) r.set_learning(on);
  }

  /// Encodes one scalar per scalar sensor (in sensor order).
  std::vector<SparseBitVector> encode_scalars(std::span<const double> values) const {
    std::vector<SparseBitVector> out;
    std::size_t next = 0;
    for (const auto& s : spec_.sensors) {
      if (s.kind != SensorKind::scalar) throw std::invalid_argument("encode_scalars: sensor '" + s.id + "' is not scalar");
      if (next >= values.size()) throw std::invalid_argument("encode_scalars: missing value for sensor '" + s.id + "'");
      out.push_back(encode(s.encoder, values[next++]));
    }
    return out;
  }

  /// Advances one tick. `sensors` holds one encoded vector per sensor.
  NetworkOutput tick(std::span<const SparseBitVector> sensors) {
    if (sensors.size() != spec_.sensors.size()) throw std::invalid_argument("Network::tick: one vector per sensor required");
    for (std::size_t i = 0; i < sensors.size(); ++i)
      if (sensors[i].length() != spec_.sensors[i].width)
        throw std::invalid_argument("Network::tick: sensor '" + spec_.sensors[i].id + "' width mismatch");

    NetworkOutput out;
    out.regions.resize(regions_.size());
    auto run = [&](std::size_t r) {
      std::vector<SparseBitVector> parts;
      for (const auto& src : wiring_[r].inputs) parts.push_back(src.sensor ? sensors[src.index] : v_buf_[src.index]);
      std::optional<SparseBitVector> fb;
      if (!wiring_[r].feedback.empty()) {
        std::vector<SparseBitVector> f;
        for (auto src : wiring_[r].feedback) f.push_back(y_buf_[src]);
        fb = concat(f);
      }
      out.regions[r] = regions_[r].step(parts, fb ? &*fb : nullptr);
    };
    if (spec_.parallel && regions_.size() > 1) {
      std::vector<std::future<void>> jobs;
      for (std::size_t r = 0; r < regions_.size(); ++r) jobs.push_back(std::async(std::launch::async, run, r));
      for (auto& j : jobs) j.get();
    } else {
      for (std::size_t r = 0; r < regions_.size(); ++r) run(r);
    }
    for (std::size_t r = 0; r < regions_.size(); ++r) {
      v_buf_[r] = out.regions[r].v;
      y_buf_[r] = out.regions[r].y;
    }
    ++tick_;
    return out;
  }

  /// Clears sequence-memory history and delay buffers (synapses are kept).
  void reset_history() {
    for (std::size_t r = 0; r < regions_.size(); ++r) {
      if (regions_[r].config().sequence_memory) regions_[r].sequence_memory().clear_history();
      v_buf_[r] = SparseBitVector(regions_[r].cells());
      y_buf_[r] = SparseBitVector(regions_[r].columns());
    }
  }

  void write(std::ostream& out) const {
    io::put_tag(out, "CALNET");
    io::put<std::uint16_t>(out, 1);
    io::put<std::uint64_t>(out, seed_);
    io::put<std::uint64_t>(out, tick_);
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(regions_.size()));
    for (std::size_t r = 0; r < regions_.size(); ++r) {
      io::put_string(out, spec_.regions[r].id);
      regions_[r].write(out);
      io::put_bits(out, v_buf_[r]);
      io::put_bits(out, y_buf_[r]);
    }
  }

  /// Restores a snapshot into a network built from the same topology.
  void read(std::istream& in) {
    io::expect_tag(in, "CALNET");
    if (io::get<std::uint16_t>(in) != 1) throw SnapshotError("network snapshot: unsupported version");
    const auto seed = io::get<std::uint64_t>(in);
    const auto tick = io::get<std::uint64_t>(in);
    if (io::get<std::uint32_t>(in) != regions_.size()) throw SnapshotError("network snapshot: region count mismatch");
    for (std::size_t r = 0; r < regions_.size(); ++r) {
      if (io::get_string(in) != spec_.regions[r].id) throw SnapshotError("network snapshot: region id mismatch");
      regions_[r].read(in);
      auto v = io::get_bits(in);
      auto y = io::get_bits(in);
      if (v.length() != regions_[r].cells() || y.length() != regions_[r].columns())
        throw SnapshotError("network snapshot: delay buffer width mismatch");
      v_buf_[r] = std::move(v);
      y_buf_[r] = std::move(y);
    }
    seed_ = seed;
    tick_ = tick;
  }

  bool operator==(const Network& o) const {
    return seed_ == o.seed_ && tick_ == o.tick_ && regions_ == o.regions_ && v_buf_ == o.v_buf_ && y_buf_ == o.y_buf_;
  }

 private:
  struct Source {
    bool sensor = false;
    std::size_t index = 0;
  };
  struct Wiring {
    std::vector<Source> inputs;
    std::vector<std::size_t> feedback;
  };

  void build() {
    std::map<std::string, std::size_t> sensor_index;
    for (std::size_t i = 0; i < spec_.sensors.size(); ++i)
      if (!sensor_index.emplace(spec_.sensors[i].id, i).second)
        throw TopologyError("duplicate sensor id '" + spec_.sensors[i].id + "'");
    for (std::size_t r = 0; r < spec_.regions.size(); ++r) {
      const auto& id = spec_.regions[r].id;
      if (sensor_index.count(id) || !region_index_.emplace(id, r).second)
        throw TopologyError("duplicate id '" + id + "'");
    }

    wiring_.resize(spec_.regions.size());
    // Widths of upper regions depend on their sources, so resolve level by level.
    std::vector<RegionSpec*> order;
    for (auto& r : spec_.regions) order.push_back(&r);
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->level < b->level; });
    std::vector<std::size_t> cells(spec_.regions.size(), 0), columns(spec_.regions.size(), 0);
    for (auto* rs : order) {
      const std::size_t r = region_index_.at(rs->id);
      if (rs->level < 1) throw TopologyError("region '" + rs->id + "': level must be >= 1");
      if (rs->inputs.empty()) throw TopologyError("region '" + rs->id + "': no inputs");
      auto& cfg = rs->config;
      cfg.channel_widths.clear();
      std::vector<std::size_t> ks;
      for (const auto& src : rs->inputs) {
        if (auto s = sensor_index.find(src); s != sensor_index.end()) {
          if (rs->level != 1) throw TopologyError("region '" + rs->id + "': only level-1 regions read sensors");
          wiring_[r].inputs.push_back({true, s->second});
          cfg.channel_widths.push_back(spec_.sensors[s->second].width);
          ks.push_back(spec_.sensors[s->second].k());
        } else if (auto q = region_index_.find(src); q != region_index_.end()) {
          const auto& up = spec_.regions[q->second];
          if (up.level != rs->level - 1)
            throw TopologyError("feed-forward edge " + src + " -> " + rs->id + " must ascend exactly one level");
          wiring_[r].inputs.push_back({false, q->second});
          cfg.channel_widths.push_back(cells[q->second]);
          ks.push_back(0);
        } else {
          throw TopologyError("region '" + rs->id + "': unknown input '" + src + "'");
        }
      }
      // Reconstruction is only meaningful on encoded scalar channels.
      bool scalar = true;
      for (auto k : ks) scalar = scalar && k > 0;
      if (scalar) cfg.channel_k = ks;
      else cfg.channel_k.clear();
      cells[r] = cfg.geometry.cells();
      columns[r] = cfg.geometry.columns;
    }
    for (std::size_t r = 0; r < spec_.regions.size(); ++r) {
      auto& rs = spec_.regions[r];
      std::size_t width = 0;
      for (const auto& src : rs.feedback) {
        auto q = region_index_.find(src);
        if (q == region_index_.end()) throw TopologyError("region '" + rs.id + "': unknown feedback source '" + src + "'");
        if (spec_.regions[q->second].level <= rs.level)
          throw TopologyError("feedback edge " + src + " -> " + rs.id + " must descend");
        wiring_[r].feedback.push_back(q->second);
        width += columns[q->second];
      }
      rs.config.feedback_width = width;
    }

    regions_.clear();
    for (std::size_t r = 0; r < spec_.regions.size(); ++r)
      regions_.emplace_back(spec_.regions[r].config, derive_seed(seed_, r + 1));
    v_buf_.resize(regions_.size());
    y_buf_.resize(regions_.size());
    reset_history();
    tick_ = 0;
  }

  TopologySpec spec_;
  std::uint64_t seed_ = 0;
  std::uint64_t tick_ = 0;
  std::map<std::string, std::size_t> region_index_;
  std::vector<Wiring> wiring_;
  std::vector<Region> regions_;
  std::vector<SparseBitVector> v_buf_;
  std::vector<SparseBitVector> y_buf_;
};

}  // namespace cal
