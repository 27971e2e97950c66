#pragma once

// Two periodic symbol sequences that share a stretch of context, learned one
// after the other by a single region. Sequence 1 is scored before and after
// sequence 2 is trained, once with meta-plasticity on and once with it off.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cal/experiments/metrics.hpp"
#include "cal/experiments/popeq.hpp"
#include "cal/experiments/report.hpp"
#include "cal/network.hpp"

namespace cal::exp {

inline nlohmann::json default_forgetting_topology() {
  return nlohmann::json::parse(R"({
    "sensors": [{"id": "s", "kind": "integer", "min": 0, "max": 15, "k": 3}],
    "regions": [{
      "id": "R1", "level": 1, "inputs": ["s"],
      "columns": 256, "cells": 8, "segments": 4, "k": 16,
      "correlator": {"mode": "hardwired", "fanin": 2},
      "sequence_memory": {"delta_aa": 0.2, "delta_ai": 0.1, "delta_ia": 0.04, "balance": false}
    }]
  })");
}

namespace detail {

struct Recall {
  double accuracy = 0.0;  // share of steps whose decoded prediction equals the next input
  double coverage = 0.0;  // mean share of the next input's columns that were predicted
};

// Scores one period after a warm-up period. Learning is off while scoring.
inline Recall sequence_recall(Network& net, const std::vector<int>& seq) {
  net.set_learning(false);
  net.reset_history();
  const auto& g = net.region(0).config().geometry;
  const auto& enc = net.sensor(0).encoder;
  Recall out;
  std::size_t n = 0;
  SparseBitVector predicted;
  std::optional<double> guess;
  for (std::size_t t = 0; t < 2 * seq.size() + 1; ++t) {
    const double v[1] = {static_cast<double>(seq[t % seq.size()])};
    const auto step = net.tick(net.encode_scalars(v));
    const auto& r = step.regions.front();
    if (t > seq.size()) {
      out.accuracy += guess && std::lround(*guess) == seq[t % seq.size()] ? 1.0 : 0.0;
      out.coverage +=
          r.y.empty() ? 0.0 : static_cast<double>(overlap(predicted, r.y)) / static_cast<double>(r.y.cardinality());
      ++n;
    }
    predicted = columns_of(g, r.z);
    guess = r.z.empty() ? std::nullopt : decode(enc, r.x_hat);
  }
  net.set_learning(true);
  net.reset_history();
  if (n) out.accuracy /= static_cast<double>(n), out.coverage /= static_cast<double>(n);
  return out;
}

inline void train_sequence(Network& net, const std::vector<int>& seq, std::size_t reps) {
  for (std::size_t r = 0; r < reps; ++r)
    for (int s : seq) {
      const double v[1] = {static_cast<double>(s)};
      net.tick(net.encode_scalars(v));
    }
}

}  // namespace detail

inline Report run_forgetting(const RunOptions& opt) {
  const auto& cfg = opt.config;
  Report rep;
  rep.experiment = "forgetting";
  const auto topo = parse_topology(cfg.value("topology", default_forgetting_topology()));
  if (topo.regions.size() != 1 || topo.sensors.size() != 1 || topo.sensors[0].kind != SensorKind::scalar)
    throw TopologyError("forgetting: expects one scalar sensor feeding one region");
  if (!topo.regions[0].config.sequence_memory) throw TopologyError("forgetting: the region needs sequence memory");

  const auto seq1 = option(cfg, "sequence1", std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
  const auto seq2 = option(cfg, "sequence2", std::vector<int>{8, 1, 2, 3, 12, 13, 14, 15});
  const std::size_t reps1 = option(cfg, "reps1", std::size_t{40});
  const std::size_t reps2 = option(cfg, "reps2", std::size_t{40});
  const std::size_t rounds = option(cfg, "rounds", std::size_t{1});

  metrics::CsvWriter csv;
  if (auto f = opt.file("metrics.csv"))
    csv.open(*f, {"meta", "round", "phase", "accuracy1", "accuracy2", "coverage1", "coverage2"});

  std::map<bool, double> before, after;
  Network kept;
  for (bool meta : {true, false}) {
    auto spec = topo;
    spec.regions[0].config.sm.plasticity.meta = meta;
    Network net(spec, opt.seed);
    auto log = [&](std::size_t round, const char* phase) {
      const auto r1 = detail::sequence_recall(net, seq1), r2 = detail::sequence_recall(net, seq2);
      csv.row({meta ? "1" : "0", std::to_string(round), phase, metrics::fmt(r1.accuracy), metrics::fmt(r2.accuracy),
               metrics::fmt(r1.coverage), metrics::fmt(r2.coverage)});
      return r1.accuracy;
    };
    for (std::size_t round = 0; round < rounds; ++round) {
      detail::train_sequence(net, seq1, reps1);
      before[meta] = log(round, "after_sequence1");
      detail::train_sequence(net, seq2, reps2);
      after[meta] = log(round, "after_sequence2");
    }
    if (meta) kept = std::move(net);
  }

  auto ratio = [](double b, double a) { return b > 0.0 ? a / b : 0.0; };
  const double on = ratio(before[true], after[true]), off = ratio(before[false], after[false]);
  rep.values["accuracy1_before_meta_on"] = before[true];
  rep.values["accuracy1_after_meta_on"] = after[true];
  rep.values["accuracy1_before_meta_off"] = before[false];
  rep.values["accuracy1_after_meta_off"] = after[false];
  rep.values["retention_meta_on"] = on;
  rep.values["retention_meta_off"] = off;
  const double keep = option(cfg, "min_retention", 0.9);
  const double margin = option(cfg, "min_degradation", 0.05);
  rep.check("retention with meta-plasticity", before[true] > 0.0 && on >= keep,
            "sequence-1 accuracy " + metrics::fmt(before[true]) + " -> " + metrics::fmt(after[true]));
  rep.check("forgetting without meta-plasticity", off <= on - margin,
            "sequence-1 accuracy " + metrics::fmt(before[false]) + " -> " + metrics::fmt(after[false]) +
                ", retention " + metrics::fmt(off) + " vs " + metrics::fmt(on));
  detail::save_network(kept, opt);
  return rep;
}

}  // namespace cal::exp
