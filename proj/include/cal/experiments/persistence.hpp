#pragma once

// Three-region stack R1 -> R2 -> R3 fed the sentence corpus character by
// character. Persistence (Jaccard of consecutive column vectors) should grow
// with level.

#include <cmath>
#include <string>
#include <vector>

#include "cal/experiments/generators.hpp"
#include "cal/experiments/metrics.hpp"
#include "cal/experiments/popeq.hpp"
#include "cal/experiments/report.hpp"
#include "cal/network.hpp"

namespace cal::exp {

inline nlohmann::json default_persistence_topology() {
  std::string all;
  for (const auto& s : gen::sentences()) all += s;
  const auto enc = make_char_encoder(all);
  auto j = nlohmann::json::parse(R"({
    "regions": [
      {"id": "R1", "level": 1, "inputs": ["c"], "columns": 512, "cells": 8, "segments": 4,
       "correlator": {"mode": "hardwired", "fanin": 4},
       "sequence_memory": {"delta_aa": 0.2, "delta_ai": 0.1, "delta_ia": 0.04, "balance": false}},
      {"id": "R2", "level": 2, "inputs": ["R1"], "columns": 512, "cells": 8, "segments": 4, "pool_window": 4,
       "correlator": {"mode": "learning", "bits": 8},
       "sequence_memory": {"delta_aa": 0.2, "delta_ai": 0.1, "delta_ia": 0.04, "balance": false}},
      {"id": "R3", "level": 3, "inputs": ["R2"], "columns": 512, "cells": 8, "segments": 4, "pool_window": 12,
       "correlator": {"mode": "learning", "bits": 8},
       "sequence_memory": {"delta_aa": 0.2, "delta_ai": 0.1, "delta_ia": 0.04, "balance": false}}
    ]
  })");
  j["sensors"] = nlohmann::json::array(
      {{{"id", "c"}, {"kind", "integer"}, {"min", enc.s_min}, {"max", enc.s_max}, {"k", enc.k}}});
  return j;
}

inline Report run_persistence(const RunOptions& opt) {
  const auto& cfg = opt.config;
  Report rep;
  rep.experiment = "persistence";
  Network net(parse_topology(cfg.value("topology", default_persistence_topology())), opt.seed);
  if (net.spec().sensors.size() != 1 || net.sensor(0).kind != SensorKind::scalar)
    throw TopologyError("persistence: expects one integer character sensor");

  const std::size_t sets = option(cfg, "sets", std::size_t{5});
  const std::size_t window = option(cfg, "window", std::size_t{50});
  Rng order_rng(derive_seed(opt.seed, 200));
  const auto order = gen::block_order(sets, gen::sentences().size(), order_rng);

  std::vector<std::string> header{"tick", "sentence", "char"};
  for (const auto& r : net.spec().regions) header.push_back("persistence_" + r.id);
  for (const auto& r : net.spec().regions) header.push_back("running_" + r.id);
  for (const auto& r : net.spec().regions) header.push_back("y_" + r.id), header.push_back("v_" + r.id);
  metrics::CsvWriter csv;
  if (auto f = opt.file("metrics.csv")) csv.open(*f, header);

  const std::size_t regions = net.size();
  std::vector<metrics::RunningMean> running(regions, metrics::RunningMean(window));
  std::vector<double> final_sum(regions, 0.0);
  std::size_t final_n = 0;
  const std::size_t final_from = (sets - 1) * 3;
  for (std::size_t p = 0; p < order.size(); ++p) {
    for (unsigned char ch : gen::sentences()[order[p]]) {
      const double v[1] = {static_cast<double>(ch)};
      const auto out = net.tick(net.encode_scalars(v));
      std::vector<std::string> row{std::to_string(net.tick_count() - 1), std::to_string(order[p]),
                                   std::to_string(static_cast<int>(ch))};
      for (std::size_t r = 0; r < regions; ++r) {
        running[r].push(out.regions[r].persistence);
        row.push_back(metrics::fmt(out.regions[r].persistence));
        if (p >= final_from) final_sum[r] += out.regions[r].persistence;
      }
      if (p >= final_from) ++final_n;
      for (std::size_t r = 0; r < regions; ++r) row.push_back(metrics::fmt(running[r].value()));
      for (const auto& o : out.regions)
        row.push_back(std::to_string(o.y.cardinality())), row.push_back(std::to_string(o.v.cardinality()));
      csv.row(row);
    }
  }

  std::vector<double> mean(regions);
  for (std::size_t r = 0; r < regions; ++r) {
    mean[r] = final_n ? final_sum[r] / static_cast<double>(final_n) : 0.0;
    rep.values["final_persistence_" + net.spec().regions[r].id] = mean[r];
  }
  const double top_min = option(cfg, "top_min", 0.9);
  rep.check("top-level persistence", mean.back() >= top_min,
            net.spec().regions.back().id + " final-epoch mean " + metrics::fmt(mean.back()));
  bool ordered = true;
  std::string chain;
  for (std::size_t r = 0; r < regions; ++r) {
    if (r && !(mean[r] > mean[r - 1])) ordered = false;
    chain += (r ? " < " : "") + net.spec().regions[r].id + "=" + metrics::fmt(mean[r]);
  }
  rep.check("persistence rises with level", ordered, chain);
  detail::save_network(net, opt);
  return rep;
}

}  // namespace cal::exp
