#pragma once

// Next-step prediction of the logistic map s(t+1) = β s(t)(1 - s(t)) by a
// single region with a hardwired correlator and sequence memory.

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "cal/experiments/generators.hpp"
#include "cal/experiments/metrics.hpp"
#include "cal/experiments/report.hpp"
#include "cal/network.hpp"

namespace cal::exp {

inline nlohmann::json default_popeq_topology() {
  return nlohmann::json::parse(R"({
    "sensors": [{"id": "s", "kind": "real", "min": 0, "max": 1, "resolution": 0.005, "k": 3}],
    "regions": [{
      "id": "R1", "level": 1, "inputs": ["s"],
      "columns": 1024, "cells": 4, "segments": 4, "k": 32,
      "correlator": {"mode": "hardwired", "fanin": 2},
      "sequence_memory": {"delta_aa": 0.2, "delta_ai": 0.1, "delta_ia": 0.04, "balance": false}
    }]
  })");
}

namespace detail {

inline void save_network(const Network& net, const RunOptions& opt) {
  if (auto f = opt.file("snapshot.bin")) {
    std::ofstream out(*f, std::ios::binary | std::ios::trunc);
    net.write(out);
  }
}

}  // namespace detail

struct PopeqTrace {
  std::vector<std::optional<double>> error;  // error of the prediction made for tick t
  std::vector<std::optional<double>> rms50;
  std::vector<std::size_t> connected;
};

/// Drives a single-region network over the logistic map. Resumable: `net`
/// and `s` carry the state, rows are appended to `csv` from tick `t0`.
inline void popeq_steps(Network& net, double& s, double beta, std::size_t t0, std::size_t t1,
                        std::optional<double>& pending, metrics::RunningRms& rms, PopeqTrace& trace,
                        metrics::CsvWriter& csv) {
  const auto& enc = net.sensor(0).encoder;
  for (std::size_t t = t0; t < t1; ++t) {
    std::optional<double> err;
    if (pending) err = *pending - s;
    rms.push(err);
    const double in[1] = {s};
    const auto out = net.tick(net.encode_scalars(in));
    const auto& r = out.regions.front();
    pending = r.z.empty() ? std::nullopt : decode(enc, r.x_hat);
    const auto& sm = net.region(0).sequence_memory().synapses();
    trace.error.push_back(err);
    trace.rms50.push_back(rms.value());
    trace.connected.push_back(sm.connected());
    csv.row({std::to_string(t), metrics::fmt(s), metrics::fmt(pending), metrics::fmt(err), metrics::fmt(rms.value()),
             err ? "1" : "0", std::to_string(sm.connected()), std::to_string(sm.size())});
    s = gen::popeq(s, beta);
  }
}

inline Report run_popeq(const RunOptions& opt) {
  const auto& cfg = opt.config;
  Report rep;
  rep.experiment = "popeq";
  Network net(parse_topology(cfg.value("topology", default_popeq_topology())), opt.seed);
  if (net.size() != 1 || net.spec().sensors.size() != 1 || net.sensor(0).kind != SensorKind::scalar)
    throw TopologyError("popeq: expects one scalar sensor feeding one region");

  const std::size_t iterations = option(cfg, "iterations", std::size_t{3000});
  const double beta = option(cfg, "beta", 3.89);
  double s = option(cfg, "s0", 0.3);
  metrics::CsvWriter csv;
  if (auto f = opt.file("metrics.csv"))
    csv.open(*f, {"tick", "input", "prediction_next", "error", "rms50", "predicted", "sm_connected", "sm_synapses"});
  metrics::RunningRms rms(50);
  std::optional<double> pending;
  PopeqTrace trace;
  popeq_steps(net, s, beta, 0, iterations, pending, rms, trace, csv);

  std::optional<std::size_t> first;
  std::size_t last_miss = 0;
  bool any_miss = false;
  for (std::size_t t = 1; t < iterations; ++t) {
    if (trace.error[t] && !first) first = t;
    if (!trace.error[t]) last_miss = t, any_miss = true;
  }
  const std::size_t w0 = option(cfg, "rms_from", std::size_t{2000});
  const std::size_t w1 = std::min(iterations, option(cfg, "rms_to", std::size_t{3000}));
  double worst = 0.0, mean = 0.0;
  std::size_t n = 0;
  for (std::size_t t = w0; t < w1; ++t) {
    const double v = trace.rms50[t].value_or(INFINITY);
    worst = std::max(worst, v), mean += v, ++n;
  }
  mean = n ? mean / static_cast<double>(n) : NAN;

  // Ticks are 0-based; the first input is iteration 1.
  const std::size_t first_it = first ? *first + 1 : 0;
  const std::size_t full_from = any_miss ? last_miss + 2 : 1;
  rep.values["first_prediction_iteration"] = static_cast<double>(first_it);
  rep.values["predicting_every_iteration_from"] = static_cast<double>(full_from);
  rep.values["window_rms_max"] = worst;
  rep.values["window_rms_mean"] = mean;
  rep.values["sm_synapses"] = static_cast<double>(net.region(0).sequence_memory().synapses().size());
  rep.check("first valid prediction", first && first_it <= option(cfg, "first_by", std::size_t{50}),
            "iteration " + std::to_string(first_it));
  rep.check("predicting every input", full_from <= option(cfg, "every_from", std::size_t{150}),
            "from iteration " + std::to_string(full_from));
  rep.check("sustained window RMS", n > 0 && worst < option(cfg, "max_rms", 0.01),
            "max 50-window RMS over iterations " + std::to_string(w0) + "-" + std::to_string(w1) + " is " +
                metrics::fmt(worst) + " (mean " + metrics::fmt(mean) + ")");
  detail::save_network(net, opt);
  return rep;
}

}  // namespace cal::exp
