#pragma once

// Correlator run in reverse: encode, activate, reconstruct, decode.
//
// mode "integer": full-range sweep through a hardwired correlator.
// mode "real":    uniform random reals through a hardwired correlator.
// mode "learning": two channels of skewed random integers into a correlator
//                  that starts without synapses.

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "cal/codec.hpp"
#include "cal/experiments/metrics.hpp"
#include "cal/experiments/report.hpp"
#include "cal/region.hpp"

namespace cal::exp {

namespace detail {

inline EncoderSpec encoder_from(const nlohmann::json& j, EncoderSpec fallback_args) {
  const auto kind = option<std::string>(j, "kind", fallback_args.kind == ScalarKind::integer ? "integer" : "real");
  return make_encoder(option(j, "min", fallback_args.s_min), option(j, "max", fallback_args.s_max),
                      option(j, "resolution", fallback_args.resolution), option(j, "k", fallback_args.k),
                      kind == "integer" ? ScalarKind::integer : ScalarKind::real, option(j, "d", 0u));
}

inline void save_region(const Region& r, const RunOptions& opt) {
  if (auto f = opt.file("snapshot.bin")) {
    std::ofstream out(*f, std::ios::binary | std::ios::trunc);
    r.write(out);
  }
}

}  // namespace detail

inline Report run_reconstruction(const RunOptions& opt) {
  const auto& cfg = opt.config;
  const auto mode = option<std::string>(cfg, "mode", "integer");
  Report rep;
  rep.experiment = "reconstruction";
  Rng rng(derive_seed(opt.seed, 100));

  if (mode == "integer" || mode == "real") {
    const bool integer = mode == "integer";
    EncoderSpec def;
    def.kind = integer ? ScalarKind::integer : ScalarKind::real;
    def.s_min = integer ? 0.0 : -1.0;
    def.s_max = integer ? 255.0 : 1.0;
    def.resolution = integer ? 1.0 : 0.01;
    def.k = 5;
    const auto enc = detail::encoder_from(cfg.value("encoder", nlohmann::json::object()), def);

    RegionConfig rc;
    rc.channel_widths = {enc.width};
    rc.channel_k = {enc.k};
    rc.geometry = {option(cfg, "columns", 1024u), 1, 1};
    rc.k_out = option(cfg, "k", std::size_t{32});
    rc.hardwire_fanin = option(cfg, "fanin", static_cast<std::size_t>(integer ? 4 : 2));
    rc.sequence_memory = false;
    Region region(rc, opt.seed);

    metrics::CsvWriter csv;
    if (auto f = opt.file("metrics.csv")) csv.open(*f, {"tick", "input", "decoded", "error", "rms50"});
    metrics::RunningRms rms50(50);
    double sum_sq = 0.0, max_abs = 0.0;
    std::size_t n = 0, missing = 0;
    const std::size_t samples = integer ? enc.bins : option(cfg, "samples", std::size_t{100000});
    for (std::size_t t = 0; t < samples; ++t) {
      const double s = integer ? bin_value(enc, static_cast<std::uint32_t>(t)) : rng.uniform(enc.s_min, enc.s_max);
      const auto out = region.step(std::vector<SparseBitVector>{encode(enc, s)});
      const auto d = decode(enc, out.x_hat);
      std::optional<double> err;
      if (d) {
        err = *d - s;
        sum_sq += *err * *err, max_abs = std::max(max_abs, std::abs(*err)), ++n;
      } else {
        ++missing;
      }
      rms50.push(err);
      csv.row({std::to_string(t), metrics::fmt(s), metrics::fmt(d), metrics::fmt(err), metrics::fmt(rms50.value())});
    }
    const double rms = n ? std::sqrt(sum_sq / static_cast<double>(n)) : 0.0;
    rep.values["samples"] = static_cast<double>(samples);
    rep.values["rms"] = rms;
    rep.values["max_abs_error"] = max_abs;
    rep.values["missing"] = static_cast<double>(missing);
    if (integer) {
      rep.check("integer round trip", max_abs == 0.0 && missing == 0,
                "max |error| " + metrics::fmt(max_abs) + " over " + std::to_string(samples) + " values");
    } else {
      const double floor = enc.resolution / std::sqrt(12.0);
      rep.values["rms_floor"] = floor;
      const double rel = std::abs(rms - floor) / floor;
      rep.check("digitization floor", missing == 0 && rel <= option(cfg, "tolerance", 0.10),
                "RMS " + metrics::fmt(rms) + " vs r/sqrt(12) " + metrics::fmt(floor));
    }
    detail::save_region(region, opt);
    return rep;
  }

  if (mode != "learning") throw std::invalid_argument("reconstruction: unknown mode '" + mode + "'");
  // Two correlated integer channels: b = (a + offset) mod range. Low values
  // of a are drawn far more often than high ones.
  const auto range = option(cfg, "range", 32u);
  const auto enc = make_encoder(0, range - 1, 1.0, option(cfg, "k", 5u), ScalarKind::integer);
  RegionConfig rc;
  rc.channel_widths = {enc.width, enc.width};
  rc.channel_k = {enc.k, enc.k};
  rc.geometry = {option(cfg, "columns", 256u), 1, 1};
  rc.k_out = option(cfg, "k_out", std::size_t{16});
  rc.correlator_mode = CorrelatorMode::learning;
  rc.sequence_memory = false;
  Region region(rc, opt.seed);

  metrics::CsvWriter csv;
  if (auto f = opt.file("metrics.csv")) csv.open(*f, {"block", "accuracy", "frequent_accuracy", "rare_accuracy"});
  const std::size_t iterations = option(cfg, "iterations", std::size_t{20000});
  const std::size_t block = option(cfg, "block", std::size_t{1000});
  std::size_t hits = 0, freq_hits = 0, freq_n = 0, rare_hits = 0, rare_n = 0;
  double first = -1.0, last = 0.0;
  for (std::size_t t = 0; t < iterations; ++t) {
    const double u = rng.uniform();
    const auto a = static_cast<std::uint32_t>(std::floor(u * u * range));
    const auto b = (a + range / 3) % range;
    const auto out = region.step(std::vector<SparseBitVector>{encode_bin(enc, a), encode_bin(enc, b)});
    const auto parts = split(out.x_hat, rc.channel_widths);
    const auto da = best_bin(enc, parts[0]), db = best_bin(enc, parts[1]);
    const bool ok = da && db && *da == a && *db == b;
    hits += ok;
    (a < range / 4 ? freq_n : rare_n) += 1;
    (a < range / 4 ? freq_hits : rare_hits) += ok;
    if ((t + 1) % block == 0) {
      const double acc = static_cast<double>(hits) / static_cast<double>(block);
      if (first < 0) first = acc;
      last = acc;
      auto ratio = [](std::size_t h, std::size_t n) { return n ? static_cast<double>(h) / static_cast<double>(n) : NAN; };
      csv.row({std::to_string(t / block), metrics::fmt(acc), metrics::fmt(ratio(freq_hits, freq_n)),
               metrics::fmt(ratio(rare_hits, rare_n))});
      hits = freq_hits = freq_n = rare_hits = rare_n = 0;
    }
  }
  rep.values["first_block_accuracy"] = first;
  rep.values["last_block_accuracy"] = last;
  rep.check("learning improves reconstruction", last > first,
            "accuracy " + metrics::fmt(first) + " -> " + metrics::fmt(last));
  detail::save_region(region, opt);
  return rep;
}

}  // namespace cal::exp
