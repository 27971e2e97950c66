#pragma once

// Two phase-shifted sine channels (ratio 2:3) into a learning correlator with
// sequence memory off. The off-diagonal quadrant of the axon covariance
// should trace the Lissajous figure in bin space.

#include <cmath>
#include <string>
#include <vector>

#include "cal/codec.hpp"
#include "cal/experiments/generators.hpp"
#include "cal/experiments/metrics.hpp"
#include "cal/experiments/reconstruction.hpp"
#include "cal/experiments/report.hpp"
#include "cal/region.hpp"

namespace cal::exp {

/// Fraction of nonzero entries of `quadrant` (bits of channel 1 x bits of
/// channel 2) that lie within `tol` bins of a visited (bin1, bin2) pair.
inline double lissajous_support_fraction(const std::vector<std::vector<double>>& quadrant, const EncoderSpec& enc,
                                         int tol = 1) {
  std::vector<std::vector<std::uint8_t>> near(enc.width, std::vector<std::uint8_t>(enc.width, 0));
  const auto k = static_cast<long>(enc.k), d = static_cast<long>(enc.d), n = static_cast<long>(enc.width);
  for (int t = 0; t < 360; ++t) {
    const auto [s1, s2] = gen::lissajous(t);
    const long b1 = bin_of(enc, s1), b2 = bin_of(enc, s2);
    for (long i = (b1 - tol) * d; i < (b1 + tol) * d + k; ++i)
      for (long j = (b2 - tol) * d; j < (b2 + tol) * d + k; ++j)
        if (i >= 0 && j >= 0 && i < n && j < n) near[i][j] = 1;
  }
  std::size_t nonzero = 0, inside = 0;
  for (std::size_t i = 0; i < quadrant.size(); ++i)
    for (std::size_t j = 0; j < quadrant[i].size(); ++j)
      if (quadrant[i][j] != 0) ++nonzero, inside += near[i][j];
  return nonzero ? static_cast<double>(inside) / static_cast<double>(nonzero) : 0.0;
}

inline Report run_lissajous(const RunOptions& opt) {
  const auto& cfg = opt.config;
  Report rep;
  rep.experiment = "lissajous";
  EncoderSpec def;
  def.s_min = -1.0, def.s_max = 1.0, def.resolution = 0.01, def.k = 5;
  const auto enc = detail::encoder_from(cfg.value("encoder", nlohmann::json::object()), def);

  RegionConfig rc;
  rc.channel_widths = {enc.width, enc.width};
  rc.channel_k = {enc.k, enc.k};
  rc.geometry = {option(cfg, "columns", 1024u), 1, 1};
  rc.k_out = option(cfg, "k", std::size_t{32});
  rc.correlator_mode = CorrelatorMode::learning;
  rc.correlator_bits = option(cfg, "bits", 8u);
  rc.correlator_plasticity.delta_aa = option(cfg, "delta_aa", 0.1);
  rc.correlator_plasticity.delta_ai = option(cfg, "delta_ai", 0.02);
  rc.correlator_plasticity.delta_ia = option(cfg, "delta_ia", 0.02);
  rc.correlator_plasticity.balance = option(cfg, "balance", true);
  rc.sequence_memory = false;
  Region region(rc, opt.seed);

  const std::size_t iterations = option(cfg, "iterations", std::size_t{20000});
  const std::size_t tail = std::min<std::size_t>(option(cfg, "rms_tail", std::size_t{1000}), iterations);
  metrics::CsvWriter csv;
  if (auto f = opt.file("metrics.csv"))
    csv.open(*f, {"tick", "s1", "s2", "decoded1", "decoded2", "rms50", "synapses"});
  metrics::RunningRms rms50(50);
  double tail_sq = 0.0, head_sq = 0.0;
  std::size_t tail_n = 0, head_n = 0, missing = 0;
  for (std::size_t t = 0; t < iterations; ++t) {
    const auto [s1, s2] = gen::lissajous(static_cast<double>(t));
    const auto out = region.step(std::vector<SparseBitVector>{encode(enc, s1), encode(enc, s2)});
    const auto parts = split(out.x_hat, rc.channel_widths);
    const auto d1 = parts[0].empty() ? std::nullopt : decode(enc, parts[0]);
    const auto d2 = parts[1].empty() ? std::nullopt : decode(enc, parts[1]);
    for (auto [d, s] : {std::pair{d1, s1}, std::pair{d2, s2}}) {
      std::optional<double> e;
      if (d) e = *d - s;
      else ++missing;
      rms50.push(e);
      if (e && t >= iterations - tail) tail_sq += *e * *e, ++tail_n;
      if (e && t < 360) head_sq += *e * *e, ++head_n;
    }
    if (t % 10 == 0 || t + 1 == iterations)
      csv.row({std::to_string(t), metrics::fmt(s1), metrics::fmt(s2), metrics::fmt(d1), metrics::fmt(d2),
               metrics::fmt(rms50.value()), std::to_string(region.correlator().array().size())});
  }

  const auto cov = region.correlator().covariance();
  rep.matrix.assign(enc.width, std::vector<double>(enc.width, 0.0));
  for (std::size_t i = 0; i < enc.width; ++i)
    for (std::size_t j = 0; j < enc.width; ++j) rep.matrix[i][j] = cov[i][enc.width + j];

  const double tail_rms = tail_n ? std::sqrt(tail_sq / static_cast<double>(tail_n)) : INFINITY;
  const double frac = lissajous_support_fraction(rep.matrix, enc);
  double nonzero = 0;
  for (const auto& row : rep.matrix)
    for (double v : row) nonzero += v != 0;
  rep.values["quadrant_nonzero"] = nonzero;
  rep.values["first_period_rms"] = head_n ? std::sqrt(head_sq / static_cast<double>(head_n)) : NAN;
  rep.values["final_rms"] = tail_rms;
  rep.values["curve_fraction"] = frac;
  rep.values["missing"] = static_cast<double>(missing);
  rep.values["synapses"] = static_cast<double>(region.correlator().array().size());
  rep.check("covariance follows the 2:3 curve", frac >= option(cfg, "min_curve_fraction", 0.95),
            metrics::fmt(frac) + " of nonzero quadrant entries within 1 bin");
  rep.check("reconstruction RMS", tail_rms <= option(cfg, "max_rms", 0.012),
            "RMS over the last " + std::to_string(tail) + " iterations " + metrics::fmt(tail_rms));

  if (auto f = opt.file("covariance.csv")) metrics::write_matrix_csv(*f, rep.matrix);
  if (auto f = opt.file("covariance.pgm")) metrics::write_matrix_pgm(*f, rep.matrix);
  detail::save_region(region, opt);
  return rep;
}

}  // namespace cal::exp
