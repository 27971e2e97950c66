#pragma once

// Pairs (a, b) of random sparse codes are presented together, concatenated,
// to a learning correlator. Afterwards a alone should reconstruct b, and b
// alone should reconstruct a.

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include "cal/correlator.hpp"
#include "cal/experiments/metrics.hpp"
#include "cal/experiments/report.hpp"
#include "cal/rng.hpp"

namespace cal::exp {

inline SparseBitVector random_code(std::size_t width, std::size_t k, Rng& rng) {
  std::vector<Index> all(width);
  for (std::size_t i = 0; i < width; ++i) all[i] = static_cast<Index>(i);
  rng.shuffle(all);
  all.resize(k);
  return SparseBitVector::from_unsorted(width, std::move(all));
}

inline Report run_association(const RunOptions& opt) {
  const auto& cfg = opt.config;
  Report rep;
  rep.experiment = "association";
  const std::size_t width = option(cfg, "width", std::size_t{256});
  const std::size_t k_in = option(cfg, "k_in", std::size_t{8});
  const std::size_t pairs = option(cfg, "pairs", std::size_t{20});
  const std::size_t reps = option(cfg, "reps", std::size_t{10});
  const std::size_t columns = option(cfg, "columns", std::size_t{1024});

  PlasticityParams p;
  p.delta_aa = option(cfg, "delta_aa", p.delta_aa);
  p.delta_ai = option(cfg, "delta_ai", p.delta_ai);
  p.delta_ia = option(cfg, "delta_ia", p.delta_ia);
  p.balance = option(cfg, "balance", false);
  Correlator cor(SynapseArray(2 * width, columns, option(cfg, "bits", 8u)), option(cfg, "k", default_k(columns)),
                 CorrelatorMode::learning, p);
  const auto policy = option<std::string>(cfg, "recruit", "novelty");
  if (policy != "novelty" && policy != "deficit") throw std::invalid_argument("association: unknown recruit policy");
  cor.set_recruitment(policy == "novelty" ? Recruitment::novelty : Recruitment::deficit);
  cor.set_recruit_permanence(to_fixed(option(cfg, "recruit_permanence", 0.5)));

  Rng rng(derive_seed(opt.seed, 400));
  std::vector<SparseBitVector> as, bs;
  for (std::size_t i = 0; i < pairs; ++i) as.push_back(random_code(width, k_in, rng)), bs.push_back(random_code(width, k_in, rng));
  const SparseBitVector none(width);

  // Pairs are shown in a fresh random order on every repetition.
  std::vector<std::size_t> order(pairs);
  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t i = 0; i < pairs; ++i) order[i] = i;
    rng.shuffle(order);
    for (auto i : order) cor.forward(concat({as[i], bs[i]}));
  }

  const std::size_t widths[2] = {width, width};
  const std::size_t ks[2] = {k_in, k_in};
  auto recall = [&](const SparseBitVector& a, const SparseBitVector& b, bool from_a) {
    const auto y = cor.activate(from_a ? concat({a, none}) : concat({none, b}));
    if (y.empty()) return 0.0;
    const auto parts = split(cor.reconstruct(y, widths, ks), widths);
    return jaccard(from_a ? parts[1] : parts[0], from_a ? b : a);
  };

  metrics::CsvWriter csv;
  if (auto f = opt.file("metrics.csv")) csv.open(*f, {"pair", "a_to_b", "b_to_a", "control"});
  double ab = 0.0, ba = 0.0, control = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    // Control: a fresh cue against a fresh partner it was never shown with.
    const auto cue = random_code(width, k_in, rng), partner = random_code(width, k_in, rng);
    const double x = recall(as[i], bs[i], true), y = recall(as[i], bs[i], false), z = recall(cue, partner, true);
    ab += x, ba += y, control += z;
    csv.row({std::to_string(i), metrics::fmt(x), metrics::fmt(y), metrics::fmt(z)});
  }
  const double n = static_cast<double>(std::max<std::size_t>(pairs, 1));
  ab /= n, ba /= n, control /= n;
  rep.values["a_to_b_jaccard"] = ab;
  rep.values["b_to_a_jaccard"] = ba;
  rep.values["control_jaccard"] = control;
  const double need = option(cfg, "min_recall", 0.8);
  rep.check("a recalls b", ab >= need, "mean Jaccard " + metrics::fmt(ab));
  rep.check("b recalls a", ba >= need, "mean Jaccard " + metrics::fmt(ba));
  rep.check("unpaired control near chance", control <= option(cfg, "max_control", 0.2),
            "mean Jaccard " + metrics::fmt(control));
  if (auto f = opt.file("snapshot.bin")) {
    std::ofstream out(*f, std::ios::binary | std::ios::trunc);
    cor.write(out);
  }
  return rep;
}

}  // namespace cal::exp
