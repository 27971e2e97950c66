#pragma once

// Rotating line drawings through a 9 -> 4 -> 1 -> 1 hierarchy. Each frame is
// cut into a 3x3 grid of receptive fields, one per level-1 region; each
// level-2 region covers a 2x2 block of adjacent fields. After training, the
// top region's columns should stay nearly constant while one shape rotates.

#include <cmath>
#include <string>
#include <vector>

#include "cal/codec.hpp"
#include "cal/experiments/generators.hpp"
#include "cal/experiments/metrics.hpp"
#include "cal/experiments/popeq.hpp"
#include "cal/experiments/report.hpp"
#include "cal/network.hpp"

namespace cal::exp {

inline nlohmann::json default_shapes_topology(std::size_t field = 16) {
  using nlohmann::json;
  const json sm = {{"delta_aa", 0.2}, {"delta_ai", 0.1}, {"delta_ia", 0.04}, {"balance", false}};
  auto learning = [](std::size_t fanin) {
    return json{{"mode", "learning"}, {"bits", 8},        {"recruit", "novelty"},  {"initial_fanin", fanin},
                {"balance", false},   {"delta_aa", 0.2}, {"delta_ai", 0.0}, {"delta_ia", 0.02}};
  };
  json t;
  for (int i = 0; i < 9; ++i)
    t["sensors"].push_back({{"id", "f" + std::to_string(i)}, {"kind", "image"}, {"rows", field}, {"cols", field}});
  auto region = [&](std::string id, int level, std::vector<std::string> in, std::size_t columns, std::size_t pool,
                    std::size_t fanin) {
    return json{{"id", std::move(id)}, {"level", level}, {"inputs", std::move(in)}, {"columns", columns},
                {"cells", 4},          {"segments", 4},  {"pool_window", pool},     {"correlator", learning(fanin)},
                {"sequence_memory", sm}};
  };
  for (int i = 0; i < 9; ++i) t["regions"].push_back(region("L1_" + std::to_string(i), 1, {"f" + std::to_string(i)}, 256, 1, 32));
  for (int q = 0; q < 4; ++q) {
    const int r0 = q / 2, c0 = q % 2;
    std::vector<std::string> in;
    for (int dr = 0; dr < 2; ++dr)
      for (int dc = 0; dc < 2; ++dc) in.push_back("L1_" + std::to_string((r0 + dr) * 3 + c0 + dc));
    t["regions"].push_back(region("L2_" + std::to_string(q), 2, in, 512, 3, 128));
  }
  t["regions"].push_back(region("L3", 3, {"L2_0", "L2_1", "L2_2", "L2_3"}, 512, 6, 256));
  t["regions"].push_back(region("L4", 4, {"L3"}, 512, 36, 128));
  return t;
}

inline Report run_shapes(const RunOptions& opt) {
  const auto& cfg = opt.config;
  Report rep;
  rep.experiment = "shapes";
  const std::size_t size = option(cfg, "frame_size", std::size_t{48});
  const std::size_t grid = 3;
  Network net(parse_topology(cfg.value("topology", default_shapes_topology(size / grid))), opt.seed);
  if (net.spec().sensors.size() != grid * grid) throw TopologyError("shapes: expects nine image sensors");
  net.set_parallel(option(cfg, "parallel", true));

  std::vector<gen::Shape> shapes(gen::kAllShapes.begin(), gen::kAllShapes.end());
  if (auto it = cfg.find("shapes"); it != cfg.end()) {
    shapes.clear();
    for (const auto& s : *it) shapes.push_back(gen::parse_shape(s.get<std::string>()));
  }
  gen::ShapeSpec spec;
  spec.size = size;
  spec.step_degrees = option(cfg, "step_degrees", 10.0);
  const std::size_t frames = spec.frames_per_revolution();

  // Every frame is rendered once. Each epoch shows every shape for one
  // revolution, shapes in a fresh random order.
  std::vector<std::vector<SparseBitVector>> inputs;
  for (auto s : shapes) {
    spec.kind = s;
    for (std::size_t f = 0; f < frames; ++f) {
      std::vector<SparseBitVector> fields;
      for (const auto& img : gen::receptive_fields(gen::shape_frame(spec, spec.step_degrees * static_cast<double>(f)), grid))
        fields.push_back(ingest_frame(img));
      inputs.push_back(std::move(fields));
    }
  }

  const std::size_t epochs = option(cfg, "epochs", std::size_t{50});
  const bool shuffle = option(cfg, "shuffle", true);
  Rng order_rng(derive_seed(opt.seed, 300));
  auto order = shuffle ? gen::block_order(epochs + 1, shapes.size(), order_rng) : std::vector<std::size_t>{};
  if (!shuffle)
    for (std::size_t e = 0; e <= epochs; ++e)
      for (std::size_t i = 0; i < shapes.size(); ++i) order.push_back(i);

  const std::size_t top = net.size() - 1;
  int top_level = 1;
  for (const auto& r : net.spec().regions) top_level = std::max(top_level, r.level);
  // Frame shown at tick t reaches the top region at t + level - 1.
  const std::size_t delay = option(cfg, "delay", static_cast<std::size_t>(top_level - 1));

  metrics::CsvWriter csv;
  std::vector<std::string> header{"tick", "epoch", "shape", "frame"};
  for (const auto& r : net.spec().regions) header.push_back("persistence_" + r.id);
  header.push_back("top_active");
  if (auto f = opt.file("metrics.csv")) csv.open(*f, header);

  // Tick t shows frame (t mod frames) of shape order[t / frames].
  const std::size_t per_epoch = inputs.size();
  auto frame_at = [&](std::size_t t) { return order[t / frames] * frames + t % frames; };
  std::vector<SparseBitVector> last_epoch(per_epoch);
  const std::size_t train = epochs * per_epoch;
  for (std::size_t t = 0; t < train + delay; ++t) {
    // The last `delay` ticks only flush the final epoch through the hierarchy.
    if (t == train) net.set_learning(false);
    const std::size_t i = frame_at(t);
    const auto out = net.tick(inputs[i]);
    if (t < train) {
      std::vector<std::string> row{std::to_string(t), std::to_string(t / per_epoch),
                                   std::string(gen::shape_name(shapes[i / frames])), std::to_string(i % frames)};
      for (const auto& o : out.regions) row.push_back(metrics::fmt(o.persistence));
      row.push_back(std::to_string(out.regions[top].y.cardinality()));
      csv.row(row);
    }
    if (t >= delay && t - delay + per_epoch >= train) last_epoch[frame_at(t - delay)] = out.regions[top].y;
  }
  net.set_learning(true);

  rep.matrix.assign(per_epoch, std::vector<double>(per_epoch, 0.0));
  for (std::size_t i = 0; i < per_epoch; ++i)
    for (std::size_t j = 0; j < per_epoch; ++j) rep.matrix[i][j] = jaccard(last_epoch[i], last_epoch[j]);
  for (std::size_t i = 0; i < per_epoch; ++i)
    rep.labels.push_back(std::string(gen::shape_name(shapes[i / frames])) + "_" + std::to_string(i % frames));

  // Block means: within-shape excludes the diagonal.
  const std::size_t n = shapes.size();
  std::vector<std::vector<double>> block(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      double sum = 0.0;
      std::size_t cnt = 0;
      for (std::size_t i = a * frames; i < (a + 1) * frames; ++i)
        for (std::size_t j = b * frames; j < (b + 1) * frames; ++j)
          if (i != j) sum += rep.matrix[i][j], ++cnt;
      block[a][b] = cnt ? sum / static_cast<double>(cnt) : 0.0;
    }

  const double within_min = option(cfg, "within_min", 0.8);
  std::size_t stable = 0;
  bool separated = true;
  std::string unstable, overlapping;
  std::size_t best_a = 0, best_b = 0;
  double best = -1.0;
  for (std::size_t a = 0; a < n; ++a) {
    const auto name = std::string(gen::shape_name(shapes[a]));
    rep.values["within_" + name] = block[a][a];
    if (block[a][a] >= within_min) ++stable;
    else unstable += (unstable.empty() ? "" : " ") + name;
    double cross = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      cross = std::max(cross, block[a][b]);
      if (b > a && block[a][b] > best) best = block[a][b], best_a = a, best_b = b;
    }
    rep.values["max_cross_" + name] = cross;
    if (!(block[a][a] > cross)) separated = false, overlapping += (overlapping.empty() ? "" : " ") + name;
  }
  const std::size_t need = option(cfg, "min_stable", n > 1 ? n - 1 : n);
  rep.check("within-shape stability", stable >= need,
            std::to_string(stable) + " of " + std::to_string(n) + " shapes at mean Jaccard >= " + metrics::fmt(within_min) +
                (unstable.empty() ? "" : " (below: " + unstable + ")"));
  rep.check("shapes separated", separated,
            separated ? "every within-shape mean exceeds its cross-shape means" : "not separated: " + overlapping);
  const auto pair = std::string(gen::shape_name(shapes[best_a])) + "-" + std::string(gen::shape_name(shapes[best_b]));
  rep.values["closest_pair_jaccard"] = best;
  const auto expected = option<std::string>(cfg, "closest_pair", "triangle-star6");
  if (!expected.empty())
    rep.check("closest cross-shape pair", pair == expected,
              "largest cross-shape mean is " + pair + " at " + metrics::fmt(best));

  if (auto f = opt.file("similarity.csv")) metrics::write_matrix_csv(*f, rep.matrix);
  if (auto f = opt.file("similarity.pgm")) metrics::write_matrix_pgm(*f, rep.matrix);
  if (auto f = opt.file("shape_similarity.csv")) metrics::write_matrix_csv(*f, block);
  detail::save_network(net, opt);
  return rep;
}

}  // namespace cal::exp
