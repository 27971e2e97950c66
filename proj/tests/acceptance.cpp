// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance            exit status = number of failed criteria
//   acceptance --report   exit 0 once every criterion has been evaluated
//   acceptance --only N   evaluate criterion N only

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cal/experiments/experiments.hpp"
#include "oracles.hpp"

using namespace cal;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string secs(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1fs", s);
  return buf;
}

std::string summary(const exp::Report& r) {
  std::string s;
  for (const auto& c : r.checks) s += (s.empty() ? "" : "; ") + std::string(c.passed ? "" : "[failed] ") + c.name + ": " + c.detail;
  return s;
}

Outcome from_report(const exp::Report& r, double elapsed, double limit) {
  const bool in_time = elapsed < limit;
  return {r.passed() && in_time, summary(r) + "; " + secs(elapsed) + (in_time ? "" : " (over " + secs(limit) + ")")};
}

Outcome timed(const char* name, nlohmann::json cfg, double limit) {
  const auto t0 = std::chrono::steady_clock::now();
  exp::RunOptions opt;
  opt.config = std::move(cfg);
  const auto r = exp::run(name, opt);
  return from_report(r, seconds_since(t0), limit);
}

// ---- criterion 7: dense oracles -------------------------------------------

SparseBitVector random_vec(Rng& rng, std::size_t len, double p) {
  std::vector<Index> idx;
  for (std::size_t i = 0; i < len; ++i)
    if (rng.uniform() < p) idx.push_back(static_cast<Index>(i));
  return SparseBitVector(len, idx);
}

SynapseArray random_array(Rng& rng, std::size_t m, std::size_t n, double density, unsigned bits) {
  SynapseArray a(m, n, bits);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (rng.uniform() < density) a.set_fixed(i, j, static_cast<PermanenceQ>(1 + rng.below(65535)));
  return a;
}

unsigned random_bits(Rng& rng) { return std::array<unsigned, 5>{0, 1, 2, 4, 8}[rng.below(5)]; }

Outcome dense_oracles() {
  const int instances = 120;
  Rng rng(derive_seed(2024, 7));
  std::vector<std::pair<std::string, int>> mismatches;
  auto family = [&](const std::string& name, const std::function<bool()>& one) {
    int bad = 0;
    for (int t = 0; t < instances; ++t) bad += !one();
    mismatches.emplace_back(name, bad);
  };

  family("kwta", [&] {
    const std::size_t m = 1 + rng.below(16), n = 1 + rng.below(16), k = 1 + rng.below(n);
    const auto bits = random_bits(rng);
    const auto a = random_array(rng, m, n, 0.4, bits);
    const auto x = random_vec(rng, m, 0.4);
    std::vector<double> gain(m);
    for (auto& g : gain) g = 1.0 + 2.0 * rng.uniform();
    const auto w = oracle::dense_w(oracle::dense_q(a), bits);
    const Correlator c(a, k, CorrelatorMode::hardwired);
    return kwta_activate(a, x, k) == oracle::vec(oracle::top_k(oracle::excite(w, oracle::mask(x)), k)) &&
           c.activate(x, gain) == oracle::vec(oracle::top_k(oracle::excite(w, oracle::mask(x), gain), k));
  });

  family("update", [&] {
    const std::size_t m = 1 + rng.below(16), n = 1 + rng.below(16);
    const auto bits = random_bits(rng);
    auto a = random_array(rng, m, n, 0.5, bits);
    const auto x = random_vec(rng, m, 0.4), y = random_vec(rng, n, 0.4);
    const PlasticityParams p{0.01 + 0.3 * rng.uniform(), 0.3 * rng.uniform(), 0.3 * rng.uniform(), rng.below(2) == 1,
                             rng.below(2) == 1, 0};
    auto q = oracle::dense_q(a);
    oracle::update(q, oracle::mask(x), oracle::mask(y), p);
    a.update(x, y, p);
    // Permanences are compared as reals; identical fixed-point values give 0.
    const auto got = oracle::dense_q(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (std::abs(static_cast<double>(got[i][j] - q[i][j]) / 65535.0) > 1e-9) return false;
    return true;
  });

  family("reconstruction", [&] {
    const std::size_t w1 = 1 + rng.below(8), w2 = 1 + rng.below(8), n = 1 + rng.below(16);
    const auto bits = random_bits(rng);
    const auto a = random_array(rng, w1 + w2, n, 0.4, bits);
    const std::vector<std::size_t> widths{w1, w2}, ks{1 + rng.below(w1), 1 + rng.below(w2)};
    const auto y = random_vec(rng, n, 0.4);
    const Correlator c(a, 1, CorrelatorMode::hardwired);
    const auto w = oracle::dense_w(oracle::dense_q(a), bits);
    return c.reconstruct(y, widths, ks) == oracle::vec(oracle::reconstruct(w, oracle::mask(y), widths, ks));
  });

  family("sequence memory", [&] {
    const auto cols = static_cast<std::uint32_t>(2 + rng.below(6));
    const auto cells = static_cast<std::uint32_t>(1 + rng.below(3));
    const auto segs = static_cast<std::uint32_t>(1 + rng.below(2));
    SMParams p;
    p.plasticity = {0.2, 0.1 * rng.uniform(), 0.05 * rng.uniform(), rng.below(2) == 1, rng.below(2) == 1, 0};
    p.weight_bits = random_bits(rng);
    p.burst_grow = rng.below(2) == 1;
    const auto seed = rng.next();
    SequenceMemory sm({cols, cells, segs}, p, seed);
    oracle::SequenceMemory ref(cols, cells, segs, p.plasticity, p.weight_bits, seed);
    ref.burst_grow = p.burst_grow;
    const std::size_t k = 1 + rng.below(3);
    std::vector<SparseBitVector> seq;
    for (int i = 0; i < 3; ++i) seq.push_back(random_vec(rng, cols, 0.4));
    for (int step = 0; step < 15; ++step) {
      const auto& y = seq[step % 3];
      const auto got = sm.step(y, k);
      const auto want = ref.step(oracle::mask(y), k);
      if (got.v != oracle::vec(want.v) || got.a != oracle::vec(want.a) || got.z != oracle::vec(want.z)) return false;
      if (oracle::dense_q(sm.synapses()) != ref.q) return false;
    }
    return true;
  });

  family("pooling", [&] {
    const std::size_t w = 1 + rng.below(5);
    RegionConfig cfg;
    cfg.channel_widths = {1 + rng.below(8), 1 + rng.below(8)};
    cfg.geometry = {static_cast<std::uint32_t>(4 + rng.below(12)), 2, 1};
    cfg.k_out = 2;
    cfg.pool_window = w;
    const std::size_t m = cfg.channel_widths[0] + cfg.channel_widths[1];
    cfg.hardwire_fanin = (m + cfg.geometry.columns - 1) / cfg.geometry.columns;
    Region r(cfg, rng.next());
    std::vector<oracle::Mask> hist;
    for (int t = 0; t < 10; ++t) {
      const std::vector<SparseBitVector> in{random_vec(rng, cfg.channel_widths[0], 0.3),
                                            random_vec(rng, cfg.channel_widths[1], 0.3)};
      hist.push_back(oracle::mask(concat(in)));
      if (r.step(in).pooled != oracle::vec(oracle::pool(hist, w))) return false;
    }
    return true;
  });

  family("gain", [&] {
    const std::size_t fw = 1 + rng.below(16), m = 1 + rng.below(16);
    const auto ap = random_array(rng, fw, m, 0.4, 0);
    const auto f = random_vec(rng, fw, 0.4);
    const auto want = oracle::gain(oracle::dense_w(oracle::dense_q(ap), 0), oracle::mask(f));
    const auto got = apical_gain(f, ap);
    for (std::size_t i = 0; i < m; ++i)
      if (std::abs(got[i] - want[i]) > 1e-9) return false;
    return true;
  });

  bool ok = true;
  std::string detail = std::to_string(instances) + " instances each, dims <= 16:";
  for (const auto& [name, bad] : mismatches) {
    ok = ok && bad == 0;
    detail += " " + name + " " + std::to_string(instances - bad) + "/" + std::to_string(instances);
  }
  return {ok, detail};
}

// ---- criterion 8: determinism and resume -----------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism(const fs::path& scratch) {
  std::string detail;
  bool ok = true;

  // Two complete runs from one seed.
  for (const char* name : {"popeq", "persistence"}) {
    std::string first, snap;
    for (int rep = 0; rep < 2; ++rep) {
      exp::RunOptions opt;
      opt.seed = 17;
      opt.out = scratch / (std::string(name) + std::to_string(rep));
      fs::create_directories(*opt.out);
      exp::run(name, opt);
      const auto csv = slurp(*opt.out / "metrics.csv"), bin = slurp(*opt.out / "snapshot.bin");
      if (rep == 0) first = csv, snap = bin;
      else if (csv != first || bin != snap || csv.empty()) ok = false, detail += std::string(name) + " rerun differs; ";
    }
  }

  // Snapshot at the midpoint, restore into a fresh network, continue.
  const auto topo = parse_topology(exp::default_popeq_topology());
  const std::size_t total = 1500, cut = 731;
  auto drive = [&](bool split, const fs::path& path) {
    metrics::CsvWriter csv;
    csv.open(path, {"tick", "input", "prediction_next", "error", "rms50", "predicted", "sm_connected", "sm_synapses"});
    Network net(topo, 23);
    double s = 0.3;
    std::optional<double> pending;
    metrics::RunningRms rms(50);
    exp::PopeqTrace trace;
    exp::popeq_steps(net, s, 3.89, 0, split ? cut : total, pending, rms, trace, csv);
    if (split) {
      std::stringstream snap;
      net.write(snap);
      Network resumed(topo, 999);
      resumed.read(snap);
      exp::popeq_steps(resumed, s, 3.89, cut, total, pending, rms, trace, csv);
    }
  };
  drive(false, scratch / "straight.csv");
  drive(true, scratch / "resumed.csv");
  const auto a = slurp(scratch / "straight.csv"), b = slurp(scratch / "resumed.csv");
  const bool same = !a.empty() && a == b;
  detail += "popeq/persistence reruns byte-identical: " + std::string(ok ? "yes" : "no") +
            "; snapshot at tick " + std::to_string(cut) + " + restore + continue to " + std::to_string(total) +
            (same ? " gives a byte-identical CSV" : " gives a DIFFERENT CSV");
  return {ok && same, detail};
}

}  // namespace

int main(int argc, char** argv) {
  bool report = false;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--report")) report = true;
    else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  const fs::path scratch = fs::temp_directory_path() / "cal_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"integer round trip", [] { return timed("reconstruction", {{"mode", "integer"}}, 10.0); }},
      {"real-valued digitization floor", [] { return timed("reconstruction", {{"mode", "real"}}, 30.0); }},
      {"lissajous covariance and RMS", [] { return timed("lissajous", nlohmann::json::object(), 1e9); }},
      {"logistic-map prediction", [] { return timed("popeq", nlohmann::json::object(), 1e9); }},
      {"persistence rises with level", [] { return timed("persistence", nlohmann::json::object(), 1e9); }},
      {"rotating-shape invariance", [] { return timed("shapes", nlohmann::json::object(), 1800.0); }},
      {"dense-oracle equivalence", dense_oracles},
      {"determinism and resume", [&] { return determinism(scratch); }},
      {"meta-plasticity retention", [] { return timed("forgetting", nlohmann::json::object(), 1e9); }},
  };

  int failed = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    if (only && static_cast<int>(c + 1) != only) continue;
    Outcome o;
    try {
      o = criteria[c].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", c + 1, criteria[c].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(scratch);
  std::printf("%d criterion(s) failed\n", failed);
  return report ? 0 : failed;
}
