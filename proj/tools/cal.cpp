// cal: run an experiment and write its artifacts.
//
//   cal run <experiment> --config <file> --seed <n> --out <dir>
//   cal list

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cal/experiments/experiments.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"cortical algorithm experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one experiment");
  std::string name;
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  run->add_option("experiment", name, "experiment name")->required()->check(CLI::IsMember(cal::exp::experiment_names()));
  run->add_option("--config", config_path, "JSON options file")->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "master seed");
  run->add_option("--out", out_dir, "output directory");

  auto* list = app.add_subcommand("list", "list experiments");

  CLI11_PARSE(app, argc, argv);

  if (*list) {
    for (const auto& n : cal::exp::experiment_names()) std::cout << n << '\n';
    return 0;
  }

  cal::exp::RunOptions opt;
  opt.seed = seed;
  opt.out = fs::path(out_dir);
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      opt.config = nlohmann::json::parse(in, nullptr, true, true);
      if (!opt.config.is_object()) throw std::invalid_argument("config must be a JSON object");
    }
    fs::create_directories(*opt.out);
    const auto report = cal::exp::run(name, opt);
    cal::exp::write_summary(report, *opt.out / "summary.json");
    for (const auto& c : report.checks)
      std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name << ": " << c.detail << '\n';
    for (const auto& [k, v] : report.values) std::cout << "  " << k << " = " << v << '\n';
    return report.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "cal: " << e.what() << '\n';
    return 2;
  }
}
