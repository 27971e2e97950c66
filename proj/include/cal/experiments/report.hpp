#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cal::exp {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report {
  std::string experiment;
  std::vector<Check> checks;
  std::map<std::string, double> values;  // headline numbers, also written to summary.json
  std::vector<std::vector<double>> matrix;  // covariance or similarity, when the experiment has one
  std::vector<std::string> labels;          // row/column names of `matrix`, if any

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  void check(std::string name, bool ok, std::string detail) { checks.push_back({std::move(name), ok, std::move(detail)}); }
};

struct RunOptions {
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> out;  // no files are written when empty

  std::optional<std::filesystem::path> file(const std::string& name) const {
    if (!out) return std::nullopt;
    return *out / name;
  }
};

/// `config[key]` or `fallback`.
template <typename T>
T option(const nlohmann::json& config, const char* key, T fallback) {
  auto it = config.find(key);
  return it == config.end() ? fallback : it->template get<T>();
}

inline void write_summary(const Report& r, const std::filesystem::path& path) {
  nlohmann::json j;
  j["experiment"] = r.experiment;
  j["passed"] = r.passed();
  for (const auto& [k, v] : r.values) j["values"][k] = v;
  for (const auto& c : r.checks) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  std::ofstream(path) << j.dump(2) << '\n';
}

}  // namespace cal::exp
