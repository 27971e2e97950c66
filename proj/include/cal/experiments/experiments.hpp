#pragma once

// Experiment registry: name -> runner.

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cal/experiments/association.hpp"
#include "cal/experiments/forgetting.hpp"
#include "cal/experiments/lissajous.hpp"
#include "cal/experiments/persistence.hpp"
#include "cal/experiments/popeq.hpp"
#include "cal/experiments/reconstruction.hpp"
#include "cal/experiments/shapes.hpp"

namespace cal::exp {

using Runner = std::function<Report(const RunOptions&)>;

inline const std::map<std::string, Runner>& registry() {
  static const std::map<std::string, Runner> runners{
      {"association", run_association}, {"forgetting", run_forgetting},         {"lissajous", run_lissajous},
      {"persistence", run_persistence}, {"popeq", run_popeq},                   {"reconstruction", run_reconstruction},
      {"shapes", run_shapes},
  };
  return runners;
}

inline std::vector<std::string> experiment_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : registry()) names.push_back(name);
  return names;
}

inline Report run(const std::string& name, const RunOptions& opt) {
  auto it = registry().find(name);
  if (it == registry().end()) throw std::invalid_argument("unknown experiment '" + name + "'");
  return it->second(opt);
}

}  // namespace cal::exp
