#pragma once

// End-to-end scenarios: build a certificate from catalog entries and
// combinators, simulate the quantity it controls, and compare.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tailcert/mc_verify.hpp"

namespace tailcert {

struct ScenarioConfig {
  std::string scenario;
  std::vector<double> n_grid;
  std::vector<double> t_grid;
  std::vector<int> dims;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  double delta = 0.01;
  std::string out = "out";
  json params = json::object();
};

const std::vector<std::string>& scenario_names();

/// Throws ScenarioUnknown.
ScenarioConfig default_config(const std::string& scenario);

/// Fields missing from `j` take the scenario defaults; `params` are merged.
ScenarioConfig config_from_json(const json& j);
json to_json(const ScenarioConfig& c);

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
  std::string series;
};

struct LabeledTail {
  std::string label;
  EmpiricalTail tail;
  std::optional<Verdict> verdict;
};

struct ExperimentReport {
  ScenarioConfig config;
  json certificates = json::array();
  std::vector<LabeledTail> tails;
  json diagnostics = json::object();
  json stats = json::object();
  json nets = json::array();
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, bool>> checks;
  std::vector<PlotPoint> plot;
  bool pass = false;
  double wall_seconds = 0.0;
  int workers = 0;
};

/// Throws ScenarioUnknown, DimensionTooLarge or OracleBudgetExceeded.
ExperimentReport run_scenario(const ScenarioConfig& config);

}  // namespace tailcert
