#include <doctest.h>

#include "tailcert/error.hpp"
#include "tailcert/scenarios.hpp"

using namespace tailcert;

namespace {

ScenarioConfig small(const std::string& name) {
  auto c = default_config(name);
  c.trials = std::min<std::uint64_t>(c.trials, name == "empirical-gradient" ? 40 : 2000);
  if (c.n_grid.size() > 2) c.n_grid.resize(2);
  if (c.dims.size() > 1) c.dims.resize(1);
  if (name == "covariance-opnorm") c.params["n_per_dim"] = 20;
  return c;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("every scenario runs on a reduced configuration") {
  for (const auto& name : scenario_names()) {
    CAPTURE(name);
    const auto rep = run_scenario(small(name));
    CHECK(rep.config.scenario == name);
    CHECK_FALSE(rep.tails.empty());
    CHECK(rep.certificates.is_array());
    CHECK_FALSE(rep.certificates.empty());
    bool all = true;
    for (const auto& [_, ok] : rep.checks) all = all && ok;
    for (const auto& t : rep.tails) all = all && (!t.verdict || t.verdict->pass);
    CHECK(rep.pass == all);
  }
}

TEST_CASE("Gaussian mean passes where 1e5 trials can resolve the bound") {
  // Further out, one or two exceedances already push the upper confidence
  // bound past the certified value.
  auto c = default_config("gaussian-mean");
  c.trials = 100000;
  c.n_grid = {100.0};
  c.t_grid = {1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5};
  const auto rep = run_scenario(c);
  CHECK(rep.pass);
}

TEST_CASE("config parsing merges defaults") {
  const auto c = config_from_json({{"scenario", "finite-max"}, {"trials", 77}, {"params", {{"x", 1}}}});
  CHECK(c.trials == 77);
  CHECK(c.n_grid == default_config("finite-max").n_grid);
  CHECK(c.params.at("x") == 1);
  const auto back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(code_of([] { config_from_json({{"trials", 3}}); }) == ErrorCode::ParseError);
  CHECK(code_of([] { config_from_json({{"scenario", "finite-max"}, {"trials", "many"}}); }) == ErrorCode::ParseError);
}

TEST_CASE("scenario errors") {
  CHECK(code_of([] { default_config("no-such-thing"); }) == ErrorCode::ScenarioUnknown);
  auto c = default_config("gaussian-mean");
  c.scenario = "nope";
  CHECK(code_of([&] { run_scenario(c); }) == ErrorCode::ScenarioUnknown);
  auto q = small("quadratic-form-sup");
  q.dims = {40};
  CHECK(code_of([&] { run_scenario(q); }) == ErrorCode::DimensionTooLarge);
  auto g = small("empirical-gradient");
  g.dims = {9};
  CHECK(code_of([&] { run_scenario(g); }) == ErrorCode::DimensionTooLarge);
  auto e = small("finite-max");
  e.t_grid.clear();
  CHECK(code_of([&] { run_scenario(e); }) == ErrorCode::BadGrid);
}
