#include <doctest.h>

#include <cmath>

#include "tailcert/algebra.hpp"
#include "tailcert/catalog.hpp"
#include "tailcert/error.hpp"
#include "tailcert/mc_verify.hpp"
#include "tailcert/special.hpp"

using namespace tailcert;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

// |X| ~ Exp(1) with the tight certificate P(|X| >= t) = e^{-t}.
TailCertificate exp_cert(double c1) {
  TailCertificate c;
  c.rate = RateSequence::constant(1.0);
  c.c1 = c1;
  c.c2 = 1.0;
  c.f = RateFunction::linear(1.0);
  return c;
}

EmpiricalTail gaussian_mean_exact(std::uint64_t trials) {
  // Mean of n standard normals over sqrt(log n / n).
  return exact_tail([](double n, double t) { return normal_two_sided_sf(t * std::sqrt(std::log(n))); },
                    {10.0, 100.0, 1000.0, 1e4}, geometric_grid(1.0, 4.0, 16), trials, 0.01);
}

}  // namespace

TEST_CASE("a variable that is identically zero never exceeds") {
  TailRequest req{{10.0, 100.0}, {0.5, 1.0, 2.0}, 5000, 0.01, 3};
  const auto tail = estimate_tail([](Rng&, double) { return 0.0; }, [](double) { return 1.0; }, req, "zero");
  REQUIRE(tail.probes.size() == 6);
  for (const auto& p : tail.probes) {
    CHECK(p.exceedances == 0);
    CHECK(p.ucb == doctest::Approx(1.0 - std::pow(0.01, 1.0 / 5000)));
  }
}

TEST_CASE("exceedance counts are non-increasing in t and reproducible") {
  TailRequest req{{5.0, 50.0}, geometric_grid(0.1, 3.0, 20), 20000, 0.01, 9};
  auto sampler = [](Rng& rng, double) { return std::abs(rng.normal()); };
  const auto a = estimate_tail(sampler, [](double) { return 1.0; }, req, "abs-normal");
  const auto b = estimate_tail(sampler, [](double) { return 1.0; }, req, "abs-normal");
  for (std::size_t i = 0; i < a.probes.size(); ++i) {
    CHECK(a.probes[i].exceedances == b.probes[i].exceedances);
    if (i % 20) CHECK(a.probes[i].exceedances <= a.probes[i - 1].exceedances);
    const double p = normal_two_sided_sf(a.probes[i].t);
    CHECK(a.probes[i].ucb >= p * 0.9);
  }
}

TEST_CASE("raw ratios and counts agree") {
  const std::vector<double> ratios{0.5, 1.0, 1.5, 2.0, INFINITY};
  const auto probes = probes_from_ratios(ratios, 7.0, 1.0, {1.0, 1.75, 10.0}, 0.05);
  CHECK(probes[0].exceedances == 4);
  CHECK(probes[1].exceedances == 2);
  CHECK(probes[2].exceedances == 1);
}

TEST_CASE("tight certificate passes and halving C1 fails at the tight probe") {
  const auto tail = exact_tail([](double, double t) { return std::exp(-t); }, {1.0}, geometric_grid(1.0, 10.0, 30),
                               0, 0.01);
  const auto v = check_certificate(exp_cert(1.0 + 1e-9), tail);
  CHECK(v.pass);
  CHECK(v.checked == 30);
  const auto half = check_certificate(exp_cert(0.5), tail);
  CHECK_FALSE(half.pass);
  REQUIRE(half.witness);
  CHECK(half.worst_slack == doctest::Approx(std::log(0.5)).epsilon(1e-6));
}

TEST_CASE("larger C1 never turns a pass into a failure") {
  const auto tail = gaussian_mean_exact(100000);
  auto cert = gaussian_mean_cert(RateSequence::log_n());
  bool passed = false;
  for (double c1 : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    cert.c1 = c1;
    const bool now = check_certificate(cert, tail).pass;
    CHECK((!passed || now));
    passed = passed || now;
  }
  CHECK(passed);
}

TEST_CASE("probes outside the domain are skipped, zero counts below the floor are unresolved") {
  auto cert = exp_cert(1.0);
  cert.c2 = 2.0;
  const auto tail = exact_tail([](double, double t) { return std::exp(-t); }, {1.0}, {1.0, 3.0, 20.0}, 1000, 0.01);
  const auto v = check_certificate(cert, tail);
  CHECK(v.skipped == 1);
  CHECK(v.unresolved == 1);  // e^-20 rounds to k = 0 at m = 1000
  CHECK(v.checked == 1);
  CHECK(std::isnan(v.checks[0].bound));
  CHECK(v.checks[2].status == ProbeStatus::Unresolved);
  cert.c2 = 100.0;
  CHECK(code_of([&] { check_certificate(cert, tail); }) == ErrorCode::NoInDomainProbes);
}

TEST_CASE("fitting the Gaussian-mean exponent") {
  const auto tail = gaussian_mean_exact(0);
  const auto shape = sample_mean_cert(2, RateSequence::log_n(), "c");
  const auto a = fit_constants(shape, tail);
  const auto b = fit_constants(shape, tail);
  CHECK(a.verdict.pass);
  CHECK(a.verdict.fitted.at("c") == b.verdict.fitted.at("c"));
  // Largest passing c: the exact tail decays at least like e^{-x^2/2}.
  CHECK(a.verdict.fitted.at("c") >= 0.49);
  CHECK(a.cert.f.is_concrete());
  // One grid step beyond the fit fails.
  auto over = bind_constants(shape, {{"c", a.verdict.fitted.at("c") * std::pow(10.0, 1.0 / 64) * 1.0001}});
  CHECK_FALSE(check_certificate(over, tail).pass);
  const auto never = exact_tail([](double, double) { return 1.0; }, {10.0}, {100.0}, 0, 0.01);
  CHECK(code_of([&] { fit_constants(shape, never); }) == ErrorCode::Unsatisfiable);
}

TEST_CASE("certified threshold inverts the bound") {
  const auto cert = exp_cert(1.0);
  CHECK(certified_threshold(cert, 1.0, std::exp(-5.0)) == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(certified_threshold(cert, 1.0, 0.9) == doctest::Approx(1.0));
}

TEST_CASE("rate diagnostic slopes") {
  const auto g = rate_diagnostic(gaussian_mean_exact(1000000), gaussian_mean_cert(RateSequence::log_n()));
  CHECK(g.slope >= 1.0);
  CHECK(g.r2 > 0.99);
  const auto flat = exact_tail([](double, double) { return 0.1; }, {10.0, 100.0, 1000.0}, geometric_grid(1.0, 4.0, 8),
                               100000, 0.01);
  CHECK(std::abs(rate_diagnostic(flat, gaussian_mean_cert(RateSequence::log_n())).slope) < 1e-9);
  const auto one_n = exact_tail([](double, double t) { return std::exp(-t); }, {10.0}, geometric_grid(1.0, 3.0, 8),
                                100000, 0.01);
  CHECK(code_of([&] { rate_diagnostic(one_n, exp_cert(1.0)); }) == ErrorCode::InsufficientExceedances);
}

TEST_CASE("little-o diagnostic") {
  const auto rate = RateSequence::log_n();
  const auto tail =
      exact_tail([](double n, double) { return std::pow(n, -2.0); }, {10.0, 100.0, 1000.0}, {1.0}, 0, 0.01);
  const auto r = little_o_diagnostic(tail, 1.0, rate, -1.0);
  REQUIRE(r.values.size() == 3);
  CHECK(r.values[2] == doctest::Approx(-2.0));
  CHECK(r.below_threshold);
  const auto slow =
      exact_tail([](double n, double) { return std::pow(n, -0.5); }, {10.0, 100.0, 1000.0}, {1.0}, 0, 0.01);
  CHECK_FALSE(little_o_diagnostic(slow, 1.0, rate, -1.0).below_threshold);
}

TEST_CASE("bad grids") {
  auto s = [](Rng&, double) { return 0.0; };
  auto y = [](double) { return 1.0; };
  CHECK(code_of([&] { estimate_tail(s, y, {{10.0}, {2.0, 1.0}, 10, 0.01, 1}, "x"); }) == ErrorCode::BadGrid);
  CHECK(code_of([&] { estimate_tail(s, y, {{0.5}, {1.0}, 10, 0.01, 1}, "x"); }) == ErrorCode::BadGrid);
  CHECK(code_of([&] { estimate_tail(s, y, {{}, {1.0}, 10, 0.01, 1}, "x"); }) == ErrorCode::BadGrid);
}

TEST_CASE("csv has one row per probe") {
  const auto tail = gaussian_mean_exact(1000);
  const auto v = check_certificate(gaussian_mean_cert(RateSequence::log_n()), tail);
  const auto csv = tail_to_csv(tail, &v);
  CHECK(csv.rfind("n,t,m,k,ucb,bound,slack", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == tail.probes.size() + 1);
}
