#include <doctest.h>

#include <cmath>

#include "tailcert/error.hpp"
#include "tailcert/sequences.hpp"

using namespace tailcert;

TEST_CASE("rate function forms evaluate to their closed forms") {
  CHECK(RateFunction::log()(M_E) == doctest::Approx(1.0));
  CHECK(RateFunction::linear(3.0)(2.0) == doctest::Approx(6.0));
  CHECK(RateFunction::power(0.5, 2.0)(3.0) == doctest::Approx(4.5));
  const auto capped = RateFunction::linear_capped(Param::number(2.0));
  CHECK(capped(0.5) == doctest::Approx(0.5));
  CHECK(capped(3.0) == doctest::Approx(6.0));
  CHECK(RateFunction::shifted(RateFunction::log(), 2.0)(std::exp(5.0)) == doctest::Approx(3.0));
  CHECK(RateFunction::rescaled(RateFunction::linear(1.0), 4.0)(2.0) == doctest::Approx(0.5));
  CHECK(RateFunction::sqrt_arg(RateFunction::log())(16.0) == doctest::Approx(std::log(4.0)));
  const auto m = RateFunction::min(RateFunction::linear(1.0), RateFunction::power(1.0, 2.0));
  CHECK(m(0.5) == doctest::Approx(0.25));
  CHECK(m(3.0) == doctest::Approx(3.0));
}

TEST_CASE("catalog rate functions are monotone on a 1000-point grid") {
  const RateFunction fs[] = {RateFunction::log(), RateFunction::linear(0.3), RateFunction::power(2.0, 0.5),
                             RateFunction::linear_capped(Param::number(1.0)),
                             RateFunction::shifted(RateFunction::power(1.0, 2.0), 3.0),
                             RateFunction::rescaled(RateFunction::log(), 7.0)};
  for (const auto& f : fs) {
    CHECK(is_non_decreasing(f, 1.0, 1e6, 1000));
    CHECK(divergence_threshold(f, 100.0, 1.0).has_value());
  }
}

TEST_CASE("symbolic constants are reported and bound") {
  const auto f = RateFunction::power(Param::unknown("c"), 2.0);
  CHECK_FALSE(f.is_concrete());
  std::set<std::string> names;
  f.collect_symbols(names);
  CHECK(names == std::set<std::string>{"c"});
  const auto g = f.bind({{"c", 0.25}});
  CHECK(g.is_concrete());
  CHECK(g(4.0) == doctest::Approx(4.0));
  CHECK_THROWS(f(1.0));
}

TEST_CASE("rate sequences") {
  CHECK(RateSequence::log_n()(std::exp(2.0)) == doctest::Approx(2.0));
  CHECK(RateSequence::linear_n(0.5)(10.0) == doctest::Approx(5.0));
  const auto dl = RateSequence::dim_log(SizeSequence::constant(4.0));
  CHECK(dl(512.0) == doctest::Approx(4.0 * std::log(128.0)));
  const auto mn = RateSequence::min(RateSequence::constant(3.0), RateSequence::log_n());
  CHECK(mn(10.0) == doctest::Approx(std::log(10.0)));
  CHECK(mn(1e6) == doctest::Approx(3.0));
  const auto tab = RateSequence::custom({{1.0, 2.0}, {10.0, 5.0}});
  CHECK(tab(10.0) == 5.0);
  try {
    tab(3.0);
    FAIL("expected OutOfDomain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfDomain);
  }
  CHECK(std::isinf(RateSequence::unbounded()(5.0)));
}

TEST_CASE("size sequences") {
  CHECK(SizeSequence::monomial(2.0, 0.5, 1.0)(std::exp(4.0)) == doctest::Approx(2.0 * std::exp(2.0) * 4.0));
  CHECK(SizeSequence::sqrt_rate_over_n(RateSequence::log_n())(100.0) ==
        doctest::Approx(std::sqrt(std::log(100.0) / 100.0)));
  // n^(1/(c log n)) = e^(1/c)
  CHECK(SizeSequence::nth_root(RateSequence::log_n(2.0))(1e4) == doctest::Approx(std::exp(0.5)));
  const auto a = SizeSequence::constant(2.0), b = SizeSequence::constant(3.0);
  CHECK(SizeSequence::sum({a, b})(7.0) == doctest::Approx(5.0));
  CHECK(SizeSequence::product({a, b})(7.0) == doctest::Approx(6.0));
  CHECK(SizeSequence::max({a, b})(7.0) == doctest::Approx(3.0));
  CHECK(SizeSequence::power(b, 2.0)(7.0) == doctest::Approx(9.0));
}

TEST_CASE("json round trip preserves evaluation") {
  const auto f = RateFunction::rescaled(
      RateFunction::min(RateFunction::shifted(RateFunction::log(), 1.0), RateFunction::power(Param::unknown("c"), 2.0)),
      2.0);
  const auto back = RateFunction::from_json(f.to_json());
  CHECK(back == f);
  const auto r = RateSequence::min(RateSequence::dim_log(SizeSequence::constant(3.0)), RateSequence::linear_n());
  CHECK(RateSequence::from_json(r.to_json())(1000.0) == doctest::Approx(r(1000.0)));
  const auto s = SizeSequence::sum({SizeSequence::nth_root(RateSequence::log_n()), SizeSequence::monomial(1, -0.5, 0)});
  CHECK(SizeSequence::from_json(s.to_json())(50.0) == doctest::Approx(s(50.0)));
}

TEST_CASE("first_reaching returns a point where the level is met") {
  const auto f = RateFunction::log();
  const auto t = first_reaching(f, 3.0, 1.0, 1e6);
  REQUIRE(t);
  CHECK(f(*t) >= 3.0);
  CHECK(*t == doctest::Approx(std::exp(3.0)).epsilon(1e-9));
  CHECK_FALSE(first_reaching(f, 100.0, 1.0, 10.0));
}

TEST_CASE("geometric grid endpoints") {
  const auto g = geometric_grid(0.5, 8.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == doctest::Approx(0.5));
  CHECK(g[2] == doctest::Approx(2.0));
  CHECK(g.back() == doctest::Approx(8.0));
}
