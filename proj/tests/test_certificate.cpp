#include <doctest.h>

#include <cmath>

#include "tailcert/certificate.hpp"
#include "tailcert/document.hpp"
#include "tailcert/error.hpp"

using namespace tailcert;

namespace {

TailCertificate markov(double r) {
  TailCertificate c;
  c.rate = RateSequence::constant(r);
  c.c1 = 1.0;
  c.c2 = M_E;
  c.f = RateFunction::log();
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

TEST_CASE("eval_bound arithmetic") {
  CHECK(eval_bound(markov(5.0), 1.0, M_E) == doctest::Approx(std::exp(-5.0)));

  TailCertificate g;
  g.rate = RateSequence::log_n();
  g.c1 = 2.0;
  g.c2 = 1.0;
  g.f = RateFunction::power(0.5, 2.0);
  CHECK(eval_bound(g, std::exp(2.0), 3.0) == doctest::Approx(2.0 * std::exp(-9.0)));
}

TEST_CASE("eval_bound domain errors") {
  auto c = markov(2.0);
  c.n_threshold = 10;
  CHECK(code_of([&] { eval_bound(c, 5.0, 3.0); }) == ErrorCode::OutOfDomain);
  CHECK(code_of([&] { eval_bound(c, 20.0, 2.0); }) == ErrorCode::OutOfDomain);
  c.f = RateFunction::linear(Param::unknown("c"));
  CHECK(code_of([&] { eval_bound(c, 20.0, 3.0); }) == ErrorCode::SymbolicConstants);
}

TEST_CASE("eval_bound is non-increasing in t") {
  const auto c = markov(3.0);
  double prev = 2.0;
  for (double t : geometric_grid(M_E, 1e4, 200)) {
    const double b = eval_bound(c, 1.0, t);
    CHECK(b <= prev);
    prev = b;
  }
}

TEST_CASE("validate rejects broken invariants") {
  auto c = markov(1.0);
  CHECK_NOTHROW(validate(c));
  auto bad = c;
  bad.c2 = 1.0;  // log 1 = 0
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::InvalidCertificate);
  bad = c;
  bad.c1 = -1.0;
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::InvalidCertificate);
  bad = c;
  bad.flavor = Flavor::OHat;
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::InvalidCertificate);
  bad.ceiling = RateSequence::log_n();
  CHECK_NOTHROW(validate(bad, EvalRange::geometric(100, 1e6)));
}

TEST_CASE("hat flavor respects the ceiling") {
  auto c = markov(1.0);
  c.flavor = Flavor::OHat;
  c.ceiling = RateSequence::log_n(10.0);
  CHECK(c.in_domain(std::exp(1.0), 9.0));
  CHECK_FALSE(c.in_domain(std::exp(1.0), 11.0));
  CHECK(code_of([&] { eval_bound(c, std::exp(1.0), 11.0); }) == ErrorCode::OutOfDomain);
}

TEST_CASE("lower-tail certificate for |Z| near zero") {
  // P(|Z| <= t) <= sqrt(2/pi) t = exp(-log(1/t) + log sqrt(2/pi)) <= exp(-log(1/t)).
  LowerTailCertificate l;
  l.c1 = 1.0;
  l.c2 = 0.5;
  l.h = RateFunction::log();
  CHECK_NOTHROW(validate(l));
  for (double t : geometric_grid(1e-4, 0.5, 40)) {
    const double exact = std::erf(t / std::sqrt(2.0));
    CHECK(exact <= eval_lower_bound(l, 1.0, t));
  }
  CHECK_THROWS(eval_lower_bound(l, 1.0, 0.7));
}

TEST_CASE("witness trends") {
  SmallnessWitness w{[](double n) { return 1.0 / std::log(n + 1.0); }, Direction::ToZero, 1.0, "1/log n"};
  CHECK(trend_holds(w));
  w.direction = Direction::ToInfinity;
  CHECK_FALSE(trend_holds(w));
}

TEST_CASE("certificate documents round trip") {
  auto c = markov(4.0);
  c.size = SizeSequence::sqrt_rate_over_n(RateSequence::log_n());
  c.flavor = Flavor::OHat;
  c.ceiling = RateSequence::log_n(3.0);
  c.n_threshold = 7;
  const json doc = to_json(c);
  for (const char* k : {"size", "rate", "c1", "c2", "n_threshold", "f", "flavor", "ceiling", "constants_status",
                        "provenance"})
    CHECK(doc.contains(k));
  const auto back = certificate_from_json(doc);
  CHECK(certificate_digest(back) == certificate_digest(c));
  CHECK(eval_bound(back, 100.0, 5.0) == doctest::Approx(eval_bound(c, 100.0, 5.0)));

  c.f = RateFunction::linear(Param::unknown("k"));
  CHECK(constants_status(c)["unknown_positive"] == json::array({"k"}));
}

TEST_CASE("digest is a 16-digit hex of the canonical dump") {
  const json a = {{"b", 1}, {"a", 2}};
  const json b = {{"a", 2}, {"b", 1}};
  CHECK(digest(a) == digest(b));
  CHECK(digest(a).size() == 16);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
}
