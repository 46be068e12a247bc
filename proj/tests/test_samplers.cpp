#include <doctest.h>

#include <cmath>
#include <numeric>

#include "tailcert/error.hpp"
#include "tailcert/samplers.hpp"
#include "tailcert/special.hpp"

using namespace tailcert;

TEST_CASE("sampling is reproducible and stream dependent") {
  const auto spec = DistSpec::gaussian(1.0, 2.0);
  CHECK(sample(spec, 100, 5) == sample(spec, 100, 5));
  CHECK(sample(spec, 100, 5) != sample(spec, 100, 6));
  auto other = spec;
  other.stream = 3;
  CHECK(sample(other, 100, 5) != sample(spec, 100, 5));
  CHECK(sample(DistSpec::isotropic_gaussian(3), 10, 1).size() == 30);
}

TEST_CASE("Rademacher draws are signs with mean near zero") {
  const auto xs = sample(DistSpec::rademacher(), 20000, 11);
  for (double x : xs) CHECK((x == 1.0 || x == -1.0));
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  CHECK(std::abs(mean) < 4.0 / std::sqrt(20000.0));
}

TEST_CASE("empirical moments match exact ones") {
  const DistSpec specs[] = {DistSpec::gaussian(0.0, 1.5), DistSpec::exponential(2.0), DistSpec::uniform(-1.0, 3.0),
                            DistSpec::chi_square(3.0)};
  for (const auto& s : specs) {
    const auto xs = sample(s, 200000, 3);
    double m2 = 0.0;
    for (double x : xs) m2 += x * x;
    m2 /= xs.size();
    CHECK(m2 == doctest::Approx(std::exp(log_abs_moment(s, 2.0))).epsilon(0.03));
  }
}

TEST_CASE("closed-form survival agrees with the Gaussian tail") {
  CHECK(abs_survival(DistSpec::gaussian(0.0, 2.0), 3.0) == doctest::Approx(normal_two_sided_sf(1.5)));
  CHECK(abs_survival(DistSpec::exponential(1.0), 2.0) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("psi norms") {
  CHECK(psi_norm(DistSpec::rademacher(), 2.0).value == doctest::Approx(1.0));
  CHECK(psi_norm(DistSpec::atoms({0.0}, {1.0}), 2.0).value == 0.0);
  CHECK_THROWS_AS(scale_to_unit_psi(DistSpec::atoms({0.0}, {1.0}), 2.0), Error);
  const DistSpec specs[] = {DistSpec::gaussian(), DistSpec::exponential(1.0, true), DistSpec::uniform(-2.0, 1.0)};
  for (const auto& s : specs) {
    for (double alpha : {1.0, 2.0}) {
      const auto unit = scale_to_unit_psi(s, alpha);
      CHECK(psi_norm(unit, alpha).value == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("psi norm is stable under grid refinement") {
  const auto coarse = psi_norm(DistSpec::exponential(1.0), 1.0, {1.0, 200.0, 400});
  const auto fine = psi_norm(DistSpec::exponential(1.0), 1.0, {1.0, 200.0, 1600});
  CHECK(fine.value == doctest::Approx(coarse.value).epsilon(0.01));
  CHECK(fine.value >= coarse.value * (1 - 1e-12));
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(validate(DistSpec::gaussian(0.0, -1.0)), Error);
  CHECK_THROWS_AS(validate(DistSpec::atoms({1.0, 2.0}, {0.5, 0.6})), Error);
  CHECK_THROWS_AS(validate(DistSpec::uniform(2.0, 1.0)), Error);
}

TEST_CASE("spec json round trip") {
  const auto s = DistSpec::atoms({-1.0, 2.0}, {0.25, 0.75});
  const auto back = dist_from_json(to_json(s));
  CHECK(back.family == Family::DiscreteAtoms);
  CHECK(back.values == s.values);
  CHECK(sample(back, 50, 9) == sample(s, 50, 9));
}
