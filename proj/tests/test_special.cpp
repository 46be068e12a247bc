#include <doctest.h>

#include <cmath>

#include "tailcert/rng.hpp"
#include "tailcert/special.hpp"

using namespace tailcert;

namespace {

double binom_cdf(std::uint64_t k, std::uint64_t m, double p) {
  double s = 0.0;
  for (std::uint64_t i = 0; i <= k; ++i)
    s += std::exp(std::lgamma(m + 1.0) - std::lgamma(i + 1.0) - std::lgamma(m - i + 1.0) + i * std::log(p) +
                  (m - i) * std::log1p(-p));
  return s;
}

}  // namespace

TEST_CASE("normal tails") {
  CHECK(normal_sf(0.0) == doctest::Approx(0.5));
  CHECK(normal_sf(1.959963984540054) == doctest::Approx(0.025).epsilon(1e-9));
  CHECK(normal_two_sided_sf(1.0) + normal_abs_cdf(1.0) == doctest::Approx(1.0));
  CHECK(normal_sf(-3.0) == doctest::Approx(1.0 - normal_sf(3.0)));
  CHECK(normal_sf(30.0) > 0.0);
}

TEST_CASE("chi-square and gamma survival") {
  for (double x : {0.1, 1.0, 5.0, 40.0}) {
    CHECK(chi2_sf(2.0, x) == doctest::Approx(std::exp(-x / 2)).epsilon(1e-10));
    CHECK(gamma_sf(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-10));
    CHECK(gamma_sf(2.0, x) == doctest::Approx((1 + x) * std::exp(-x)).epsilon(1e-10));
  }
  CHECK(chi2_sf(1.0, 4.0) == doctest::Approx(normal_two_sided_sf(2.0)).epsilon(1e-10));
}

TEST_CASE("Clopper-Pearson edge cases") {
  CHECK(clopper_pearson_upper(0, 1000, 0.01) == doctest::Approx(1.0 - std::pow(0.01, 1e-3)));
  CHECK(clopper_pearson_upper(50, 50, 0.01) == 1.0);
  CHECK(clopper_pearson_lower(0, 50, 0.01) == 0.0);
}

TEST_CASE("Clopper-Pearson limits solve the binomial equations") {
  for (std::uint64_t k : {1, 5, 17}) {
    const double u = clopper_pearson_upper(k, 40, 0.05);
    CHECK(binom_cdf(k, 40, u) == doctest::Approx(0.05).epsilon(1e-6));
    const double l = clopper_pearson_lower(k, 40, 0.05);
    CHECK(1.0 - binom_cdf(k - 1, 40, l) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(l < static_cast<double>(k) / 40);
    CHECK(u > static_cast<double>(k) / 40);
  }
}

TEST_CASE("upper confidence bound covers the true probability") {
  const double delta = 0.05;
  const std::uint64_t m = 1000;
  for (double p : {1e-4, 1e-2, 0.1}) {
    Rng rng(77, static_cast<std::uint64_t>(1 / p));
    int covered = 0;
    for (int rep = 0; rep < 1000; ++rep) {
      std::uint64_t k = 0;
      for (std::uint64_t i = 0; i < m; ++i) k += rng.uniform() < p;
      covered += clopper_pearson_upper(k, m, delta) >= p;
    }
    CHECK(covered / 1000.0 >= 1 - delta - 0.01);
  }
}
