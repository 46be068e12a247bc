#include <doctest.h>

#include <cmath>

#include "tailcert/catalog.hpp"
#include "tailcert/error.hpp"
#include "tailcert/samplers.hpp"
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

// Every in-domain (n, t) pair on a small grid; `exact(n, s)` is P(|X_n| >= s).
template <class Exact>
void check_dominates(const TailCertificate& c, const std::vector<double>& ns, Exact&& exact) {
  std::size_t checked = 0;
  for (double n : ns)
    for (double t : geometric_grid(c.c2, 50.0 * c.c2, 40)) {
      if (!c.in_domain(n, t)) continue;
      const double y = c.size(n);
      CHECK(exact(n, t * y) <= eval_bound(c, n, t) * (1 + 1e-12));
      ++checked;
    }
  CHECK(checked > 0);
}

}  // namespace

TEST_CASE("moment bound for Exp(1) at order log n") {
  // (E X^p)^(1/p) = Gamma(p+1)^(1/p) <= p.
  const MomentHypothesis h{RateSequence::log_n(), SizeSequence::monomial(1.0, 0.0, 1.0)};
  const auto c = from_moment_bound(h, EvalRange::geometric(3.0, 1e6));
  CHECK_NOTHROW(validate(c));
  CHECK(c.c1 == 1.0);
  CHECK(c.c2 == doctest::Approx(M_E));
  CHECK(code_of([&] { from_moment_bound(h); }) == ErrorCode::RateBelowOne);  // log 1 = 0
  check_dominates(c, {10.0, 100.0, 1e4}, [](double, double s) { return std::exp(-s); });
}

TEST_CASE("moment bound rejects orders below one") {
  const MomentHypothesis h{RateSequence::constant(0.5), SizeSequence::constant(1.0)};
  CHECK(code_of([&] { from_moment_bound(h); }) == ErrorCode::RateBelowOne);
}

TEST_CASE("l_p and l_inf sizes carry e^(1/c)") {
  const double c = 2.0;
  const MomentHypothesis h{RateSequence::log_n(c), SizeSequence::constant(3.0)};
  const auto range = EvalRange::geometric(2.0, 1e6);
  const auto lp = lp_norm_cert(h, std::nullopt, range);
  // n^(1/(c log n)) = e^(1/c)
  CHECK(lp.size(1e5) == doctest::Approx(3.0 * std::exp(1.0 / c)));
  const auto li = linf_norm_cert(h, c, std::nullopt, range);
  CHECK(li.size(1e5) == doctest::Approx(3.0 * std::exp(1.0 / c)));
  CHECK(code_of([&] { linf_norm_cert(h, 2.5, std::nullopt, range); }) == ErrorCode::RateTooSmall);
}

TEST_CASE("psi_2 certificate for a unit-norm Gaussian dominates the exact tail") {
  const double sigma = 1.0 / psi_norm(DistSpec::gaussian(), 2.0).value;
  CHECK(sigma == doctest::Approx(1.0 / 0.7979).epsilon(0.01));
  const PsiNormHypothesis h{2.0, 1.0, false, std::nullopt};
  const auto c = from_psi_norm(h, RateSequence::log_n(), EvalRange::geometric(3.0, 1e6));
  check_dominates(c, {10.0, 1e3, 1e6}, [&](double, double s) { return normal_two_sided_sf(s / sigma); });
  CHECK(code_of([&] { from_psi_norm({0.5, 1.0, false, std::nullopt}, RateSequence::log_n(),
                                    EvalRange::geometric(3.0, 1e6));
        }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("sub-Gaussian l2 certificate requires rate at least the dimension") {
  CHECK(code_of([] { subgaussian_l2_cert(SizeSequence::constant(10.0), RateSequence::constant(5.0)); }) ==
        ErrorCode::RateBelowDimension);
  const auto c = subgaussian_l2_cert(SizeSequence::constant(4.0), RateSequence::linear_n(), "hkz_c", 1.0,
                                     EvalRange::geometric(4.0, 1e6));
  CHECK_FALSE(c.f.is_concrete());
}

TEST_CASE("Gaussian sample mean: 2 Phibar(2) <= 2 e^-2") {
  const auto c = gaussian_mean_cert(RateSequence::constant(1.0));
  const double bound = eval_bound(c, 100.0, 2.0);
  CHECK(bound == doctest::Approx(2.0 * std::exp(-2.0)));
  CHECK(normal_two_sided_sf(2.0) <= bound);
  check_dominates(gaussian_mean_cert(RateSequence::log_n()), {10.0, 1e3},
                  [](double n, double s) { return normal_two_sided_sf(s * std::sqrt(n)); });
}

TEST_CASE("Gaussian variable certificate") {
  const auto c = gaussian_variable_cert(2.0, RateSequence::constant(3.0));
  check_dominates(c, {1.0}, [](double, double s) { return normal_two_sided_sf(s / 2.0); });
  CHECK(code_of([] { gaussian_variable_cert(0.0, RateSequence::constant(1.0)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("sample-mean shapes") {
  const auto a1 = sample_mean_cert(1, RateSequence::log_n(), "c");
  const auto a2 = sample_mean_cert(2, RateSequence::log_n(), "c");
  CHECK(a1.c1 == 2.0);
  CHECK(a2.c1 == doctest::Approx(M_E));
  CHECK(a1.rate(1e6) == doctest::Approx(std::log(1e6)));
  CHECK(code_of([] { sample_mean_cert(3, RateSequence::log_n(), "c"); }) == ErrorCode::BadAlpha);
}

TEST_CASE("hypotheses round trip through json") {
  const MomentHypothesis h{RateSequence::log_n(), SizeSequence::constant(2.0)};
  const auto back = moment_hypothesis_from_json(to_json(h));
  CHECK(back.bound(5.0) == 2.0);
  PsiNormHypothesis p{1.0, 0.5, true, SizeSequence::constant(3.0)};
  const auto q = psi_hypothesis_from_json(to_json(p));
  CHECK(q.alpha == 1.0);
  CHECK(q.norm_bound == 0.5);
  CHECK(q.per_coordinate);
  CHECK((*q.dimension)(1.0) == 3.0);
}
