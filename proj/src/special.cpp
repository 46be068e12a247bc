#include "tailcert/special.hpp"

#include <cmath>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "tailcert/error.hpp"

namespace tailcert {

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double normal_two_sided_sf(double x) {
  if (x <= 0) return 1.0;
  return std::erfc(x / std::sqrt(2.0));
}

double normal_abs_cdf(double x) {
  if (x <= 0) return 0.0;
  return std::erf(x / std::sqrt(2.0));
}

double chi2_sf(double k, double x) { return gamma_sf(0.5 * k, 0.5 * x); }

double gamma_sf(double shape, double x) {
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(shape, x);
}

namespace {
void check_binomial(std::uint64_t k, std::uint64_t m, double delta) {
  if (m == 0 || k > m) throw Error(ErrorCode::InvalidArgument, "binomial limits need 0 <= k <= m, m >= 1");
  if (!(delta > 0 && delta < 1)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
}
}  // namespace

double clopper_pearson_upper(std::uint64_t k, std::uint64_t m, double delta) {
  check_binomial(k, m, delta);
  if (k == m) return 1.0;
  if (k == 0) return -std::expm1(std::log(delta) / static_cast<double>(m));
  return boost::math::ibeta_inv(static_cast<double>(k + 1), static_cast<double>(m - k), 1.0 - delta);
}

double clopper_pearson_lower(std::uint64_t k, std::uint64_t m, double delta) {
  check_binomial(k, m, delta);
  if (k == 0) return 0.0;
  if (k == m) return std::exp(std::log(delta) / static_cast<double>(m));
  return boost::math::ibeta_inv(static_cast<double>(k), static_cast<double>(m - k + 1), delta);
}

}  // namespace tailcert
