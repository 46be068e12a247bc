#pragma once

#include <cstdint>

namespace tailcert {

/// P(Z >= x) for standard normal Z.
double normal_sf(double x);
/// P(|Z| >= x).
double normal_two_sided_sf(double x);
/// P(|Z| <= x).
double normal_abs_cdf(double x);

/// P(chi2_k >= x).
double chi2_sf(double k, double x);
/// P(Gamma(shape, 1) >= x).
double gamma_sf(double shape, double x);

/// One-sided exact binomial (Clopper-Pearson) upper limit at level 1 - delta:
/// the p with P(Bin(m, p) <= k) = delta.  Equals 1 when k = m and
/// 1 - delta^(1/m) when k = 0.
double clopper_pearson_upper(std::uint64_t k, std::uint64_t m, double delta);
/// Matching lower limit: P(Bin(m, p) >= k) = delta; 0 when k = 0.
double clopper_pearson_lower(std::uint64_t k, std::uint64_t m, double delta);

}  // namespace tailcert
