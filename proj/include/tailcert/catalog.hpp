#pragma once

// Certificate constructors for standard distributional hypotheses.

#include <optional>
#include <string>

#include "tailcert/certificate.hpp"

namespace tailcert {

/// E^{1/r_n} |X_n|^{r_n} <= Y_n.
struct MomentHypothesis {
  RateSequence order;
  SizeSequence bound;
};

/// ||X_n||_{psi_alpha} <= norm_bound (per coordinate for vectors).
struct PsiNormHypothesis {
  double alpha = 2.0;
  double norm_bound = 1.0;
  bool per_coordinate = false;
  std::optional<SizeSequence> dimension;
};

json to_json(const MomentHypothesis& h);
MomentHypothesis moment_hypothesis_from_json(const json& j);
json to_json(const PsiNormHypothesis& h);
PsiNormHypothesis psi_hypothesis_from_json(const json& j);

/// Markov at order r_n: P(|X| >= tY) <= t^{-r_n}, stated from C2 = e.
TailCertificate from_moment_bound(const MomentHypothesis& h, const EvalRange& range = EvalRange::standard());

/// ||X_n||_{r_n} for a vector with d_n coordinates (d_n = n by default).
TailCertificate lp_norm_cert(const MomentHypothesis& h, std::optional<SizeSequence> dim = std::nullopt,
                             const EvalRange& range = EvalRange::standard());
/// ||X_n||_inf when r_n >= c log d_n, using d_n^{1/r_n} <= e^{1/c}.
TailCertificate linf_norm_cert(const MomentHypothesis& h, double c,
                               std::optional<SizeSequence> dim = std::nullopt,
                               const EvalRange& range = EvalRange::standard());

/// E^{1/r}|X|^r <= r^{1/alpha} ||X||_{psi_alpha}, then Markov.
TailCertificate from_psi_norm(const PsiNormHypothesis& h, const RateSequence& rate,
                              const EvalRange& range = EvalRange::standard());
TailCertificate psi_lp_norm_cert(const PsiNormHypothesis& h, const RateSequence& rate,
                                 const EvalRange& range = EvalRange::standard());
TailCertificate psi_linf_norm_cert(const PsiNormHypothesis& h, const RateSequence& rate, double c,
                                   const EvalRange& range = EvalRange::standard());

/// ||X_n||_2 for sub-Gaussian vectors when r_n >= declared_constant * d_n.
/// The exponent constant is left symbolic under `c_name`.
TailCertificate subgaussian_l2_cert(const SizeSequence& dim, const RateSequence& rate,
                                    const std::string& c_name = "hkz_c", double declared_constant = 1.0,
                                    const EvalRange& range = EvalRange::standard());

/// Mean of n independent summands with psi_alpha norms at most 1 (alpha = 1:
/// Bernstein shape, alpha = 2: Hoeffding shape); constant left symbolic.
TailCertificate sample_mean_cert(int alpha, const RateSequence& rate, const std::string& c_name);

/// Mean of n iid N(0, 1): 2 exp(-r_n t^2 / 2), all constants concrete.
TailCertificate gaussian_mean_cert(const RateSequence& rate);

/// One N(0, sigma^2) variable on the scale sqrt(r_n):
/// P(|X| >= t sqrt(r_n)) <= exp(-r_n t^2 / (2 sigma^2)).
TailCertificate gaussian_variable_cert(double sigma, const RateSequence& rate);

}  // namespace tailcert
