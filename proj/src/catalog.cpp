#include "tailcert/catalog.hpp"

#include <cmath>

#include "tailcert/error.hpp"

namespace tailcert {

namespace {

template <class Seq>
std::optional<double> try_eval(const Seq& s, double n) {
  try {
    return s(n);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::OutOfDomain) return std::nullopt;
    throw;
  }
}

// Smallest integer n with r_n > 0 (log n starts at 2, d log(n/d) at d + 1).
std::uint64_t first_positive_n(const RateSequence& rate) {
  for (std::uint64_t n = 1; n < 1000000; ++n) {
    auto r = try_eval(rate, static_cast<double>(n));
    if (r && *r > 0) return n;
  }
  throw Error(ErrorCode::InvalidArgument, "r_n is never positive below n = 1e6");
}

TailCertificate markov_shape(SizeSequence size, RateSequence rate, std::string op, json params) {
  TailCertificate c;
  c.n_threshold = first_positive_n(rate);
  c.size = std::move(size);
  c.rate = std::move(rate);
  c.c1 = 1.0;
  c.c2 = M_E;
  c.f = RateFunction::log();
  c.provenance = make_provenance("catalog:" + op, std::move(params));
  return c;
}

void require_rate_at_least(const RateSequence& rate, double floor, ErrorCode code, const EvalRange& range) {
  for (double n : range.ns) {
    auto r = try_eval(rate, n);
    if (r && *r < floor * (1 - 1e-12)) {
      throw Error(code, "r_n = " + std::to_string(*r) + " < " + std::to_string(floor) +
                            " at n = " + std::to_string(n));
    }
  }
}

SizeSequence dim_or_n(const std::optional<SizeSequence>& dim) {
  return dim ? *dim : SizeSequence::monomial(1.0, 1.0, 0.0);
}

// r_n >= c log d_n on the range.
void require_log_dimension(const RateSequence& rate, double c, const std::optional<SizeSequence>& dim,
                           const EvalRange& range) {
  if (!(c > 0)) throw Error(ErrorCode::InvalidArgument, "c must be positive");
  const SizeSequence d = dim_or_n(dim);
  for (double n : range.ns) {
    auto r = try_eval(rate, n);
    auto dn = try_eval(d, n);
    if (r && dn && *dn > 1 && *r < c * std::log(*dn) * (1 - 1e-12)) {
      throw Error(ErrorCode::RateTooSmall, "r_n < c log d_n at n = " + std::to_string(n));
    }
  }
}

SizeSequence psi_moment_size(const PsiNormHypothesis& h, const RateSequence& rate) {
  if (!(h.alpha >= 1)) throw Error(ErrorCode::InvalidArgument, "psi hypotheses need alpha >= 1");
  if (!(h.norm_bound > 0) || h.norm_bound > 1 + 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "norm bound must lie in (0, 1]; rescale the variable first");
  }
  return SizeSequence::product(
      {SizeSequence::constant(h.norm_bound), SizeSequence::power_of_rate(rate, 1.0 / h.alpha)});
}

}  // namespace

json to_json(const MomentHypothesis& h) { return {{"order", h.order.to_json()}, {"bound", h.bound.to_json()}}; }

MomentHypothesis moment_hypothesis_from_json(const json& j) {
  return {RateSequence::from_json(j.at("order")), SizeSequence::from_json(j.at("bound"))};
}

json to_json(const PsiNormHypothesis& h) {
  json j{{"alpha", h.alpha}, {"norm_bound", h.norm_bound}, {"per_coordinate", h.per_coordinate}};
  if (h.dimension) j["dimension"] = h.dimension->to_json();
  return j;
}

PsiNormHypothesis psi_hypothesis_from_json(const json& j) {
  PsiNormHypothesis h;
  h.alpha = j.at("alpha").get<double>();
  h.norm_bound = j.value("norm_bound", 1.0);
  h.per_coordinate = j.value("per_coordinate", false);
  if (j.contains("dimension")) h.dimension = SizeSequence::from_json(j.at("dimension"));
  return h;
}

TailCertificate from_moment_bound(const MomentHypothesis& h, const EvalRange& range) {
  require_rate_at_least(h.order, 1.0, ErrorCode::RateBelowOne, range);
  return markov_shape(h.bound, h.order, "from_moment_bound", {{"hypothesis", to_json(h)}});
}

TailCertificate lp_norm_cert(const MomentHypothesis& h, std::optional<SizeSequence> dim,
                             const EvalRange& range) {
  require_rate_at_least(h.order, 1.0, ErrorCode::RateBelowOne, range);
  auto size = SizeSequence::product({SizeSequence::nth_root(h.order, dim), h.bound});
  json params{{"hypothesis", to_json(h)}};
  if (dim) params["dim"] = dim->to_json();
  return markov_shape(size, h.order, "lp_norm", params);
}

TailCertificate linf_norm_cert(const MomentHypothesis& h, double c, std::optional<SizeSequence> dim,
                               const EvalRange& range) {
  require_rate_at_least(h.order, 1.0, ErrorCode::RateBelowOne, range);
  require_log_dimension(h.order, c, dim, range);
  auto size = SizeSequence::product({SizeSequence::constant(std::exp(1.0 / c)), h.bound});
  json params{{"hypothesis", to_json(h)}, {"c", c}};
  if (dim) params["dim"] = dim->to_json();
  return markov_shape(size, h.order, "linf_norm", params);
}

TailCertificate from_psi_norm(const PsiNormHypothesis& h, const RateSequence& rate, const EvalRange& range) {
  require_rate_at_least(rate, 1.0, ErrorCode::RateBelowOne, range);
  return markov_shape(psi_moment_size(h, rate), rate, "from_psi_norm", {{"hypothesis", to_json(h)}});
}

TailCertificate psi_lp_norm_cert(const PsiNormHypothesis& h, const RateSequence& rate, const EvalRange& range) {
  require_rate_at_least(rate, 1.0, ErrorCode::RateBelowOne, range);
  auto size = SizeSequence::product({SizeSequence::nth_root(rate, h.dimension), psi_moment_size(h, rate)});
  return markov_shape(size, rate, "psi_lp_norm", {{"hypothesis", to_json(h)}});
}

TailCertificate psi_linf_norm_cert(const PsiNormHypothesis& h, const RateSequence& rate, double c,
                                   const EvalRange& range) {
  require_rate_at_least(rate, 1.0, ErrorCode::RateBelowOne, range);
  require_log_dimension(rate, c, h.dimension, range);
  auto size = SizeSequence::product({SizeSequence::constant(std::exp(1.0 / c)), psi_moment_size(h, rate)});
  return markov_shape(size, rate, "psi_linf_norm", {{"hypothesis", to_json(h)}, {"c", c}});
}

TailCertificate subgaussian_l2_cert(const SizeSequence& dim, const RateSequence& rate, const std::string& c_name,
                                    double declared_constant, const EvalRange& range) {
  for (double n : range.ns) {
    auto r = try_eval(rate, n);
    auto d = try_eval(dim, n);
    if (r && d && *r < declared_constant * *d * (1 - 1e-12)) {
      throw Error(ErrorCode::RateBelowDimension,
                  "r_n = " + std::to_string(*r) + " below " + std::to_string(declared_constant) +
                      " * d_n at n = " + std::to_string(n));
    }
  }
  TailCertificate c;
  c.size = SizeSequence::power_of_rate(rate, 0.5);
  c.rate = rate;
  c.c1 = 1.0;
  c.c2 = M_E;
  c.f = RateFunction::linear(Param::unknown(c_name));
  c.n_threshold = first_positive_n(c.rate);
  c.provenance = make_provenance("catalog:subgaussian_l2",
                                 {{"dim", dim.to_json()}, {"declared_constant", declared_constant}});
  return c;
}

TailCertificate sample_mean_cert(int alpha, const RateSequence& rate, const std::string& c_name) {
  TailCertificate c;
  c.size = SizeSequence::sqrt_rate_over_n(rate);
  c.c2 = 1.0;
  if (alpha == 1) {
    c.rate = RateSequence::min(rate, RateSequence::linear_n(1.0));
    c.f = RateFunction::linear(Param::unknown(c_name));
    c.c1 = 2.0;
  } else if (alpha == 2) {
    c.rate = rate;
    c.f = RateFunction::power(Param::unknown(c_name), 2.0);
    c.c1 = M_E;
  } else {
    throw Error(ErrorCode::BadAlpha, "sample-mean certificates exist for alpha in {1, 2}");
  }
  c.n_threshold = first_positive_n(c.rate);
  c.provenance = make_provenance("catalog:sample_mean", {{"alpha", alpha}});
  return c;
}

TailCertificate gaussian_mean_cert(const RateSequence& rate) {
  TailCertificate c;
  c.size = SizeSequence::sqrt_rate_over_n(rate);
  c.rate = rate;
  c.c1 = 2.0;
  c.c2 = 1.0;
  c.f = RateFunction::power(0.5, 2.0);
  c.n_threshold = first_positive_n(c.rate);
  c.provenance = make_provenance("catalog:gaussian_mean");
  return c;
}

TailCertificate gaussian_variable_cert(double sigma, const RateSequence& rate) {
  if (!(sigma > 0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  TailCertificate c;
  c.size = SizeSequence::power_of_rate(rate, 0.5);
  c.rate = rate;
  c.c1 = 1.0;  // 2 * Phibar(x) <= exp(-x^2 / 2)
  c.c2 = 1.0;
  c.f = RateFunction::power(1.0 / (2.0 * sigma * sigma), 2.0);
  c.n_threshold = first_positive_n(c.rate);
  c.provenance = make_provenance("catalog:gaussian_variable", {{"sigma", sigma}});
  return c;
}

}  // namespace tailcert
