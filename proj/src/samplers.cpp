#include "tailcert/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/hypergeometric_1F1.hpp>

#include "tailcert/error.hpp"
#include "tailcert/special.hpp"

namespace tailcert {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& terms) {
  double m = kNegInf;
  for (double t : terms) m = std::max(m, t);
  if (m == kNegInf) return m;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

double log_std_gaussian_moment(double p) {
  return 0.5 * p * std::log(2.0) + std::lgamma(0.5 * (p + 1.0)) - 0.5 * std::log(M_PI);
}

// int_0^1 u^p e^u du as a positive series.
double unit_exp_integral(double p) {
  double term = 1.0, sum = 0.0;
  for (int k = 0; k < 200; ++k) {
    if (k > 0) term /= k;
    const double add = term / (p + k + 1.0);
    sum += add;
    if (add < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

DistSpec DistSpec::gaussian(double mu, double sigma) {
  DistSpec s;
  s.family = Family::Gaussian;
  s.mu = mu;
  s.sigma = sigma;
  return s;
}

DistSpec DistSpec::rademacher() {
  DistSpec s;
  s.family = Family::Rademacher;
  return s;
}

DistSpec DistSpec::uniform(double a, double b) {
  DistSpec s;
  s.family = Family::UniformBounded;
  s.a = a;
  s.b = b;
  return s;
}

DistSpec DistSpec::exponential(double lambda, bool centered) {
  DistSpec s;
  s.family = Family::Exponential;
  s.lambda = lambda;
  s.centered = centered;
  return s;
}

DistSpec DistSpec::chi_square(double k) {
  DistSpec s;
  s.family = Family::ChiSquare;
  s.k = k;
  return s;
}

DistSpec DistSpec::product_of_gaussians() {
  DistSpec s;
  s.family = Family::ProductOfGaussians;
  return s;
}

DistSpec DistSpec::atoms(std::vector<double> values, std::vector<double> probs) {
  DistSpec s;
  s.family = Family::DiscreteAtoms;
  s.values = std::move(values);
  s.probs = std::move(probs);
  return s;
}

DistSpec DistSpec::isotropic_gaussian(int dim) {
  DistSpec s;
  s.family = Family::IsotropicGaussianVector;
  s.dim = dim;
  return s;
}

std::string to_string(Family f) {
  switch (f) {
    case Family::Gaussian: return "gaussian";
    case Family::Rademacher: return "rademacher";
    case Family::UniformBounded: return "uniform";
    case Family::Exponential: return "exponential";
    case Family::ChiSquare: return "chi_square";
    case Family::ProductOfGaussians: return "product_of_gaussians";
    case Family::DiscreteAtoms: return "atoms";
    case Family::IsotropicGaussianVector: return "isotropic_gaussian";
    case Family::ScaledToUnitPsi: return "scaled_to_unit_psi";
  }
  return "unknown";
}

void validate(const DistSpec& s) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::BadSpec, m); };
  switch (s.family) {
    case Family::Gaussian:
      if (!(s.sigma > 0) || !std::isfinite(s.mu)) bad("gaussian needs sigma > 0");
      break;
    case Family::UniformBounded:
      if (!(s.a < s.b)) bad("uniform needs a < b");
      break;
    case Family::Exponential:
      if (!(s.lambda > 0)) bad("exponential needs lambda > 0");
      break;
    case Family::ChiSquare:
      if (!(s.k > 0)) bad("chi-square needs k > 0");
      break;
    case Family::DiscreteAtoms: {
      if (s.values.empty() || s.values.size() != s.probs.size()) bad("atoms need matching values/probs");
      double total = 0.0;
      for (double p : s.probs) {
        if (!(p >= 0)) bad("atom probabilities must be >= 0");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) bad("atom probabilities must sum to 1");
      break;
    }
    case Family::IsotropicGaussianVector:
      if (s.dim < 1) bad("vector dimension must be >= 1");
      break;
    case Family::ScaledToUnitPsi:
      if (!s.base) bad("scaled spec needs a base");
      if (!(s.scale > 0)) bad("scale must be positive");
      validate(*s.base);
      break;
    case Family::Rademacher:
    case Family::ProductOfGaussians:
      break;
  }
}

int dimension(const DistSpec& s) {
  if (s.family == Family::IsotropicGaussianVector) return s.dim;
  if (s.family == Family::ScaledToUnitPsi) return dimension(*s.base);
  return 1;
}

double draw(const DistSpec& s, Rng& rng) {
  switch (s.family) {
    case Family::Gaussian: return s.mu + s.sigma * rng.normal();
    case Family::Rademacher: return rng.rademacher();
    case Family::UniformBounded: return s.a + (s.b - s.a) * rng.uniform();
    case Family::Exponential: {
      const double x = rng.exponential() / s.lambda;
      return s.centered ? x - 1.0 / s.lambda : x;
    }
    case Family::ChiSquare: return 2.0 * rng.gamma(0.5 * s.k);
    case Family::ProductOfGaussians: {
      const double z1 = rng.normal();
      return z1 * rng.normal();
    }
    case Family::DiscreteAtoms: {
      const double u = rng.uniform();
      double acc = 0.0;
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        acc += s.probs[i];
        if (u < acc) return s.values[i];
      }
      return s.values.back();
    }
    case Family::IsotropicGaussianVector: return rng.normal();
    case Family::ScaledToUnitPsi: return draw(*s.base, rng) / s.scale;
  }
  return 0.0;
}

std::vector<double> sample(const DistSpec& spec, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorCode::BadSpec, "sample count must be >= 1");
  validate(spec);
  Rng rng(seed, spec.stream);
  const std::size_t total = count * static_cast<std::size_t>(dimension(spec));
  std::vector<double> out(total);
  for (auto& x : out) x = draw(spec, rng);
  return out;
}

double log_abs_moment(const DistSpec& s, double p) {
  switch (s.family) {
    case Family::Gaussian: {
      const double base = p * std::log(s.sigma) + log_std_gaussian_moment(p);
      if (s.mu == 0.0) return base;
      // Kummer's transformation keeps every series term positive.
      const double x = s.mu * s.mu / (2.0 * s.sigma * s.sigma);
      return base - x + std::log(boost::math::hypergeometric_1F1(0.5 * (p + 1.0), 0.5, x));
    }
    case Family::Rademacher: return 0.0;
    case Family::UniformBounded: {
      const double lo = std::abs(std::min(s.a, 0.0)), hi = std::abs(std::max(s.b, 0.0));
      std::vector<double> terms;
      if (s.a >= 0 || s.b <= 0) {
        const double u = std::max(std::abs(s.a), std::abs(s.b)), l = std::min(std::abs(s.a), std::abs(s.b));
        // (u^(p+1) - l^(p+1)) / ((p+1)(b-a))
        const double lu = (p + 1.0) * std::log(u);
        const double ratio = l > 0 ? std::exp((p + 1.0) * (std::log(l) - std::log(u))) : 0.0;
        return lu + std::log1p(-ratio) - std::log(p + 1.0) - std::log(s.b - s.a);
      }
      if (lo > 0) terms.push_back((p + 1.0) * std::log(lo));
      if (hi > 0) terms.push_back((p + 1.0) * std::log(hi));
      return log_sum_exp(terms) - std::log(p + 1.0) - std::log(s.b - s.a);
    }
    case Family::Exponential: {
      const double scale = -p * std::log(s.lambda);
      if (!s.centered) return std::lgamma(p + 1.0) + scale;
      // E|E - 1|^p = e^{-1} (int_0^1 u^p e^u du + Gamma(p + 1))
      return -1.0 + log_sum_exp({std::log(unit_exp_integral(p)), std::lgamma(p + 1.0)}) + scale;
    }
    case Family::ChiSquare:
      return p * std::log(2.0) + std::lgamma(0.5 * s.k + p) - std::lgamma(0.5 * s.k);
    case Family::ProductOfGaussians: return 2.0 * log_std_gaussian_moment(p);
    case Family::DiscreteAtoms: {
      std::vector<double> terms;
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (s.values[i] != 0.0 && s.probs[i] > 0) {
          terms.push_back(std::log(s.probs[i]) + p * std::log(std::abs(s.values[i])));
        }
      }
      return log_sum_exp(terms);
    }
    case Family::IsotropicGaussianVector: return log_std_gaussian_moment(p);
    case Family::ScaledToUnitPsi: return log_abs_moment(*s.base, p) - p * std::log(s.scale);
  }
  throw Error(ErrorCode::MomentsUnavailable, "no moment formula for " + to_string(s.family));
}

double abs_survival(const DistSpec& s, double x) {
  if (x <= 0) return 1.0;
  switch (s.family) {
    case Family::Gaussian:
      return normal_sf((x - s.mu) / s.sigma) + normal_sf((x + s.mu) / s.sigma);
    case Family::Rademacher: return x <= 1.0 ? 1.0 : 0.0;
    case Family::UniformBounded: {
      const double w = s.b - s.a;
      const double right = std::max(0.0, s.b - std::max(x, s.a));
      const double left = std::max(0.0, std::min(-x, s.b) - s.a);
      return (right + left) / w;
    }
    case Family::Exponential: {
      if (!s.centered) return std::exp(-s.lambda * x);
      const double m = 1.0 / s.lambda;
      const double up = std::exp(-s.lambda * (m + x));
      const double down = x < m ? -std::expm1(-s.lambda * (m - x)) : 0.0;
      return up + down;
    }
    case Family::ChiSquare: return chi2_sf(s.k, x);
    case Family::DiscreteAtoms: {
      double p = 0.0;
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (std::abs(s.values[i]) >= x) p += s.probs[i];
      }
      return std::min(p, 1.0);
    }
    case Family::IsotropicGaussianVector: return chi2_sf(s.dim, x * x);
    case Family::ScaledToUnitPsi: return abs_survival(*s.base, x * s.scale);
    case Family::ProductOfGaussians: break;
  }
  throw Error(ErrorCode::BadSpec, "no closed-form survival function for " + to_string(s.family));
}

PsiNormRecord psi_norm(const DistSpec& spec, double alpha, const PsiGrid& grid) {
  validate(spec);
  if (!(alpha >= 1)) throw Error(ErrorCode::InvalidArgument, "psi norms need alpha >= 1");
  PsiNormRecord rec;
  rec.alpha = alpha;
  rec.p_min = grid.p_min;
  rec.p_max = grid.p_max;
  rec.grid_points = grid.points;

  if (spec.family == Family::Rademacher) {
    rec.method = PsiMethod::ClosedForm;
    rec.value = 1.0;
    return rec;
  }
  if (spec.family == Family::DiscreteAtoms &&
      std::all_of(spec.values.begin(), spec.values.end(), [](double v) { return v == 0.0; })) {
    rec.method = PsiMethod::ClosedForm;
    rec.value = 0.0;
    return rec;
  }

  rec.method = PsiMethod::MomentFormulaSupremum;
  double best = kNegInf;
  for (double p : geometric_grid(grid.p_min, grid.p_max, grid.points)) {
    const double lm = log_abs_moment(spec, p);
    if (!std::isfinite(lm)) {
      if (lm == kNegInf) continue;
      throw Error(ErrorCode::MomentsUnavailable, "moment of order " + std::to_string(p) + " is not finite");
    }
    const double v = lm / p - std::log(p) / alpha;
    if (v > best) {
      best = v;
      rec.argmax_p = p;
    }
  }
  rec.value = best == kNegInf ? 0.0 : std::exp(best);
  return rec;
}

DistSpec scale_to_unit_psi(const DistSpec& spec, double alpha, const PsiGrid& grid) {
  const auto rec = psi_norm(spec, alpha, grid);
  if (!(rec.value > 0)) throw Error(ErrorCode::ZeroNorm, "psi norm is zero; nothing to rescale");
  DistSpec out;
  out.family = Family::ScaledToUnitPsi;
  out.base = std::make_shared<const DistSpec>(spec);
  out.alpha = alpha;
  out.scale = rec.value;
  out.stream = spec.stream;
  return out;
}

json to_json(const DistSpec& s) {
  json j{{"family", to_string(s.family)}};
  switch (s.family) {
    case Family::Gaussian: j["mu"] = s.mu; j["sigma"] = s.sigma; break;
    case Family::UniformBounded: j["a"] = s.a; j["b"] = s.b; break;
    case Family::Exponential: j["lambda"] = s.lambda; j["centered"] = s.centered; break;
    case Family::ChiSquare: j["k"] = s.k; break;
    case Family::DiscreteAtoms: j["values"] = s.values; j["probs"] = s.probs; break;
    case Family::IsotropicGaussianVector: j["dim"] = s.dim; break;
    case Family::ScaledToUnitPsi:
      j["base"] = to_json(*s.base);
      j["alpha"] = s.alpha;
      j["scale"] = s.scale;
      break;
    case Family::Rademacher:
    case Family::ProductOfGaussians: break;
  }
  if (s.stream != 0) j["stream"] = s.stream;
  return j;
}

DistSpec dist_from_json(const json& j) {
  try {
    const auto fam = j.at("family").get<std::string>();
    DistSpec s;
    if (fam == "gaussian") {
      s = DistSpec::gaussian(j.value("mu", 0.0), j.value("sigma", 1.0));
    } else if (fam == "rademacher") {
      s = DistSpec::rademacher();
    } else if (fam == "uniform") {
      s = DistSpec::uniform(j.at("a").get<double>(), j.at("b").get<double>());
    } else if (fam == "exponential") {
      s = DistSpec::exponential(j.value("lambda", 1.0), j.value("centered", false));
    } else if (fam == "chi_square") {
      s = DistSpec::chi_square(j.at("k").get<double>());
    } else if (fam == "product_of_gaussians") {
      s = DistSpec::product_of_gaussians();
    } else if (fam == "atoms") {
      s = DistSpec::atoms(j.at("values").get<std::vector<double>>(), j.at("probs").get<std::vector<double>>());
    } else if (fam == "isotropic_gaussian") {
      s = DistSpec::isotropic_gaussian(j.at("dim").get<int>());
    } else if (fam == "scaled_to_unit_psi") {
      s.family = Family::ScaledToUnitPsi;
      s.base = std::make_shared<const DistSpec>(dist_from_json(j.at("base")));
      s.alpha = j.at("alpha").get<double>();
      // The scale is recomputed unless given explicitly.
      s.scale = j.contains("scale") ? j.at("scale").get<double>() : psi_norm(*s.base, s.alpha).value;
    } else {
      throw Error(ErrorCode::BadSpec, "unknown family '" + fam + "'");
    }
    s.stream = j.value("stream", std::uint64_t{0});
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadSpec, std::string("distribution spec: ") + e.what());
  }
}

json to_json(const PsiNormRecord& r) {
  return {{"alpha", r.alpha},
          {"value", r.value},
          {"method", r.method == PsiMethod::ClosedForm ? "closed_form" : "moment_formula_supremum"},
          {"p_grid", {{"min", r.p_min}, {"max", r.p_max}, {"points", r.grid_points}}},
          {"argmax_p", r.argmax_p}};
}

}  // namespace tailcert
