#include "tailcert/scenarios.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "tailcert/algebra.hpp"
#include "tailcert/catalog.hpp"
#include "tailcert/document.hpp"
#include "tailcert/error.hpp"
#include "tailcert/kernels.hpp"
#include "tailcert/nets.hpp"
#include "tailcert/samplers.hpp"
#include "tailcert/special.hpp"

namespace tailcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> linspace(double a, double b, int k) {
  std::vector<double> out(k);
  for (int i = 0; i < k; ++i) out[i] = a + (b - a) * i / (k - 1);
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + h, v.end());
  const double hi = v[h];
  if (v.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + h));
}

EvalRange grid_range(const std::vector<double>& ns) { return EvalRange{ns}; }

/// sigma of the centered Gaussian with unit psi_2 norm.
double unit_psi2_sigma() { return 1.0 / psi_norm(DistSpec::gaussian(), 2.0).value; }

std::string fmt_label(const std::string& base, int d, double n) {
  std::string s = base;
  if (d > 0) s += ":d=" + std::to_string(d);
  if (n > 0) s += ":n=" + std::to_string(static_cast<long long>(std::llround(n)));
  return s;
}

class Builder {
 public:
  Builder(const ScenarioConfig& cfg, ExperimentReport& rep) : cfg_(cfg), rep_(rep) {}

  void cert(const std::string& label, const TailCertificate& c) {
    rep_.certificates.push_back({{"label", label}, {"digest", certificate_digest(c)}, {"certificate", to_json(c)}});
  }

  Verdict tail(const std::string& label, const EmpiricalTail& t, const TailCertificate& c) {
    auto v = check_certificate(c, t);
    rep_.tails.push_back({label, t, v});
    return v;
  }

  void unchecked_tail(const std::string& label, const EmpiricalTail& t) { rep_.tails.push_back({label, t, {}}); }

  void check(const std::string& name, bool ok) { rep_.checks.emplace_back(name, ok); }
  void note(std::string s) { rep_.notes.push_back(std::move(s)); }
  void plot(double x, double y, const std::string& series) { rep_.plot.push_back({x, y, series}); }

  void rate(const std::string& label, const EmpiricalTail& t, const TailCertificate& c) {
    try {
      auto r = rate_diagnostic(t, c);
      rep_.diagnostics["rate:" + label] = to_json(r);
      for (std::size_t i = 0; i < r.x.size(); ++i) plot(r.x[i], r.y[i], "rate:" + label);
    } catch (const Error& e) {
      rep_.diagnostics["rate:" + label] = {{"error", e.what()}};
    }
  }

  json& stats() { return rep_.stats; }
  json& diagnostics() { return rep_.diagnostics; }
  json& nets() { return rep_.nets; }
  const ScenarioConfig& cfg() const { return cfg_; }

  template <class T>
  T param(const std::string& key, T fallback) const {
    return cfg_.params.contains(key) ? cfg_.params.at(key).get<T>() : fallback;
  }

 private:
  const ScenarioConfig& cfg_;
  ExperimentReport& rep_;
};

void budget(double work, const std::string& what) {
  if (work > 2e12) throw Error(ErrorCode::OracleBudgetExceeded, what + " needs about " + std::to_string(work) + " operations");
}

// ---------------------------------------------------------------------------

void gaussian_mean(Builder& b) {
  const auto& cfg = b.cfg();
  const auto rate = RateSequence::log_n();
  const auto cert = gaussian_mean_cert(rate);
  b.cert("gaussian_mean", cert);
  b.note("the sample mean of n standard normals has variance 1/n (standard deviation 1/sqrt(n)); it is drawn as N(0, 1/n)");

  const auto exact_p = [&](double n, double t) { return normal_two_sided_sf(t * std::sqrt(rate(n))); };
  const auto exact = exact_tail(exact_p, cfg.n_grid, cfg.t_grid, cfg.trials, cfg.delta);
  b.tail("exact", exact, cert);

  TailRequest req{cfg.n_grid, cfg.t_grid, cfg.trials, cfg.delta, cfg.seed};
  const auto mc = estimate_tail([](Rng& rng, double n) { return std::abs(rng.normal()) / std::sqrt(std::log(n)); },
                                [&](double n) { return cert.size(n); }, req, "gaussian-mean:N(0,1/n)");
  b.tail("mc", mc, cert);
  b.rate("mc", mc, cert);

  // Sample counts against the exact probability, 3 sigma.
  std::size_t within = 0;
  for (const auto& p : mc.probes) {
    const double q = exact_p(p.n, p.t);
    const double sd = std::sqrt(q * (1 - q) / static_cast<double>(p.trials));
    within += std::abs(static_cast<double>(p.exceedances) / p.trials - q) <= 3 * sd + 1.0 / p.trials;
  }
  b.stats()["mc_within_3sd"] = within;
  b.stats()["probes"] = mc.probes.size();

  if (b.param<bool>("fit", true)) {
    TailCertificate shape = cert;
    shape.f = RateFunction::power(Param::unknown("c"), 2.0);
    const auto pop = exact_tail(exact_p, cfg.n_grid, cfg.t_grid, 0, cfg.delta);
    const auto fit = fit_constants(shape, pop, FitSearch{});
    b.stats()["fitted_c"] = fit.verdict.fitted.at("c");
  }

  // X_n = mean * log n is o(1) at rate log n.
  const double c = b.param<double>("little_o_c", 0.5);
  const auto lo = exact_tail([](double n, double t) { return normal_two_sided_sf(t * std::sqrt(n) / std::log(n)); },
                             cfg.n_grid, {c}, 0, cfg.delta);
  b.diagnostics()["little_o"] = to_json(little_o_diagnostic(lo, c, rate, b.param<double>("little_o_threshold", -1.0)));
}

// l_p and l_inf norms of n iid N(0, 1) coordinates at p = r_n = log n.
void norm_scenario(Builder& b, bool linf) {
  const auto& cfg = b.cfg();
  const auto rate = RateSequence::log_n();
  std::map<double, double> ys;
  const auto z = DistSpec::gaussian();
  for (double n : cfg.n_grid) ys[n] = std::exp(log_abs_moment(z, rate(n)) / rate(n));
  const MomentHypothesis h{rate, SizeSequence::custom(ys)};
  const auto range = grid_range(cfg.n_grid);
  const auto cert = linf ? linf_norm_cert(h, b.param<double>("c", 1.0), std::nullopt, range)
                         : lp_norm_cert(h, std::nullopt, range);
  b.cert(linf ? "linf_norm" : "lp_norm", cert);
  double work = 0;
  for (double n : cfg.n_grid) work += n * static_cast<double>(cfg.trials);
  budget(work * 30, "norm scenario");

  TailRequest req{cfg.n_grid, cfg.t_grid, cfg.trials, cfg.delta, cfg.seed};
  const auto sampler = [&](Rng& rng, double nd) {
    const auto n = static_cast<std::size_t>(std::llround(nd));
    const double p = std::log(nd);
    double mx = 0.0;
    std::vector<double> a(n);
    for (auto& v : a) {
      v = std::abs(rng.normal());
      mx = std::max(mx, v);
    }
    double norm = mx;
    if (!linf) {
      double s = 0.0;
      for (double v : a) s += std::pow(v / mx, p);
      norm = mx * std::pow(s, 1.0 / p);
    }
    return norm / cert.size(nd);
  };
  const auto tail = estimate_tail(sampler, [&](double n) { return cert.size(n); }, req,
                                  linf ? "linf:N(0,1)^n" : "lp:N(0,1)^n");
  b.tail("mc", tail, cert);
  b.rate("mc", tail, cert);
}

DistSpec named_family(const std::string& name) {
  if (name == "gaussian") return DistSpec::gaussian();
  if (name == "exponential") return DistSpec::exponential(1.0, false);
  if (name == "centered_exponential") return DistSpec::exponential(1.0, true);
  if (name == "rademacher") return DistSpec::rademacher();
  if (name == "uniform") return DistSpec::uniform(-1.0, 1.0);
  if (name == "chi_square") return DistSpec::chi_square(1.0);
  throw Error(ErrorCode::BadSpec, "unknown family '" + name + "'");
}

void psi_tail(Builder& b) {
  const auto& cfg = b.cfg();
  const double alpha = b.param<double>("alpha", 1.0);
  const auto base = named_family(b.param<std::string>("family", "exponential"));
  const auto spec = scale_to_unit_psi(base, alpha);
  b.stats()["psi_scale"] = spec.scale;
  const auto rate = RateSequence::log_n();
  PsiNormHypothesis h;
  h.alpha = alpha;
  const auto cert = from_psi_norm(h, rate, grid_range(cfg.n_grid));
  b.cert("psi_tail", cert);

  TailRequest req{cfg.n_grid, cfg.t_grid, cfg.trials, cfg.delta, cfg.seed};
  const auto tail = estimate_tail([&](Rng& rng, double n) { return std::abs(draw(spec, rng)) / cert.size(n); },
                                  [&](double n) { return cert.size(n); }, req, digest(to_json(spec)));
  b.tail("mc", tail, cert);
  try {
    const auto ex = exact_tail([&](double n, double t) { return abs_survival(spec, t * cert.size(n)); }, cfg.n_grid,
                               cfg.t_grid, 0, cfg.delta);
    b.tail("exact", ex, cert);
  } catch (const Error& e) {
    b.note(std::string("no exact survival function: ") + e.what());
  }
}

void subgaussian_l2(Builder& b) {
  const auto& cfg = b.cfg();
  // n indexes the dimension: d_n = n, r_n = d_n.
  const auto dim = SizeSequence::monomial(1.0, 1.0, 0.0);
  const auto rate = RateSequence::linear_n(1.0);
  const auto shape = subgaussian_l2_cert(dim, rate, "hkz_c", 1.0, grid_range(cfg.n_grid));
  b.cert("subgaussian_l2:shape", shape);
  const double sigma = unit_psi2_sigma();
  b.stats()["sigma"] = sigma;

  const auto exact_p = [&](double d, double t) { return chi2_sf(d, d * t * t / (sigma * sigma)); };
  const auto pop = exact_tail(exact_p, cfg.n_grid, cfg.t_grid, 0, cfg.delta);
  const auto fit = fit_constants(shape, pop, FitSearch{});
  b.stats()["fitted_c"] = fit.verdict.fitted.at("hkz_c");
  b.cert("subgaussian_l2:fitted", fit.cert);
  b.tail("exact", pop, fit.cert);

  TailRequest req{cfg.n_grid, cfg.t_grid, cfg.trials, cfg.delta, cfg.seed};
  const auto tail = estimate_tail(
      [&](Rng& rng, double d) { return sigma * std::sqrt(2.0 * rng.gamma(d / 2.0) / d); },
      [&](double n) { return shape.size(n); }, req, "isotropic-gaussian:unit-psi2");
  b.tail("mc", tail, fit.cert);
}

void sample_mean(Builder& b, int alpha) {
  const auto& cfg = b.cfg();
  const auto rate = RateSequence::log_n();
  const auto shape = sample_mean_cert(alpha, rate, "c");
  b.cert("sample_mean:shape", shape);

  std::function<double(Rng&, double)> mean;
  std::string what;
  if (alpha == 1) {
    const auto spec = scale_to_unit_psi(DistSpec::exponential(1.0, true), 1.0);
    const double s = spec.scale;
    b.stats()["psi1_scale"] = s;
    // Sum of n Exp(1) is Gamma(n).
    mean = [s](Rng& rng, double n) { return (rng.gamma(n) - n) / (n * s); };
    what = "centered-exponential:unit-psi1";
  } else {
    const auto family = b.param<std::string>("family", "rademacher");
    if (family == "rademacher") {
      mean = [](Rng& rng, double nd) {
        auto n = static_cast<std::uint64_t>(std::llround(nd));
        std::int64_t ones = 0;
        for (; n >= 64; n -= 64) ones += std::popcount(rng.bits());
        if (n > 0) ones += std::popcount(rng.bits() >> (64 - n));
        return (2.0 * static_cast<double>(ones) - nd) / nd;
      };
      what = "rademacher";
    } else if (family == "gaussian") {
      const double sigma = unit_psi2_sigma();
      mean = [sigma](Rng& rng, double n) { return sigma * rng.normal() / std::sqrt(n); };
      what = "gaussian:unit-psi2";
    } else {
      throw Error(ErrorCode::BadSpec, "sample-mean-a2 family must be rademacher or gaussian");
    }
  }
  TailRequest req{cfg.n_grid, cfg.t_grid, cfg.trials, cfg.delta, cfg.seed};
  const auto tail = estimate_tail([&](Rng& rng, double n) { return std::abs(mean(rng, n)) / shape.size(n); },
                                  [&](double n) { return shape.size(n); }, req, what);
  FitSearch search;
  search.lo = b.param<double>("fit_lo", search.lo);
  search.hi = b.param<double>("fit_hi", search.hi);
  const auto fit = fit_constants(shape, tail, search);
  b.stats()["fitted_c"] = fit.verdict.fitted.at("c");
  b.cert("sample_mean:fitted", fit.cert);
  b.tail("mc", tail, fit.cert);
  b.rate("mc", tail, fit.cert);
}

void finite_max_scenario(Builder& b) {
  const auto& cfg = b.cfg();
  // n is the number of indices; each is a unit-psi_2 Gaussian.
  const double sigma = unit_psi2_sigma();
  const auto rate = RateSequence::log_n();
  const auto member = gaussian_variable_cert(sigma, rate);
  const double kappa = b.param<double>("kappa", 1.0);
  const auto range = grid_range(cfg.n_grid);
  const auto cert = finite_max(UniformCertificate{member, SizeSequence::monomial(1.0, 1.0, 0.0), std::nullopt},
                               kappa, range);
  b.cert("member", member);
  b.cert("finite_max", cert);
  b.stats()["c2"] = cert.c2;

  const auto exact_p = [&](double n, double t) {
    const double p = normal_two_sided_sf(t * std::sqrt(rate(n)) / sigma);
    return -std::expm1(n * std::log1p(-p));
  };
  b.tail("exact", exact_tail(exact_p, cfg.n_grid, cfg.t_grid, 0, cfg.delta), cert);
  double work = 0;
  for (double n : cfg.n_grid) work += n * static_cast<double>(cfg.trials);
  budget(work * 20, "finite-max scenario");
  TailRequest req{cfg.n_grid, cfg.t_grid, cfg.trials, cfg.delta, cfg.seed};
  const auto tail = estimate_tail(
      [&](Rng& rng, double nd) {
        const auto n = static_cast<std::size_t>(std::llround(nd));
        double mx = 0.0;
        for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, std::abs(rng.normal()));
        return sigma * mx / std::sqrt(std::log(nd));
      },
      [&](double n) { return cert.size(n); }, req, "iid-max:unit-psi2-gaussian");
  // A single exceedance far out gives a ucb above any bound that small, so
  // the simulation is compared against the exact law instead of the bound.
  b.unchecked_tail("mc", tail);
  const double level = cfg.delta / static_cast<double>(tail.probes.size());
  std::size_t outside = 0;
  for (const auto& p : tail.probes) {
    const double q = exact_p(p.n, p.t);
    if (q > clopper_pearson_upper(p.exceedances, p.trials, level) ||
        q < clopper_pearson_lower(p.exceedances, p.trials, level))
      ++outside;
  }
  b.stats()["mc_outside_exact_interval"] = outside;
  b.check("mc_matches_exact", outside == 0);
}

// ---------------------------------------------------------------------------
// Suprema over the sphere: quadratic forms of a Gaussian symmetric matrix and
// deviations of a sample covariance.  The certificate goes through a 1/4-net
// of |N| <= 9^d points with M_n = 0, so r_n = d log 9 gives kappa = 1.

struct SphereCell {
  int d = 0;
  double n = 0;
  TailCertificate cert;
  double threshold = 0.0;
  std::optional<Net> net;
};

SphereCell sphere_cell(Builder& b, int d, double n, const TailCertificate& member, const std::string& label,
                       std::size_t cell) {
  const auto& cfg = b.cfg();
  SphereCell c;
  c.d = d;
  c.n = n;
  const double card = std::pow(9.0, d);
  const UniformCertificate u{member, SizeSequence::constant(card), std::nullopt};
  TailCertificate lip;
  lip.size = SizeSequence::constant(0.0);
  lip.rate = member.rate;
  lip.c1 = 1.0;
  lip.c2 = 1.0;
  lip.f = RateFunction::linear(1.0);
  lip.n_threshold = member.n_threshold;
  lip.provenance = make_provenance("assumption:self_bounding", {{"M", 0}});
  const auto range = grid_range({n});
  c.cert = covering_supremum(u, 1.0, lip, SizeSequence::constant(0.25), true, range);
  const double level = b.param<double>("level", 1e-3);
  c.threshold = certified_threshold(c.cert, n, level);
  b.cert(label, c.cert);

  if (d <= b.param<int>("net_max_dim", 3)) {
    NetOptions opt;
    opt.streak_factor = b.param<double>("net_streak", 1e3);
    Net net = build_net(MetricSpaceSpec::sphere(d), 0.25, substream_seed(cfg.seed, 1000000 + cell), opt);
    net.verification = verify_covering(net, b.param<std::uint64_t>("net_probes", 10000),
                                       substream_seed(cfg.seed, 2000000 + cell), 0.05);
    b.nets().push_back(net_header(net));
    b.plot(d, static_cast<double>(net.size()), "net_size");
    b.plot(d, card, "net_bound");
    c.net = std::move(net);
  }
  return c;
}

double max_abs_eig(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double net_max_quadratic(const Net& net, const Eigen::MatrixXd& a) {
  double best = 0.0;
  const int d = net.dim();
  for (std::size_t i = 0; i < net.size(); ++i) {
    Eigen::Map<const Eigen::VectorXd> u(net.point(i), d);
    best = std::max(best, std::abs(u.dot(a * u)));
  }
  return best;
}

void sphere_scenario(Builder& b, bool covariance) {
  const auto& cfg = b.cfg();
  const double min_cov = b.param<double>("min_coverage", 0.999);
  const double max_median_ratio = b.param<double>("max_median_ratio", 30.0);
  std::optional<Eigen::MatrixXd> fixed;
  if (!covariance && cfg.params.contains("matrix")) {
    const auto rows = cfg.params.at("matrix").get<std::vector<std::vector<double>>>();
    const int d = static_cast<int>(rows.size());
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i) {
      if (static_cast<int>(rows[i].size()) != d) throw Error(ErrorCode::InvalidArgument, "matrix must be square");
      for (int j = 0; j < d; ++j) a(i, j) = rows[i][j];
    }
    if (!a.isApprox(a.transpose())) throw Error(ErrorCode::InvalidArgument, "matrix must be symmetric");
    fixed = a;
  }
  const std::vector<int> dims = fixed ? std::vector<int>{static_cast<int>(fixed->rows())} : cfg.dims;
  const double per_dim = b.param<double>("n_per_dim", 0.0);

  json cells = json::array();
  std::size_t cell = 0;
  bool all_sound = true, all_sandwich = true;
  for (int d : dims) {
    if (d < 1 || d > 20) throw Error(ErrorCode::DimensionTooLarge, "eigensolver oracles are limited to d <= 20");
    const std::vector<double> ns = per_dim > 0 ? std::vector<double>{per_dim * d} : cfg.n_grid;
    for (double n : ns) {
      const auto rate = RateSequence::constant(d * std::log(9.0));
      TailCertificate member;
      std::string member_note;
      if (fixed) {
        // |u'Au| <= ||A||_F for every unit u, so the tail is 0 beyond t = 1.
        member.size = SizeSequence::constant(fixed->norm());
        member.rate = rate;
        member.c1 = 1.0;
        member.c2 = 1.0;
        member.f = RateFunction::log();
        member.provenance = make_provenance("assumption:frobenius_bound");
      } else if (covariance) {
        // u'(S - I)u is a mean of n centered chi^2_1 terms; c = 1/8 satisfies
        // the Laurent-Massart bound for r_n <= n.
        member = bind_constants(sample_mean_cert(1, rate, "c"), {{"c", 0.125}});
      } else {
        // u'(W / sqrt(n))u ~ N(0, 1/n) exactly for a GOE matrix W.
        member = gaussian_mean_cert(rate);
      }
      const std::string label = fmt_label(covariance ? "covariance" : "quadratic", d, n);
      auto sc = sphere_cell(b, d, n, member, label, cell);
      budget(static_cast<double>(cfg.trials) * (n * d * d + 10.0 * d * d * d), "sphere scenario");

      std::vector<double> net_vals(cfg.trials, 0.0);
      const std::uint64_t seed = substream_seed(cfg.seed, cell);
      const auto oracle = run_replicates(cfg.trials, seed, [&](Rng& rng, std::size_t i) {
        Eigen::MatrixXd a(d, d);
        if (fixed) {
          a = *fixed;
        } else if (covariance) {
          const auto nn = static_cast<std::size_t>(std::llround(n));
          Eigen::MatrixXd x(nn, d);
          for (std::size_t r = 0; r < nn; ++r)
            for (int k = 0; k < d; ++k) x(r, k) = rng.normal();
          a = (x.transpose() * x) / n;
          a -= Eigen::MatrixXd::Identity(d, d);
        } else {
          for (int r = 0; r < d; ++r) {
            a(r, r) = rng.normal();
            for (int k = r + 1; k < d; ++k) a(r, k) = a(k, r) = rng.normal() * M_SQRT1_2;
          }
          a /= std::sqrt(n);
        }
        if (sc.net) net_vals[i] = net_max_quadratic(*sc.net, a);
        return max_abs_eig(a);
      });

      std::size_t covered = 0, sandwich = 0;
      std::vector<double> ratios, scaled(oracle.size());
      const double y = sc.cert.size(n);
      for (std::size_t i = 0; i < oracle.size(); ++i) {
        covered += oracle[i] <= sc.threshold;
        sandwich += !sc.net || net_vals[i] <= oracle[i] * (1 + 1e-12);
        ratios.push_back(sc.threshold / std::max(oracle[i], 1e-300));
        scaled[i] = y > 0 ? oracle[i] / y : kInf;
      }
      const double coverage = static_cast<double>(covered) / static_cast<double>(oracle.size());
      const double med = median(ratios);
      all_sound = all_sound && coverage >= min_cov && med <= max_median_ratio;
      all_sandwich = all_sandwich && sandwich == oracle.size();
      cells.push_back({{"d", d},
                       {"n", n},
                       {"replicates", oracle.size()},
                       {"threshold", sc.threshold},
                       {"coverage", coverage},
                       {"median_ratio", med},
                       {"median_oracle", median(oracle)},
                       {"net_below_oracle", sandwich}});
      b.plot(n, med, "bound_over_oracle:d=" + std::to_string(d));

      auto probes = probes_from_ratios(scaled, n, y, cfg.t_grid, cfg.delta);
      EmpiricalTail tail;
      tail.probes = std::move(probes);
      tail.sampler_digest = covariance ? "sample-covariance:N(0,I)" : (fixed ? "fixed-matrix" : "goe/sqrt(n)");
      tail.delta = cfg.delta;
      tail.seed = seed;
      try {
        b.tail(label, tail, sc.cert);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoInDomainProbes) throw;
        b.unchecked_tail(label, tail);
        b.note(label + ": no probe reaches the certificate domain");
      }
      ++cell;
    }
  }
  b.stats()["cells"] = cells;
  b.check("bound_covers_oracle", all_sound);
  b.check("net_max_below_oracle", all_sandwich);
}

// ---------------------------------------------------------------------------
// Uniform gradient deviation for the logistic loss with Gaussian designs.

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// E h(sigma |theta| Z) through probabilists' Gauss-Hermite quadrature.
class GaussHermite {
 public:
  explicit GaussHermite(int k) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(k, k);
    for (int i = 1; i < k; ++i) j(i, i - 1) = j(i - 1, i) = std::sqrt(static_cast<double>(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    nodes_.resize(k);
    weights_.resize(k);
    for (int i = 0; i < k; ++i) {
      nodes_[i] = es.eigenvalues()(i);
      weights_[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    }
  }
  template <class F>
  double expect(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(nodes_[i]);
    return s;
  }

 private:
  std::vector<double> nodes_, weights_;
};

struct PopulationGradient {
  double sigma;
  GaussHermite gh{96};

  // g(s) = E l''(sZ), g'(s) = E Z l'''(sZ)
  double g(double s) const {
    return gh.expect([s](double z) {
      const double p = logistic(s * z);
      return p * (1 - p);
    });
  }
  double gp(double s) const {
    return gh.expect([s](double z) {
      const double p = logistic(s * z);
      return z * p * (1 - p) * (1 - 2 * p);
    });
  }
  // grad L(theta) = E X l'(theta'X) = sigma^2 theta g(sigma |theta|) (Stein).
  void grad(const double* th, int d, double* out) const {
    double nrm = 0.0;
    for (int k = 0; k < d; ++k) nrm += th[k] * th[k];
    const double gg = g(sigma * std::sqrt(nrm));
    for (int k = 0; k < d; ++k) out[k] = sigma * sigma * th[k] * gg;
  }
  // Hessian of L applied to v.
  void hess_apply(const double* th, const double* v, int d, double* out) const {
    double nrm2 = 0.0, tv = 0.0;
    for (int k = 0; k < d; ++k) {
      nrm2 += th[k] * th[k];
      tv += th[k] * v[k];
    }
    const double nrm = std::sqrt(nrm2);
    const double s2 = sigma * sigma;
    const double a = s2 * g(sigma * nrm);
    const double c = nrm > 0 ? s2 * sigma * gp(sigma * nrm) / nrm : 0.0;
    for (int k = 0; k < d; ++k) out[k] = a * v[k] + c * tv * th[k];
  }
};

struct GradientData {
  const double* x;  // n x d
  std::size_t n;
  int d;
};

// Delta(theta) = grad Lhat - grad L; returns |Delta| and fills delta (and
// optionally l'' at each sample).
double deviation(const GradientData& g, const PopulationGradient& pop, const double* th, double* delta,
                 std::vector<double>* curv) {
  const int d = g.d;
  std::fill(delta, delta + d, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double* xi = g.x + i * d;
    double z = 0.0;
    for (int k = 0; k < d; ++k) z += xi[k] * th[k];
    const double p = logistic(z);
    for (int k = 0; k < d; ++k) delta[k] += xi[k] * p;
    if (curv) (*curv)[i] = p * (1 - p);
  }
  double popg[8];
  pop.grad(th, d, popg);
  double s = 0.0;
  for (int k = 0; k < d; ++k) {
    delta[k] = delta[k] / static_cast<double>(g.n) - popg[k];
    s += delta[k] * delta[k];
  }
  return std::sqrt(s);
}

void project_ball(double* th, int d, double radius) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) s += th[k] * th[k];
  const double nrm = std::sqrt(s);
  if (nrm > radius) {
    for (int k = 0; k < d; ++k) th[k] *= radius / nrm;
  }
}

// Local ascent of |Delta| from a start point with a fixed geometric step schedule.
double polish(const GradientData& g, const PopulationGradient& pop, const double* start, double radius, double step0,
              int steps) {
  const int d = g.d;
  std::vector<double> curv(g.n);
  double th[8], delta[8], cand[8], cd[8], v[8], hv[8];
  std::copy(start, start + d, th);
  double best = deviation(g, pop, th, delta, &curv);
  const double ratio = steps > 1 ? std::pow(1e-3, 1.0 / (steps - 1)) : 1.0;
  double step = step0;
  for (int s = 0; s < steps; ++s, step *= ratio) {
    // grad |Delta|^2 / 2 = J Delta with J = Hess Lhat - Hess L.
    std::fill(v, v + d, 0.0);
    for (std::size_t i = 0; i < g.n; ++i) {
      const double* xi = g.x + i * d;
      double xd = 0.0;
      for (int k = 0; k < d; ++k) xd += xi[k] * delta[k];
      const double w = xd * curv[i];
      for (int k = 0; k < d; ++k) v[k] += xi[k] * w;
    }
    pop.hess_apply(th, delta, d, hv);
    double nv = 0.0;
    for (int k = 0; k < d; ++k) {
      v[k] = v[k] / static_cast<double>(g.n) - hv[k];
      nv += v[k] * v[k];
    }
    nv = std::sqrt(nv);
    if (!(nv > 0)) break;
    for (int k = 0; k < d; ++k) cand[k] = th[k] + step * v[k] / nv;
    project_ball(cand, d, radius);
    std::vector<double> cc(g.n);
    const double val = deviation(g, pop, cand, cd, &cc);
    if (val > best) {
      best = val;
      std::copy(cand, cand + d, th);
      std::copy(cd, cd + d, delta);
      curv.swap(cc);
    }
  }
  return best;
}

void empirical_gradient(Builder& b) {
  const auto& cfg = b.cfg();
  const double radius = b.param<double>("R", 1.0);
  const int starts = b.param<int>("polish_starts", 3);
  const int steps = b.param<int>("polish_steps", 50);
  const double net_cap = b.param<double>("net_cap", 500.0);
  const double level = b.param<double>("level", 1e-3);
  const double sigma = unit_psi2_sigma();
  const PopulationGradient pop{sigma};
  b.stats()["sigma"] = sigma;
  b.note("grad L is evaluated exactly by Stein's identity and Gauss-Hermite quadrature");
  b.note("the sphere factor of the index set is maximised in closed form: sup over u of <Delta, u> = |Delta|");

  json cells = json::array();
  json per_dim = json::object();
  std::vector<double> medians;
  bool sandwich_ok = true, rates_ok = true;
  std::size_t cell = 0;
  for (int d : cfg.dims) {
    if (d < 1 || d > 8) throw Error(ErrorCode::DimensionTooLarge, "gradient scenario is limited to d <= 8");
    const auto dim = SizeSequence::constant(d);
    const auto rate = RateSequence::dim_log(dim);
    const auto target = SizeSequence::sqrt_rate_over_n(rate);
    const auto range = grid_range(cfg.n_grid);
    for (double n : cfg.n_grid) {
      if (n < 16.0 * d) throw Error(ErrorCode::InvalidArgument, "gradient scenario needs n >= 16 d");
    }
    const auto eps_n = [&](double n) { return 2.0 * std::sqrt((radius * radius + 1.0) * d / n); };

    // Member: mean of n centred terms Y = (u'X) l'(theta'X) with |Y| <= |u'X|.
    // Symmetrising gives E exp(lambda Y) <= exp(2 log 2 sigma^2 lambda^2) for
    // lambda <= 1/(2 sigma); Chernoff then yields a quadratic regime and a
    // linear one (using n >= r_n).
    TailCertificate member;
    member.size = target;
    member.rate = rate;
    member.c1 = 2.0;
    member.c2 = 1.0;
    member.f = RateFunction::min(RateFunction::power(1.0 / (8.0 * std::log(2.0) * sigma * sigma), 2.0),
                                 RateFunction::linear(1.0 / (4.0 * sigma)));
    member.n_threshold = static_cast<std::uint64_t>(16 * d);
    member.provenance = make_provenance("assumption:bounded_slope_gaussian_mean", {{"sigma", sigma}});
    std::map<double, double> card;
    double kappa = 0.0;
    for (double n : cfg.n_grid) {
      const double e = eps_n(n);
      card[n] = MetricSpaceSpec::ball(d, radius).cardinality_bound(e) * MetricSpaceSpec::sphere(d).cardinality_bound(e);
      kappa = std::max(kappa, std::log(card[n]) / rate(n));
    }
    kappa *= 1 + 1e-9;
    // M_n <= (|Shat| + sigma^2) / 4 with Gordon's bound on |Shat|; linear
    // f(t) = t / 7 holds for t >= 2 once n >= 16 d.
    TailCertificate lip;
    lip.size = SizeSequence::constant(1.0);
    lip.rate = RateSequence::linear_n(1.0);
    lip.c1 = 1.0;
    lip.c2 = 2.0;
    lip.f = RateFunction::linear(1.0 / 7.0);
    lip.n_threshold = static_cast<std::uint64_t>(16 * d);
    lip.provenance = make_provenance("assumption:hessian_deviation", {{"sigma", sigma}});
    const auto eps_seq = SizeSequence::monomial(2.0 * std::sqrt((radius * radius + 1.0) * d), -0.5, 0.0);
    const auto cov = covering_supremum(UniformCertificate{member, SizeSequence::custom(card), std::nullopt}, kappa,
                                       lip, eps_seq, true, range);
    double k_dom = 1.0;
    for (double n : cfg.n_grid) k_dom = std::max(k_dom, cov.size(n) / target(n));
    k_dom *= 1 + 1e-9;
    const auto shape = dominate_size(cov, target, k_dom, range);
    b.cert(fmt_label("gradient:shape", d, 0), shape);

    EmpiricalTail tail;
    tail.sampler_digest = "logistic:gaussian-design:unit-psi2";
    tail.delta = cfg.delta;
    tail.seed = cfg.seed;
    std::vector<std::vector<double>> polished_all, net_all;
    for (double n : cfg.n_grid) {
      const auto nn = static_cast<std::size_t>(std::llround(n));
      const double e_net = std::max(eps_n(n), 2.0 * radius / (std::pow(net_cap, 1.0 / d) - 1.0));
      NetOptions opt;
      opt.streak_factor = b.param<double>("net_streak", 200.0);
      const auto net = build_net(MetricSpaceSpec::ball(d, radius), std::min(e_net, 1.99 * radius),
                                 substream_seed(cfg.seed, 1000000 + cell), opt);
      json nh = net_header(net);
      nh["eps_n"] = eps_n(n);
      b.nets().push_back(nh);
      b.plot(n, static_cast<double>(net.size()), "net_size:d=" + std::to_string(d));
      budget(static_cast<double>(cfg.trials) * n * d * (net.size() + 2.0 * starts * steps), "gradient scenario");

      std::vector<double> net_best(cfg.trials);
      const auto polished = run_replicates(cfg.trials, substream_seed(cfg.seed, cell), [&](Rng& rng, std::size_t i) {
        std::vector<double> x(nn * d);
        for (auto& v : x) v = sigma * rng.normal();
        const GradientData gd{x.data(), nn, d};
        double delta[8];
        std::vector<std::pair<double, std::size_t>> vals(net.size());
        for (std::size_t j = 0; j < net.size(); ++j) vals[j] = {deviation(gd, pop, net.point(j), delta, nullptr), j};
        const auto top = std::min<std::size_t>(starts, vals.size());
        std::partial_sort(vals.begin(), vals.begin() + top, vals.end(),
                          [](const auto& a, const auto& c) { return a.first > c.first || (a.first == c.first && a.second < c.second); });
        net_best[i] = vals[0].first;
        double best = vals[0].first;
        for (std::size_t s = 0; s < top; ++s) {
          best = std::max(best, polish(gd, pop, net.point(vals[s].second), radius, e_net, steps));
        }
        return best;
      });
      std::vector<double> ratios(polished.size());
      for (std::size_t i = 0; i < polished.size(); ++i) ratios[i] = polished[i] / target(n);
      auto probes = probes_from_ratios(ratios, n, target(n), cfg.t_grid, cfg.delta);
      tail.probes.insert(tail.probes.end(), probes.begin(), probes.end());
      const double med = median(ratios);
      medians.push_back(med);
      b.plot(n, med, "ratio:d=" + std::to_string(d));
      cells.push_back({{"d", d},
                       {"n", n},
                       {"median_ratio", med},
                       {"median_sup", median(polished)},
                       {"median_net_sup", median(net_best)},
                       {"net_size", net.size()},
                       {"net_eps", net.epsilon}});
      polished_all.push_back(polished);
      net_all.push_back(net_best);
      ++cell;
    }

    json dj = json::object();
    const auto label = fmt_label("gradient", d, 0);
    dj["c2"] = shape.c2;
    if (std::any_of(tail.probes.begin(), tail.probes.end(), [&](const TailProbe& p) { return p.t >= shape.c2; })) {
      b.tail(label, tail, shape);
    } else {
      b.unchecked_tail(label, tail);
      b.note(label + ": the t-grid ends below the certificate threshold C2");
    }
    // Tail profile at the theorem's rate with unit exponent constant; the
    // regression slope then estimates that constant.
    TailCertificate profile = member;
    profile.f = RateFunction::power(1.0, 2.0);
    profile.provenance = make_provenance("profile:quadratic", {});
    b.cert(fmt_label("gradient:profile", d, 0), profile);
    b.rate(label, tail, profile);
    const auto& rr = b.diagnostics()["rate:" + label];
    if (rr.contains("slope")) dj["profile_c"] = rr["slope"];
    rates_ok = rates_ok && rr.contains("slope") && rr["slope"].get<double>() > 0 && rr["r2"].get<double>() >= 0.8;
    std::size_t ok = 0, total = 0;
    for (std::size_t j = 0; j < cfg.n_grid.size(); ++j) {
      const double thr = certified_threshold(shape, cfg.n_grid[j], level);
      for (std::size_t i = 0; i < polished_all[j].size(); ++i) {
        ok += net_all[j][i] <= polished_all[j][i] && polished_all[j][i] <= thr;
        ++total;
      }
    }
    dj["sandwich_holds"] = ok;
    dj["replicates"] = total;
    sandwich_ok = sandwich_ok && ok == total;
    per_dim[std::to_string(d)] = dj;
  }
  const double spread = medians.empty() ? kInf
                                        : *std::max_element(medians.begin(), medians.end()) /
                                              *std::min_element(medians.begin(), medians.end());
  b.stats()["cells"] = cells;
  b.stats()["per_dim"] = per_dim;
  b.stats()["median_ratio_spread"] = spread;
  b.check("median_ratio_spread", spread <= b.param<double>("max_spread", 4.0));
  b.check("rate_diagnostics", rates_ok);
  b.check("sandwich", sandwich_ok);
}

// ---------------------------------------------------------------------------

struct Entry {
  std::function<void(Builder&)> run;
  std::function<ScenarioConfig()> defaults;
};

ScenarioConfig base_config(const std::string& name, std::vector<double> ns, std::vector<double> ts,
                           std::uint64_t trials) {
  ScenarioConfig c;
  c.scenario = name;
  c.n_grid = std::move(ns);
  c.t_grid = std::move(ts);
  c.trials = trials;
  return c;
}

const std::map<std::string, Entry>& registry() {
  static const std::map<std::string, Entry> r = [] {
    std::map<std::string, Entry> m;
    m["gaussian-mean"] = {gaussian_mean, [] { return base_config("gaussian-mean", {1e2, 1e3, 1e4}, linspace(1, 6, 21), 1000000); }};
    m["lp-norm"] = {[](Builder& b) { norm_scenario(b, false); },
                    [] { return base_config("lp-norm", {1e2, 1e3}, geometric_grid(0.25, 4.0, 17), 10000); }};
    m["linf-norm"] = {[](Builder& b) { norm_scenario(b, true); },
                      [] { return base_config("linf-norm", {1e2, 1e3}, geometric_grid(0.1, 4.0, 17), 10000); }};
    m["psi-tail"] = {psi_tail, [] {
                       auto c = base_config("psi-tail", {1e2, 1e3, 1e4}, geometric_grid(0.25, 4.0, 17), 100000);
                       c.params = {{"family", "exponential"}, {"alpha", 1.0}};
                       return c;
                     }};
    m["subgaussian-l2"] = {subgaussian_l2,
                           [] { return base_config("subgaussian-l2", {2, 8, 32, 128}, geometric_grid(0.25, 6.0, 19), 100000); }};
    m["sample-mean-a1"] = {[](Builder& b) { sample_mean(b, 1); },
                           [] { return base_config("sample-mean-a1", {1e2, 1e3, 1e4}, geometric_grid(1.0, 4.0, 13), 100000); }};
    m["sample-mean-a2"] = {[](Builder& b) { sample_mean(b, 2); }, [] {
                             auto c = base_config("sample-mean-a2", {1e2, 1e3, 1e4}, geometric_grid(1.0, 4.0, 13), 100000);
                             c.params = {{"family", "rademacher"}};
                             return c;
                           }};
    m["finite-max"] = {finite_max_scenario,
                       [] { return base_config("finite-max", {10, 1000}, linspace(1, 8, 29), 100000); }};
    m["quadratic-form-sup"] = {[](Builder& b) { sphere_scenario(b, false); }, [] {
                                 auto c = base_config("quadratic-form-sup", {100, 1000}, geometric_grid(0.5, 64, 15), 1000);
                                 c.dims = {2, 3, 5};
                                 return c;
                               }};
    m["covariance-opnorm"] = {[](Builder& b) { sphere_scenario(b, true); }, [] {
                                auto c = base_config("covariance-opnorm", {}, geometric_grid(0.5, 64, 15), 1000);
                                c.dims = {5, 10, 20};
                                c.params = {{"n_per_dim", 100}};
                                return c;
                              }};
    m["empirical-gradient"] = {empirical_gradient, [] {
                                 auto c = base_config("empirical-gradient", {128, 512, 2048, 8192},
                                                      geometric_grid(0.2, 64.0, 51), 500);
                                 c.dims = {2, 4, 8};
                                 c.params = {{"R", 1.0}};
                                 return c;
                               }};
    return m;
  }();
  return r;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : registry()) v.push_back(k);
    return v;
  }();
  return names;
}

ScenarioConfig default_config(const std::string& scenario) {
  const auto& r = registry();
  auto it = r.find(scenario);
  if (it == r.end()) throw Error(ErrorCode::ScenarioUnknown, "unknown scenario '" + scenario + "'");
  return it->second.defaults();
}

ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object() || !j.contains("scenario")) throw Error(ErrorCode::ParseError, "config needs a 'scenario' field");
  ScenarioConfig c = default_config(j.at("scenario").get<std::string>());
  try {
    if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<double>>();
    if (j.contains("t_grid")) c.t_grid = j.at("t_grid").get<std::vector<double>>();
    if (j.contains("dims")) c.dims = j.at("dims").get<std::vector<int>>();
    if (j.contains("trials")) c.trials = j.at("trials").get<std::uint64_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("delta")) c.delta = j.at("delta").get<double>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("params")) c.params.update(j.at("params"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad config: ") + e.what());
  }
  return c;
}

json to_json(const ScenarioConfig& c) {
  return {{"scenario", c.scenario}, {"n_grid", c.n_grid}, {"t_grid", c.t_grid}, {"dims", c.dims},
          {"trials", c.trials},     {"seed", c.seed},     {"delta", c.delta},   {"out", c.out},
          {"params", c.params}};
}

ExperimentReport run_scenario(const ScenarioConfig& config) {
  const auto& r = registry();
  auto it = r.find(config.scenario);
  if (it == r.end()) throw Error(ErrorCode::ScenarioUnknown, "unknown scenario '" + config.scenario + "'");
  if (config.t_grid.empty()) throw Error(ErrorCode::BadGrid, "t-grid must be non-empty");
  if (config.n_grid.empty() && !config.params.contains("n_per_dim")) throw Error(ErrorCode::BadGrid, "n-grid must be non-empty");
  if (config.trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be positive");

  const auto start = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.config = config;
  rep.workers = worker_count();
  Builder b(config, rep);
  it->second.run(b);
  rep.pass = true;
  for (const auto& t : rep.tails) rep.pass = rep.pass && (!t.verdict || t.verdict->pass);
  for (const auto& [_, ok] : rep.checks) rep.pass = rep.pass && ok;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace tailcert
