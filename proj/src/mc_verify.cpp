#include "tailcert/mc_verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "tailcert/algebra.hpp"
#include "tailcert/error.hpp"
#include "tailcert/kernels.hpp"
#include "tailcert/special.hpp"

namespace tailcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_grids(const std::vector<double>& n_grid, const std::vector<double>& t_grid) {
  if (n_grid.empty() || t_grid.empty()) throw Error(ErrorCode::BadGrid, "probe grids must be non-empty");
  if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw Error(ErrorCode::BadGrid, "t-grid must be ascending");
  for (double t : t_grid) {
    if (!(t > 0) || !std::isfinite(t)) throw Error(ErrorCode::BadGrid, "t-grid entries must be positive");
  }
  for (double n : n_grid) {
    if (!(n >= 1) || !std::isfinite(n)) throw Error(ErrorCode::BadGrid, "n-grid entries must be >= 1");
  }
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

std::vector<TailProbe> probes_from_ratios(const std::vector<double>& ratios, double n, double size_value,
                                          const std::vector<double>& t_grid, double delta) {
  const auto counts = count_at_least(ratios, t_grid);
  std::vector<TailProbe> out;
  out.reserve(t_grid.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    TailProbe p;
    p.n = n;
    p.t = t_grid[j];
    p.trials = ratios.size();
    p.exceedances = counts[j];
    p.ucb = clopper_pearson_upper(p.exceedances, p.trials, delta);
    p.size_value = size_value;
    out.push_back(p);
  }
  return out;
}

EmpiricalTail estimate_tail(const RatioSampler& sampler, const std::function<double(double)>& size,
                            const TailRequest& req, std::string sampler_digest, bool joint) {
  check_grids(req.n_grid, req.t_grid);
  if (req.trials < 1) throw Error(ErrorCode::InvalidArgument, "need at least one trial");
  if (!(req.delta > 0 && req.delta < 1)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
  EmpiricalTail tail;
  tail.sampler_digest = std::move(sampler_digest);
  tail.joint = joint;
  tail.delta = req.delta;
  tail.seed = req.seed;
  for (std::size_t j = 0; j < req.n_grid.size(); ++j) {
    const double n = req.n_grid[j];
    const auto ratios = run_replicates(req.trials, substream_seed(req.seed, j),
                                       [&](Rng& rng, std::size_t) { return sampler(rng, n); });
    auto probes = probes_from_ratios(ratios, n, size(n), req.t_grid, req.delta);
    tail.probes.insert(tail.probes.end(), probes.begin(), probes.end());
  }
  return tail;
}

EmpiricalTail exact_tail(const std::function<double(double, double)>& prob, const std::vector<double>& n_grid,
                         const std::vector<double>& t_grid, std::uint64_t trials, double delta) {
  check_grids(n_grid, t_grid);
  EmpiricalTail tail;
  tail.sampler_digest = "exact";
  tail.delta = delta;
  for (double n : n_grid) {
    for (double t : t_grid) {
      TailProbe p;
      p.n = n;
      p.t = t;
      p.trials = trials;
      const double pr = std::clamp(prob(n, t), 0.0, 1.0);
      if (trials == 0) {
        p.ucb = pr;
      } else {
        p.exceedances = static_cast<std::uint64_t>(std::llround(pr * static_cast<double>(trials)));
        p.ucb = clopper_pearson_upper(p.exceedances, trials, delta);
      }
      tail.probes.push_back(p);
    }
  }
  return tail;
}

Verdict check_certificate(const TailCertificate& cert, const EmpiricalTail& tail) {
  if (!cert.concrete()) throw Error(ErrorCode::SymbolicConstants, "certificate still has symbolic constants");
  Verdict v;
  v.worst_slack = kInf;
  v.checks.resize(tail.probes.size());
  std::size_t worst = tail.probes.size();
  for (std::size_t i = 0; i < tail.probes.size(); ++i) {
    const auto& p = tail.probes[i];
    auto& c = v.checks[i];
    if (!cert.in_domain(p.n, p.t)) {
      c = {ProbeStatus::Skipped, kNaN, kNaN};
      ++v.skipped;
      continue;
    }
    c.bound = eval_bound(cert, p.n, p.t);
    if (p.trials > 0 && p.exceedances == 0 && c.bound < p.ucb) {
      c.status = ProbeStatus::Unresolved;
      c.slack = kNaN;
      ++v.unresolved;
      continue;
    }
    c.slack = std::log(c.bound) - std::log(p.ucb);
    ++v.checked;
    if (c.slack < v.worst_slack) {
      v.worst_slack = c.slack;
      worst = i;
    }
  }
  if (v.checked + v.unresolved == 0) throw Error(ErrorCode::NoInDomainProbes, "no probe lies in the certificate domain");
  v.pass = v.worst_slack >= 0.0;
  if (worst < tail.probes.size()) v.witness = tail.probes[worst];
  return v;
}

FitResult fit_constants(const TailCertificate& shape, const EmpiricalTail& tail, const FitSearch& search) {
  const auto symbols = shape.unknown_constants();
  if (symbols.empty()) {
    auto v = check_certificate(shape, tail);
    if (!v.pass) throw Error(ErrorCode::Unsatisfiable, "certificate without free constants fails");
    return {shape, v};
  }
  if (!(search.lo > 0) || !(search.hi > search.lo) || search.per_decade < 1) {
    throw Error(ErrorCode::InvalidArgument, "bad fit search box");
  }
  const int points =
      static_cast<int>(std::llround(std::log10(search.hi / search.lo) * search.per_decade)) + 1;
  const auto grid = geometric_grid(search.lo, search.hi, std::max(points, 2));
  const std::vector<std::string> names(symbols.begin(), symbols.end());

  std::optional<FitResult> best;
  std::vector<std::size_t> idx(names.size(), 0);
  for (;;) {
    Bindings b;
    for (std::size_t s = 0; s < names.size(); ++s) b[names[s]] = grid[idx[s]];
    try {
      auto cert = bind_constants(shape, b);
      auto v = check_certificate(cert, tail);
      if (v.pass) {
        // idx runs in increasing lexicographic order, so a later pass is a
        // larger assignment.
        v.fitted = b;
        best = FitResult{std::move(cert), std::move(v)};
      }
    } catch (const Error&) {
      // not admissible at this assignment
    }
    std::size_t s = names.size();
    while (s > 0) {
      --s;
      if (++idx[s] < grid.size()) break;
      idx[s] = 0;
      if (s == 0) {
        s = names.size() + 1;
        break;
      }
    }
    if (s == names.size() + 1) break;
  }
  if (!best) throw Error(ErrorCode::Unsatisfiable, "no grid assignment passes");
  return *best;
}

double certified_threshold(const TailCertificate& cert, double n, double level) {
  if (!cert.concrete()) throw Error(ErrorCode::SymbolicConstants, "certificate still has symbolic constants");
  if (!(level > 0 && level < 1)) throw Error(ErrorCode::InvalidArgument, "level must lie in (0, 1)");
  const double r = cert.rate(n);
  double t = cert.c2;
  if (cert.c1 * std::exp(-r * cert.f(t)) > level) {
    auto hit = first_reaching(cert.f, std::log(cert.c1 / level) / r, cert.c2, cert.c2 * 1e15);
    if (!hit) return kInf;
    t = *hit;
  }
  if (t > cert.t_max(n)) return kInf;
  return t * cert.size(n);
}

RateRecord rate_diagnostic(const EmpiricalTail& tail, const TailCertificate& cert, std::uint64_t min_exceedances) {
  if (!cert.f.is_concrete()) throw Error(ErrorCode::SymbolicConstants, "rate diagnostic needs a concrete f");
  RateRecord r;
  std::set<double> ns;
  for (const auto& p : tail.probes) {
    if (p.trials == 0 || p.exceedances < min_exceedances || p.exceedances == 0) continue;
    r.x.push_back(cert.rate(p.n) * cert.f(p.t));
    r.y.push_back(-std::log(static_cast<double>(p.exceedances) / static_cast<double>(p.trials)));
    ns.insert(p.n);
  }
  r.points = r.x.size();
  if (ns.size() < 3) {
    throw Error(ErrorCode::InsufficientExceedances,
                "need probes with enough exceedances at three or more n-values");
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < r.points; ++i) {
    mx += r.x[i];
    my += r.y[i];
  }
  mx /= r.points;
  my /= r.points;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < r.points; ++i) {
    sxx += (r.x[i] - mx) * (r.x[i] - mx);
    sxy += (r.x[i] - mx) * (r.y[i] - my);
    syy += (r.y[i] - my) * (r.y[i] - my);
  }
  if (sxx <= 0) throw Error(ErrorCode::InsufficientExceedances, "regressor is constant");
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  r.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return r;
}

LittleORecord little_o_diagnostic(const EmpiricalTail& tail, double c, const RateSequence& rate, double threshold) {
  LittleORecord r;
  r.threshold = threshold;
  for (const auto& p : tail.probes) {
    if (std::abs(p.t - c) > 1e-9 * std::max(1.0, c)) continue;
    r.ns.push_back(p.n);
    const bool zero = p.trials > 0 ? p.exceedances == 0 : p.ucb == 0.0;
    r.values.push_back(zero ? -kInf : std::log(p.ucb) / rate(p.n));
  }
  if (r.values.empty()) return r;
  r.decreasing = true;
  for (std::size_t i = 1; i < r.values.size(); ++i) r.decreasing = r.decreasing && r.values[i] <= r.values[i - 1];
  r.below_threshold = r.values.back() < threshold;
  r.diverging = r.decreasing && r.below_threshold;
  return r;
}

json to_json(const TailProbe& p) {
  return {{"n", p.n}, {"t", p.t}, {"m", p.trials}, {"k", p.exceedances}, {"ucb", p.ucb}, {"size_value", p.size_value}};
}

json to_json(const EmpiricalTail& tail) {
  json probes = json::array();
  for (const auto& p : tail.probes) probes.push_back(to_json(p));
  return {{"probes", probes},
          {"sampler_digest", tail.sampler_digest},
          {"joint", tail.joint},
          {"delta", tail.delta},
          {"seed", tail.seed}};
}

json to_json(const Verdict& v) {
  json j{{"pass", v.pass},
         {"worst_slack", num(v.worst_slack)},
         {"checked", v.checked},
         {"skipped", v.skipped},
         {"unresolved", v.unresolved}};
  if (v.witness) j["witness"] = to_json(*v.witness);
  if (!v.fitted.empty()) j["fitted"] = v.fitted;
  return j;
}

json to_json(const RateRecord& r) {
  return {{"slope", r.slope}, {"intercept", r.intercept}, {"r2", r.r2}, {"points", r.points}};
}

json to_json(const LittleORecord& r) {
  json vals = json::array();
  for (double v : r.values) vals.push_back(num(v));
  return {{"n", r.ns},
          {"values", vals},
          {"decreasing", r.decreasing},
          {"below_threshold", r.below_threshold},
          {"diverging", r.diverging},
          {"threshold", r.threshold}};
}

std::string tail_to_csv(const EmpiricalTail& tail, const Verdict* verdict) {
  std::string out = "n,t,m,k,ucb,bound,slack\n";
  for (std::size_t i = 0; i < tail.probes.size(); ++i) {
    const auto& p = tail.probes[i];
    double bound = kNaN, slack = kNaN;
    if (verdict && i < verdict->checks.size()) {
      bound = verdict->checks[i].bound;
      slack = verdict->checks[i].slack;
    }
    out += fmt(p.n) + "," + fmt(p.t) + "," + std::to_string(p.trials) + "," + std::to_string(p.exceedances) + "," +
           fmt(p.ucb) + "," + fmt(bound) + "," + fmt(slack) + "\n";
  }
  return out;
}

}  // namespace tailcert
