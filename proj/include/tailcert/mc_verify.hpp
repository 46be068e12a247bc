#pragma once

// Monte-Carlo estimates of P(|X_n| >= t |Y_n|) and their comparison with
// certified bounds.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tailcert/certificate.hpp"
#include "tailcert/rng.hpp"

namespace tailcert {

struct TailProbe {
  double n = 0.0;
  double t = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t exceedances = 0;
  double ucb = 1.0;
  double size_value = 1.0;
};

struct EmpiricalTail {
  std::vector<TailProbe> probes;  // n-major, t ascending within each n
  std::string sampler_digest;
  bool joint = false;
  double delta = 0.01;
  std::uint64_t seed = 0;
};

/// One replicate of |X_n| / y_n at the given n.  Must return +inf when
/// y_n = 0, never NaN.
using RatioSampler = std::function<double(Rng&, double n)>;

struct TailRequest {
  std::vector<double> n_grid;
  std::vector<double> t_grid;  // ascending
  std::uint64_t trials = 100000;
  double delta = 0.01;
  std::uint64_t seed = 0;
};

/// Replicates for the j-th n come from the substreams of substream_seed(seed, j)
/// and are shared across the whole t-grid.
EmpiricalTail estimate_tail(const RatioSampler& sampler, const std::function<double(double)>& size,
                            const TailRequest& req, std::string sampler_digest, bool joint = false);

/// Counts from the raw ratios of one n (used when a scenario produces the
/// ratios itself).
std::vector<TailProbe> probes_from_ratios(const std::vector<double>& ratios, double n, double size_value,
                                          const std::vector<double>& t_grid, double delta);

/// Probe set as a perfect sample would produce it: k = round(m p(n, t)).
/// With trials = 0 the probes carry the probability itself as ucb.
EmpiricalTail exact_tail(const std::function<double(double, double)>& prob, const std::vector<double>& n_grid,
                         const std::vector<double>& t_grid, std::uint64_t trials, double delta);

enum class ProbeStatus { Checked, Skipped, Unresolved };

struct ProbeCheck {
  ProbeStatus status = ProbeStatus::Checked;
  double bound = 0.0;  // NaN when skipped
  double slack = 0.0;  // log(bound) - log(ucb); NaN unless checked
};

struct Verdict {
  bool pass = false;
  double worst_slack = 0.0;  // +inf when nothing could be checked
  std::optional<TailProbe> witness;
  Bindings fitted;
  std::vector<ProbeCheck> checks;  // parallel to tail.probes
  std::size_t checked = 0, skipped = 0, unresolved = 0;
};

/// Probes outside the certificate domain are skipped.  A probe with no
/// exceedance whose bound lies below the zero-count limit 1 - delta^(1/m)
/// cannot be decided at that sample size and is marked unresolved.
Verdict check_certificate(const TailCertificate& cert, const EmpiricalTail& tail);

struct FitSearch {
  double lo = 1e-3;
  double hi = 1e3;
  int per_decade = 64;
};

struct FitResult {
  TailCertificate cert;
  Verdict verdict;
};

/// Largest passing assignment of the symbolic exponent constants on a
/// log-grid (lexicographic in the sorted symbol names); ties go to the
/// larger worst slack.
FitResult fit_constants(const TailCertificate& shape, const EmpiricalTail& tail, const FitSearch& search = {});

/// y_n * t* where t* >= C2 is the first t with C1 exp(-r_n f(t)) <= level:
/// P(|X_n| >= threshold) <= level.  +inf when t* passes the ceiling.
double certified_threshold(const TailCertificate& cert, double n, double level);

struct RateRecord {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
  std::vector<double> x, y;  // r_n f(t) and -log(k/m) of the used probes
};

/// OLS of -log(k/m) on r_n f(t) over probes with k >= min_exceedances.
RateRecord rate_diagnostic(const EmpiricalTail& tail, const TailCertificate& cert,
                           std::uint64_t min_exceedances = 10);

struct LittleORecord {
  std::vector<double> ns;
  std::vector<double> values;  // r_n^{-1} log ucb, -inf when k = 0
  bool decreasing = false;
  bool below_threshold = false;
  bool diverging = false;
  double threshold = -1.0;
};

LittleORecord little_o_diagnostic(const EmpiricalTail& tail, double c, const RateSequence& rate,
                                  double threshold = -1.0);

json to_json(const TailProbe& p);
json to_json(const EmpiricalTail& tail);
json to_json(const Verdict& v);
json to_json(const RateRecord& r);
json to_json(const LittleORecord& r);

/// Columns n,t,m,k,ucb,bound,slack; bound and slack empty for skipped probes.
std::string tail_to_csv(const EmpiricalTail& tail, const Verdict* verdict = nullptr);

}  // namespace tailcert
