#pragma once

// Random discrete instances with certificates that are exactly valid by
// construction, and exact tails of the combined variables.  Shared by the
// algebra unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "tailcert/algebra.hpp"
#include "tailcert/rng.hpp"

namespace soundness {

using namespace tailcert;

struct Atoms {
  std::vector<double> v, p;

  // P(|X| >= s); the comparison is relaxed by one part in 1e12 so that
  // rounding can only make the tail larger.
  double tail(double s) const {
    double q = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (std::abs(v[i]) >= s * (1 - 1e-12)) q += p[i];
    return std::min(q, 1.0);
  }
};

struct Instance {
  Atoms x;
  double y = 1.0;
  TailCertificate cert;
};

inline Atoms random_atoms(Rng& rng, int max_atoms) {
  Atoms a;
  const int k = 1 + static_cast<int>(rng.uniform() * max_atoms);
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    a.v.push_back((rng.uniform() < 0.5 ? -1.0 : 1.0) * std::exp(4.0 * rng.uniform() - 2.0));
    a.p.push_back(0.05 + rng.uniform());
    total += a.p.back();
  }
  for (auto& q : a.p) q /= total;
  return a;
}

inline RateFunction random_f(Rng& rng, double& c2) {
  const double c = std::exp(2.0 * rng.uniform() - 1.0);
  switch (static_cast<int>(rng.uniform() * 4)) {
    case 0:
      c2 = M_E * (1 + rng.uniform());
      return RateFunction::log();
    case 1:
      c2 = 0.5 + 2.5 * rng.uniform();
      return RateFunction::linear(c);
    case 2:
      c2 = 0.5 + 2.5 * rng.uniform();
      return RateFunction::power(c, 2.0);
    default:
      c2 = 0.5 + 2.5 * rng.uniform();
      return RateFunction::linear_capped(Param::number(c));
  }
}

// Smallest C1 making the certificate valid for (X, y) at rate r: the tail is
// a step function, so the supremum of P(t) e^{r f(t)} over t >= C2 sits at C2
// or at an atom ratio.
inline double tight_c1(const Atoms& x, double y, double r, const RateFunction& f, double c2) {
  // Zero tails are skipped: 0 * exp(huge) would be NaN.
  auto term = [&](double s, double t) {
    const double q = x.tail(s);
    return q > 0 ? q * std::exp(r * f(t)) : 0.0;
  };
  double c1 = term(c2 * y, c2);
  for (double v : x.v) {
    const double t = std::abs(v) / y;
    if (t >= c2) c1 = std::max(c1, term(std::abs(v), t));
  }
  return std::max(c1 * (1 + 1e-9), 1e-12);
}

// Redraws until C1 is finite: steep f with far atoms can overflow it.
inline Instance random_instance(Rng& rng, int max_atoms = 12) {
  Instance in;
  do {
    in = Instance{};
    in.x = random_atoms(rng, max_atoms);
    in.y = std::exp(2.0 * rng.uniform() - 1.0);
    const double r = 0.5 + 4.5 * rng.uniform();
    double c2 = 1.0;
    const auto f = random_f(rng, c2);
    in.cert.size = SizeSequence::constant(in.y);
    in.cert.rate = RateSequence::constant(r);
    in.cert.c2 = c2;
    in.cert.f = f;
    in.cert.c1 = tight_c1(in.x, in.y, r, f, c2);
  } while (!std::isfinite(in.cert.c1));
  return in;
}

inline Atoms combine(const Atoms& a, const Atoms& b, bool product) {
  Atoms out;
  for (std::size_t i = 0; i < a.v.size(); ++i)
    for (std::size_t j = 0; j < b.v.size(); ++j) {
      out.v.push_back(product ? a.v[i] * b.v[j] : a.v[i] + b.v[j]);
      out.p.push_back(a.p[i] * b.p[j]);
    }
  return out;
}

struct Outcome {
  std::size_t points = 0;
  std::size_t violations = 0;
  std::string first;
};

// Compares the bound of `cert` at n against the exact tail on t = C2 1.1^k.
template <class Tail>
void compare(const TailCertificate& cert, double n, Tail&& exact, const std::string& what, Outcome& out) {
  for (int k = 0; k <= 30; ++k) {
    const double t = cert.c2 * std::pow(1.1, k);
    if (!cert.in_domain(n, t)) continue;
    const double p = exact(t);
    const double b = eval_bound(cert, n, t);
    ++out.points;
    if (p > b) {
      if (out.violations++ == 0)
        out.first = what + ": t=" + std::to_string(t) + " exact=" + std::to_string(p) + " bound=" + std::to_string(b);
    }
  }
}

// One round of all five combinators on fresh random instances.
inline void run_round(Rng& rng, Outcome& out) {
  const auto a = random_instance(rng), b = random_instance(rng);

  {
    const auto c = add(a.cert, b.cert);
    const auto s = combine(a.x, b.x, false);
    compare(c, 1.0, [&](double t) { return s.tail(t * (a.y + b.y)); }, "add", out);
  }
  {
    const auto c = multiply(a.cert, b.cert);
    const auto s = combine(a.x, b.x, true);
    compare(c, 1.0, [&](double t) { return s.tail(t * a.y * b.y); }, "multiply", out);
  }
  {
    const double alpha = std::exp(std::log(0.25) + rng.uniform() * std::log(16.0));
    const auto c = power_transform(a.cert, alpha);
    Atoms s = a.x;
    for (auto& v : s.v) v = std::pow(std::abs(v), alpha);
    compare(c, 1.0, [&](double t) { return s.tail(t * std::pow(a.y, alpha)); }, "power_transform", out);
  }
  {
    // X equals Xhat except on an independent event of probability p_n = e^{-n},
    // where it jumps to a huge value.
    std::map<double, double> p;
    for (int n = 1; n <= 400; ++n) p[n] = std::exp(-static_cast<double>(n));
    const DominationEvidence dom{SizeSequence::custom(p), a.cert.rate};
    const auto c = truncate(a.cert, dom, {400});
    for (int n = 1; n <= 400; n += 7) {
      const double pn = p[n];
      compare(c, n, [&](double t) { return (1 - pn) * a.x.tail(t * a.y) + pn; }, "truncate", out);
    }
  }
  {
    const int m = 2 + static_cast<int>(rng.uniform() * 60);
    const double r = a.cert.rate(1.0);
    const double kappa = std::log(static_cast<double>(m)) / r;
    const auto c = finite_max(UniformCertificate{a.cert, SizeSequence::constant(m), std::nullopt}, kappa);
    compare(c, 1.0, [&](double t) { return 1.0 - std::pow(1.0 - a.x.tail(t * a.y), m); }, "finite_max", out);
  }
}

}  // namespace soundness
