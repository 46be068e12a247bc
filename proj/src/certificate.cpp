#include "tailcert/certificate.hpp"

#include <cmath>
#include <limits>

#include "tailcert/error.hpp"

namespace tailcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidCertificate, what);
}

// Evaluates s at n, or nullopt when n is off a tabulated grid.
template <class Seq>
std::optional<double> try_eval(const Seq& s, double n) {
  try {
    return s(n);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::OutOfDomain) return std::nullopt;
    throw;
  }
}

}  // namespace

std::string to_string(Flavor f) { return f == Flavor::O ? "O" : "OHat"; }

Flavor flavor_from_string(const std::string& s) {
  if (s == "O") return Flavor::O;
  if (s == "OHat") return Flavor::OHat;
  throw Error(ErrorCode::ParseError, "unknown flavor '" + s + "'");
}

std::set<std::string> TailCertificate::unknown_constants() const {
  std::set<std::string> out;
  f.collect_symbols(out);
  return out;
}

double TailCertificate::t_max(double n) const {
  if (flavor == Flavor::O || !ceiling) return kInf;
  return (*ceiling)(n);
}

bool TailCertificate::in_domain(double n, double t) const {
  if (n < static_cast<double>(n_threshold)) return false;
  if (t < c2 * (1.0 - 1e-12)) return false;
  return t <= t_max(n) * (1.0 + 1e-12);
}

std::shared_ptr<const Provenance> make_provenance(std::string op, json params,
                                                  std::vector<TailCertificate> children,
                                                  std::vector<std::string> notes) {
  auto p = std::make_shared<Provenance>();
  p->op = std::move(op);
  p->params = std::move(params);
  p->children = std::move(children);
  p->notes = std::move(notes);
  return p;
}

TailCertificate with_note(const TailCertificate& cert, std::string note) {
  auto p = cert.provenance ? std::make_shared<Provenance>(*cert.provenance)
                           : std::make_shared<Provenance>(Provenance{"given", json::object(), {}, {}});
  p->notes.push_back(std::move(note));
  TailCertificate out = cert;
  out.provenance = std::move(p);
  return out;
}

EvalRange EvalRange::geometric(double lo, double hi, int count) {
  return EvalRange{geometric_grid(lo, hi, count)};
}

void validate(const TailCertificate& cert, const EvalRange& range) {
  require(std::isfinite(cert.c1) && cert.c1 > 0, "C1 must be positive");
  require(cert.n_threshold >= 1, "N must be at least 1");
  require(cert.flavor == Flavor::OHat || !cert.ceiling, "flavor O carries no ceiling");
  require(cert.flavor == Flavor::O || cert.ceiling.has_value(), "flavor OHat needs a ceiling");

  if (cert.f.is_concrete()) {
    require(std::isfinite(cert.c2) && cert.c2 > 0, "C2 must be positive");
    require(cert.f(cert.c2) > 0, "f must be positive at C2");
    require(is_non_decreasing(cert.f, cert.c2, cert.c2 * 1e6), "f must be non-decreasing");
    require(divergence_threshold(cert.f, 100.0, cert.c2).has_value(), "f must diverge");
  } else {
    require(std::isnan(cert.c2) || cert.c2 > 0, "C2 must be positive");
  }

  std::optional<double> first_ceiling, last_ceiling;
  for (double n : range.ns) {
    if (n < static_cast<double>(cert.n_threshold)) continue;
    if (auto r = try_eval(cert.rate, n)) require(*r > 0, "r_n must be positive");
    if (auto y = try_eval(cert.size, n)) require(std::isfinite(*y) && *y >= 0, "y_n must be >= 0");
    if (cert.ceiling) {
      if (auto c = try_eval(*cert.ceiling, n)) {
        if (!first_ceiling) first_ceiling = c;
        last_ceiling = c;
      }
    }
  }
  if (first_ceiling && last_ceiling) {
    require(*last_ceiling >= *first_ceiling, "ceiling R_n must grow with n");
    if (std::isfinite(cert.c2)) require(*last_ceiling > cert.c2, "ceiling R_n must exceed C2");
  }
}

double eval_bound(const TailCertificate& cert, double n, double t) {
  if (!cert.concrete()) {
    std::string names;
    for (const auto& s : cert.unknown_constants()) names += (names.empty() ? "" : ", ") + s;
    throw Error(ErrorCode::SymbolicConstants, "unfitted constants: " + names);
  }
  if (n < static_cast<double>(cert.n_threshold)) {
    throw Error(ErrorCode::OutOfDomain, "n below validity threshold N");
  }
  if (t < cert.c2 * (1.0 - 1e-12)) throw Error(ErrorCode::OutOfDomain, "t below C2");
  if (t > cert.t_max(n) * (1.0 + 1e-12)) throw Error(ErrorCode::OutOfDomain, "t above ceiling R_n");
  return cert.c1 * std::exp(-cert.rate(n) * cert.f(t));
}

void validate(const LowerTailCertificate& cert) {
  require(std::isfinite(cert.c1) && cert.c1 > 0, "C1 must be positive");
  require(std::isfinite(cert.c2) && cert.c2 > 0, "C2 must be positive");
  require(cert.n_threshold >= 1, "N must be at least 1");
  require(cert.h.is_concrete(), "lower-tail rate function must be concrete");
  require(cert.g(cert.c2) > 0, "g must be positive at C2");
  require(is_non_decreasing(cert.h, 1.0 / cert.c2, 1e6 / cert.c2), "g must be non-increasing");
  require(divergence_threshold(cert.h, 100.0, 1.0 / cert.c2).has_value(), "g must blow up at 0");
}

double eval_lower_bound(const LowerTailCertificate& cert, double n, double t) {
  if (n < static_cast<double>(cert.n_threshold)) {
    throw Error(ErrorCode::OutOfDomain, "n below validity threshold N");
  }
  if (!(t > 0) || t > cert.c2 * (1.0 + 1e-12)) {
    throw Error(ErrorCode::OutOfDomain, "t outside (0, C2]");
  }
  return cert.c1 * std::exp(-cert.rate(n) * cert.g(t));
}

bool trend_holds(const SmallnessWitness& s, const EvalRange& range) {
  double prev = s.direction == Direction::ToZero ? kInf : -kInf;
  for (double n : range.ns) {
    const double w = s.w(n);
    if (!(w >= 0) || std::isnan(w)) return false;
    if (s.direction == Direction::ToZero ? w > prev * (1 + 1e-12) : w < prev * (1 - 1e-12)) return false;
    prev = w;
  }
  return true;
}

}  // namespace tailcert
