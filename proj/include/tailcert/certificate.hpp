#pragma once

// Certificate value types.  A TailCertificate states
//
//   P(|X_n| >= t |Y_n|) <= C1 * exp(-r_n f(t))   for n >= N, C2 <= t (<= R_n)
//
// where the optional ceiling R_n is present for the hat flavor only.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tailcert/sequences.hpp"

namespace tailcert {

enum class Flavor { O, OHat };

std::string to_string(Flavor f);
Flavor flavor_from_string(const std::string& s);

struct Provenance;

struct TailCertificate {
  SizeSequence size;
  RateSequence rate;
  double c1 = 1.0;
  double c2 = 1.0;  // NaN while it depends on an unfitted constant
  std::uint64_t n_threshold = 1;
  RateFunction f;
  Flavor flavor = Flavor::O;
  std::optional<RateSequence> ceiling;
  std::shared_ptr<const Provenance> provenance;

  std::set<std::string> unknown_constants() const;
  bool concrete() const { return unknown_constants().empty(); }

  /// Upper end of the t-domain at n (+inf for flavor O).
  double t_max(double n) const;
  bool in_domain(double n, double t) const;
};

/// Combinator tree node.  Children are kept whole so a certificate with
/// symbolic constants can be rebuilt once the constants are known.
struct Provenance {
  std::string op;
  json params = json::object();
  std::vector<std::string> notes;
  std::vector<TailCertificate> children;
};

std::shared_ptr<const Provenance> make_provenance(std::string op, json params = json::object(),
                                                  std::vector<TailCertificate> children = {},
                                                  std::vector<std::string> notes = {});

/// Copy of `cert` with one more provenance note appended.
TailCertificate with_note(const TailCertificate& cert, std::string note);

/// n-values at which sequence-level invariants are sampled.
struct EvalRange {
  std::vector<double> ns;

  static EvalRange geometric(double lo, double hi, int count = 61);
  static EvalRange standard() { return geometric(1.0, 1e6); }
};

/// Throws InvalidCertificate when a field invariant fails.  Checks that
/// require concrete constants are skipped for symbolic certificates.
void validate(const TailCertificate& cert, const EvalRange& range = EvalRange::standard());

/// C1 * exp(-r_n f(t)).
double eval_bound(const TailCertificate& cert, double n, double t);

// ---------------------------------------------------------------------------

/// P(X_n <= t Y_n) <= C1 exp(-r_n g(t)) for 0 < t <= C2, where g(t) = h(1/t)
/// for a non-decreasing h, so g is non-increasing and blows up at 0.
struct LowerTailCertificate {
  SizeSequence size;
  RateSequence rate;
  double c1 = 1.0;
  double c2 = 0.5;
  std::uint64_t n_threshold = 1;
  RateFunction h;

  double g(double t) const { return h(1.0 / t); }
};

void validate(const LowerTailCertificate& cert);
double eval_lower_bound(const LowerTailCertificate& cert, double n, double t);

struct ThetaCertificate {
  TailCertificate upper;
  LowerTailCertificate lower;
};

enum class Direction { ToZero, ToInfinity };

/// A deterministic w_n with the stated trend, used for the little-o and
/// little-omega notations: X_n = O^(w_n Y_n; r_n) with w_n -> 0.
struct SmallnessWitness {
  std::function<double(double)> w;
  Direction direction = Direction::ToZero;
  double threshold = 1.0;  // the constant C of the underlying certificate
  std::string description;
};

/// True when w moves monotonically in the declared direction on `range`.
bool trend_holds(const SmallnessWitness& s, const EvalRange& range = EvalRange::standard());

/// Certificate family indexed by a finite set Lambda_n with shared constants.
struct UniformCertificate {
  TailCertificate member;
  SizeSequence cardinality;
  std::optional<std::vector<SizeSequence>> index_sizes;
};

/// Bound p_n on P(|X_n| > |Xhat_n|) together with the rate it is measured in.
struct DominationEvidence {
  SizeSequence p;
  RateSequence rate;
};

}  // namespace tailcert
