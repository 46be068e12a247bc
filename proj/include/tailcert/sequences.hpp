#pragma once

// Deterministic building blocks of a tail certificate: the rate function f in
// the exponent, the tail sequence r_n and the size sequence y_n.  All three are
// immutable expression trees shared by pointer, so copies are cheap and values
// can be evaluated concurrently.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace tailcert {

using json = nlohmann::json;

/// Named values for symbolic constants ("absolute constant c > 0").
using Bindings = std::map<std::string, double>;

/// A scalar parameter that is either a number or a named positive unknown.
struct Param {
  std::optional<double> value;
  std::string symbol;

  static Param number(double v) { return Param{v, {}}; }
  static Param unknown(std::string name) { return Param{std::nullopt, std::move(name)}; }

  bool concrete() const { return value.has_value(); }
  double get() const;
  Param bind(const Bindings& b) const;

  json to_json() const;
  static Param from_json(const json& j);
};

class RateFunction {
 public:
  enum class Form { Log, Linear, Power, LinearCapped, Shifted, Min, Rescaled, ArgPower };

  RateFunction();  // log t

  static RateFunction log();
  static RateFunction linear(Param c);
  static RateFunction linear(double c) { return linear(Param::number(c)); }
  static RateFunction power(Param c, double gamma);
  static RateFunction power(double c, double gamma) { return power(Param::number(c), gamma); }
  /// c * min(t^2, t)
  static RateFunction linear_capped(Param c);
  /// base(t) - kappa
  static RateFunction shifted(const RateFunction& base, double kappa);
  static RateFunction min(const RateFunction& a, const RateFunction& b);
  /// base(t / a)
  static RateFunction rescaled(const RateFunction& base, double a);
  /// base(t^p)
  static RateFunction arg_power(const RateFunction& base, double p);
  static RateFunction sqrt_arg(const RateFunction& base) { return arg_power(base, 0.5); }

  Form form() const;
  double operator()(double t) const;

  bool is_concrete() const;
  void collect_symbols(std::set<std::string>& out) const;
  RateFunction bind(const Bindings& b) const;

  std::string describe() const;
  json to_json() const;
  static RateFunction from_json(const json& j);

  friend bool operator==(const RateFunction& a, const RateFunction& b);

  struct Node;

 private:
  explicit RateFunction(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

class SizeSequence;

/// n -> r_n > 0.  Also used for threshold ceilings R_n, which may be +inf.
class RateSequence {
 public:
  RateSequence();  // Const(1)

  static RateSequence constant(double r);
  static RateSequence log_n(double c = 1.0);
  static RateSequence linear_n(double c = 1.0);
  /// c * d_n * log(n / d_n)
  static RateSequence dim_log(const SizeSequence& dim, double c = 1.0);
  static RateSequence min(const RateSequence& a, const RateSequence& b);
  static RateSequence custom(std::map<double, double> values);
  static RateSequence power(const RateSequence& base, double gamma);
  static RateSequence scaled(const RateSequence& base, double a);
  static RateSequence unbounded();
  /// sup{t >= from : f(t) <= -log(p_n) / r_n}; 0 when no such t exists.
  static RateSequence truncation_ceiling(const RateFunction& f, double from, const SizeSequence& p,
                                         const RateSequence& rate);

  double operator()(double n) const;
  std::optional<double> constant_value() const;

  std::string describe() const;
  json to_json() const;
  static RateSequence from_json(const json& j);

  friend bool operator==(const RateSequence& a, const RateSequence& b);

  struct Node;

 private:
  explicit RateSequence(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// n -> y_n.  Certificates need y_n > 0; zero is representable so that the
/// vanishing Lipschitz term of a self-bounding process can be written down.
class SizeSequence {
 public:
  SizeSequence();  // Const(1)

  static SizeSequence constant(double y);
  /// c * n^a * (log n)^b
  static SizeSequence monomial(double c, double a, double b);
  static SizeSequence sqrt_rate_over_n(const RateSequence& rate);
  static SizeSequence power_of_rate(const RateSequence& rate, double gamma);
  /// d_n^(1/r_n), with d_n = n unless a dimension map is supplied
  static SizeSequence nth_root(const RateSequence& rate,
                               std::optional<SizeSequence> dim = std::nullopt);
  static SizeSequence product(std::vector<SizeSequence> terms);
  static SizeSequence sum(std::vector<SizeSequence> terms);
  static SizeSequence max(std::vector<SizeSequence> terms);
  static SizeSequence power(const SizeSequence& base, double alpha);
  static SizeSequence custom(std::map<double, double> values);

  double operator()(double n) const;
  std::optional<double> constant_value() const;

  std::string describe() const;
  json to_json() const;
  static SizeSequence from_json(const json& j);

  friend bool operator==(const SizeSequence& a, const SizeSequence& b);

  struct Node;

 private:
  explicit SizeSequence(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Numerical helpers on rate functions.  f is assumed non-decreasing.

/// Geometric grid of `count` points in [from, to].
std::vector<double> geometric_grid(double from, double to, int count);

/// True when f is non-decreasing on a geometric grid over [from, to].
bool is_non_decreasing(const RateFunction& f, double from, double to, int points = 1000);

/// inf{t in [lo, hi] : f(t) >= level}, returned as the right end of the final
/// bisection bracket so that f(result) >= level holds exactly.
std::optional<double> first_reaching(const RateFunction& f, double level, double lo, double hi);

/// sup{t >= lo : f(t) <= level}; +inf if f never exceeds level below 1e300,
/// nullopt if f(lo) > level already.
std::optional<double> last_below(const RateFunction& f, double level, double lo);

/// Some t >= start with f(t) > level (the divergence witness).
std::optional<double> divergence_threshold(const RateFunction& f, double level, double start);

}  // namespace tailcert
