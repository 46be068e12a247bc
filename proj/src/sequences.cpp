#include "tailcert/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <variant>

#include "tailcert/error.hpp"

namespace tailcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool near_one(double v) { return std::abs(v - 1.0) < 1e-12; }

double lookup_custom(const std::map<double, double>& values, double n, const char* what) {
  auto it = values.lower_bound(n * (1.0 - 1e-12));
  if (it != values.end() && std::abs(it->first - n) <= 1e-9 * std::max(1.0, std::abs(n))) {
    return it->second;
  }
  throw Error(ErrorCode::OutOfDomain,
              std::string(what) + ": n = " + fmt(n) + " is not on the tabulated grid");
}

json table_to_json(const std::map<double, double>& values) {
  json out = json::array();
  for (const auto& [n, v] : values) out.push_back(json::array({n, v}));
  return out;
}

std::map<double, double> table_from_json(const json& j) {
  std::map<double, double> out;
  for (const auto& row : j) out[row.at(0).get<double>()] = row.at(1).get<double>();
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Param

double Param::get() const {
  if (!value) throw Error(ErrorCode::SymbolicConstants, "constant '" + symbol + "' is not fitted");
  return *value;
}

Param Param::bind(const Bindings& b) const {
  if (symbol.empty()) return *this;
  auto it = b.find(symbol);
  if (it == b.end()) return *this;
  return Param{it->second, symbol};
}

json Param::to_json() const {
  if (symbol.empty()) return *value;
  json j{{"symbol", symbol}};
  j["value"] = value ? json(*value) : json(nullptr);
  return j;
}

Param Param::from_json(const json& j) {
  if (j.is_number()) return Param::number(j.get<double>());
  Param p;
  p.symbol = j.at("symbol").get<std::string>();
  if (j.contains("value") && !j.at("value").is_null()) p.value = j.at("value").get<double>();
  return p;
}

// ---------------------------------------------------------------------------
// RateFunction

struct RateFunction::Node {
  struct Log {};
  struct Linear { Param c; };
  struct Power { Param c; double gamma; };
  struct LinearCapped { Param c; };
  struct Shifted { RateFunction base; double kappa; };
  struct Min { RateFunction a, b; };
  struct Rescaled { RateFunction base; double a; };
  struct ArgPower { RateFunction base; double p; };
  std::variant<Log, Linear, Power, LinearCapped, Shifted, Min, Rescaled, ArgPower> v;
};

RateFunction::RateFunction() : RateFunction(log()) {}

RateFunction RateFunction::log() {
  static const auto node = std::make_shared<const Node>(Node{Node::Log{}});
  return RateFunction(node);
}

RateFunction RateFunction::linear(Param c) {
  if (c.concrete() && !(c.get() > 0)) throw Error(ErrorCode::InvalidArgument, "Linear(c) needs c > 0");
  return RateFunction(std::make_shared<const Node>(Node{Node::Linear{std::move(c)}}));
}

RateFunction RateFunction::power(Param c, double gamma) {
  if (c.concrete() && !(c.get() > 0)) throw Error(ErrorCode::InvalidArgument, "Power(c, g) needs c > 0");
  if (!(gamma > 0)) throw Error(ErrorCode::InvalidArgument, "Power(c, g) needs g > 0");
  return RateFunction(std::make_shared<const Node>(Node{Node::Power{std::move(c), gamma}}));
}

RateFunction RateFunction::linear_capped(Param c) {
  if (c.concrete() && !(c.get() > 0))
    throw Error(ErrorCode::InvalidArgument, "LinearCapped(c) needs c > 0");
  return RateFunction(std::make_shared<const Node>(Node{Node::LinearCapped{std::move(c)}}));
}

RateFunction RateFunction::shifted(const RateFunction& base, double kappa) {
  if (!(kappa >= 0)) throw Error(ErrorCode::InvalidArgument, "Shifted needs kappa >= 0");
  if (kappa == 0) return base;
  if (const auto* s = std::get_if<Node::Shifted>(&base.node_->v)) {
    return shifted(s->base, s->kappa + kappa);
  }
  return RateFunction(std::make_shared<const Node>(Node{Node::Shifted{base, kappa}}));
}

RateFunction RateFunction::min(const RateFunction& a, const RateFunction& b) {
  if (a == b) return a;
  return RateFunction(std::make_shared<const Node>(Node{Node::Min{a, b}}));
}

RateFunction RateFunction::rescaled(const RateFunction& base, double a) {
  if (!(a > 0)) throw Error(ErrorCode::InvalidArgument, "Rescaled needs a > 0");
  if (near_one(a)) return base;
  if (const auto* r = std::get_if<Node::Rescaled>(&base.node_->v)) return rescaled(r->base, r->a * a);
  return RateFunction(std::make_shared<const Node>(Node{Node::Rescaled{base, a}}));
}

RateFunction RateFunction::arg_power(const RateFunction& base, double p) {
  if (!(p > 0)) throw Error(ErrorCode::InvalidArgument, "ArgPower needs p > 0");
  if (near_one(p)) return base;
  if (const auto* q = std::get_if<Node::ArgPower>(&base.node_->v)) return arg_power(q->base, q->p * p);
  if (const auto* pw = std::get_if<Node::Power>(&base.node_->v)) return power(pw->c, pw->gamma * p);
  if (const auto* ln = std::get_if<Node::Linear>(&base.node_->v)) return power(ln->c, p);
  return RateFunction(std::make_shared<const Node>(Node{Node::ArgPower{base, p}}));
}

RateFunction::Form RateFunction::form() const { return static_cast<Form>(node_->v.index()); }

double RateFunction::operator()(double t) const {
  return std::visit(
      [t](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Node::Log>) {
          return t > 0 ? std::log(t) : -kInf;
        } else if constexpr (std::is_same_v<T, Node::Linear>) {
          return n.c.get() * t;
        } else if constexpr (std::is_same_v<T, Node::Power>) {
          return n.c.get() * std::pow(std::max(t, 0.0), n.gamma);
        } else if constexpr (std::is_same_v<T, Node::LinearCapped>) {
          return n.c.get() * std::min(t * t, t);
        } else if constexpr (std::is_same_v<T, Node::Shifted>) {
          return n.base(t) - n.kappa;
        } else if constexpr (std::is_same_v<T, Node::Min>) {
          return std::min(n.a(t), n.b(t));
        } else if constexpr (std::is_same_v<T, Node::Rescaled>) {
          return n.base(t / n.a);
        } else {
          return n.base(std::pow(std::max(t, 0.0), n.p));
        }
      },
      node_->v);
}

void RateFunction::collect_symbols(std::set<std::string>& out) const {
  std::visit(
      [&out](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Node::Linear> || std::is_same_v<T, Node::Power> ||
                      std::is_same_v<T, Node::LinearCapped>) {
          if (!n.c.concrete()) out.insert(n.c.symbol);
        } else if constexpr (std::is_same_v<T, Node::Shifted> || std::is_same_v<T, Node::Rescaled> ||
                             std::is_same_v<T, Node::ArgPower>) {
          n.base.collect_symbols(out);
        } else if constexpr (std::is_same_v<T, Node::Min>) {
          n.a.collect_symbols(out);
          n.b.collect_symbols(out);
        }
      },
      node_->v);
}

bool RateFunction::is_concrete() const {
  std::set<std::string> s;
  collect_symbols(s);
  return s.empty();
}

RateFunction RateFunction::bind(const Bindings& b) const {
  return std::visit(
      [&](const auto& n) -> RateFunction {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Node::Log>) {
          return *this;
        } else if constexpr (std::is_same_v<T, Node::Linear>) {
          return linear(n.c.bind(b));
        } else if constexpr (std::is_same_v<T, Node::Power>) {
          return power(n.c.bind(b), n.gamma);
        } else if constexpr (std::is_same_v<T, Node::LinearCapped>) {
          return linear_capped(n.c.bind(b));
        } else if constexpr (std::is_same_v<T, Node::Shifted>) {
          return shifted(n.base.bind(b), n.kappa);
        } else if constexpr (std::is_same_v<T, Node::Min>) {
          return min(n.a.bind(b), n.b.bind(b));
        } else if constexpr (std::is_same_v<T, Node::Rescaled>) {
          return rescaled(n.base.bind(b), n.a);
        } else {
          return arg_power(n.base.bind(b), n.p);
        }
      },
      node_->v);
}

namespace {
std::string param_str(const Param& p) {
  if (p.symbol.empty()) return fmt(*p.value);
  return p.concrete() ? p.symbol + "=" + fmt(*p.value) : p.symbol;
}
}  // namespace

std::string RateFunction::describe() const {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Node::Log>) {
          return "log(t)";
        } else if constexpr (std::is_same_v<T, Node::Linear>) {
          return param_str(n.c) + "*t";
        } else if constexpr (std::is_same_v<T, Node::Power>) {
          return param_str(n.c) + "*t^" + fmt(n.gamma);
        } else if constexpr (std::is_same_v<T, Node::LinearCapped>) {
          return param_str(n.c) + "*min(t^2,t)";
        } else if constexpr (std::is_same_v<T, Node::Shifted>) {
          return "(" + n.base.describe() + " - " + fmt(n.kappa) + ")";
        } else if constexpr (std::is_same_v<T, Node::Min>) {
          return "min(" + n.a.describe() + ", " + n.b.describe() + ")";
        } else if constexpr (std::is_same_v<T, Node::Rescaled>) {
          return "[" + n.base.describe() + "](t/" + fmt(n.a) + ")";
        } else {
          return "[" + n.base.describe() + "](t^" + fmt(n.p) + ")";
        }
      },
      node_->v);
}

json RateFunction::to_json() const {
  return std::visit(
      [](const auto& n) -> json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Node::Log>) {
          return {{"form", "log"}};
        } else if constexpr (std::is_same_v<T, Node::Linear>) {
          return {{"form", "linear"}, {"c", n.c.to_json()}};
        } else if constexpr (std::is_same_v<T, Node::Power>) {
          return {{"form", "power"}, {"c", n.c.to_json()}, {"gamma", n.gamma}};
        } else if constexpr (std::is_same_v<T, Node::LinearCapped>) {
          return {{"form", "linear_capped"}, {"c", n.c.to_json()}};
        } else if constexpr (std::is_same_v<T, Node::Shifted>) {
          return {{"form", "shifted"}, {"base", n.base.to_json()}, {"kappa", n.kappa}};
        } else if constexpr (std::is_same_v<T, Node::Min>) {
          return {{"form", "min"}, {"a", n.a.to_json()}, {"b", n.b.to_json()}};
        } else if constexpr (std::is_same_v<T, Node::Rescaled>) {
          return {{"form", "rescaled"}, {"base", n.base.to_json()}, {"a", n.a}};
        } else {
          return {{"form", "arg_power"}, {"base", n.base.to_json()}, {"p", n.p}};
        }
      },
      node_->v);
}

RateFunction RateFunction::from_json(const json& j) {
  const auto form = j.at("form").get<std::string>();
  if (form == "log") return log();
  if (form == "linear") return linear(Param::from_json(j.at("c")));
  if (form == "power") return power(Param::from_json(j.at("c")), j.at("gamma").get<double>());
  if (form == "linear_capped") return linear_capped(Param::from_json(j.at("c")));
  if (form == "shifted") return shifted(from_json(j.at("base")), j.at("kappa").get<double>());
  if (form == "min") return min(from_json(j.at("a")), from_json(j.at("b")));
  if (form == "rescaled") return rescaled(from_json(j.at("base")), j.at("a").get<double>());
  if (form == "arg_power") return arg_power(from_json(j.at("base")), j.at("p").get<double>());
  throw Error(ErrorCode::ParseError, "unknown rate function form '" + form + "'");
}

bool operator==(const RateFunction& a, const RateFunction& b) {
  return a.node_ == b.node_ || a.to_json() == b.to_json();
}

// ---------------------------------------------------------------------------
// RateSequence

struct RateSequence::Node {
  struct Const { double r; };
  struct LogN { double c; };
  struct LinearN { double c; };
  struct DimLog { SizeSequence dim; double c; };
  struct Min { RateSequence a, b; };
  struct Custom { std::map<double, double> values; };
  struct Power { RateSequence base; double gamma; };
  struct Scaled { RateSequence base; double a; };
  struct Unbounded {};
  struct TruncationCeiling { RateFunction f; double from; SizeSequence p; RateSequence rate; };
  std::variant<Const, LogN, LinearN, DimLog, Min, Custom, Power, Scaled, Unbounded, TruncationCeiling> v;
};

RateSequence::RateSequence() : RateSequence(constant(1.0)) {}

RateSequence RateSequence::constant(double r) {
  if (!(r > 0)) throw Error(ErrorCode::InvalidArgument, "Const(r) needs r > 0");
  if (std::isinf(r)) return unbounded();
  return RateSequence(std::make_shared<const Node>(Node{Node::Const{r}}));
}

RateSequence RateSequence::log_n(double c) {
  if (!(c > 0)) throw Error(ErrorCode::InvalidArgument, "LogN(c) needs c > 0");
  return RateSequence(std::make_shared<const Node>(Node{Node::LogN{c}}));
}

RateSequence RateSequence::linear_n(double c) {
  if (!(c > 0)) throw Error(ErrorCode::InvalidArgument, "LinearN(c) needs c > 0");
  return RateSequence(std::make_shared<const Node>(Node{Node::LinearN{c}}));
}

RateSequence RateSequence::dim_log(const SizeSequence& dim, double c) {
  if (!(c > 0)) throw Error(ErrorCode::InvalidArgument, "DLogND needs c > 0");
  return RateSequence(std::make_shared<const Node>(Node{Node::DimLog{dim, c}}));
}

RateSequence RateSequence::min(const RateSequence& a, const RateSequence& b) {
  if (a == b) return a;
  if (std::holds_alternative<Node::Unbounded>(a.node_->v)) return b;
  if (std::holds_alternative<Node::Unbounded>(b.node_->v)) return a;
  auto ca = a.constant_value(), cb = b.constant_value();
  if (ca && cb) return constant(std::min(*ca, *cb));
  return RateSequence(std::make_shared<const Node>(Node{Node::Min{a, b}}));
}

RateSequence RateSequence::custom(std::map<double, double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "Custom rate sequence is empty");
  return RateSequence(std::make_shared<const Node>(Node{Node::Custom{std::move(values)}}));
}

RateSequence RateSequence::power(const RateSequence& base, double gamma) {
  if (!(gamma > 0)) throw Error(ErrorCode::InvalidArgument, "rate power needs gamma > 0");
  if (near_one(gamma)) return base;
  if (std::holds_alternative<Node::Unbounded>(base.node_->v)) return base;
  if (auto c = base.constant_value()) return constant(std::pow(*c, gamma));
  return RateSequence(std::make_shared<const Node>(Node{Node::Power{base, gamma}}));
}

RateSequence RateSequence::scaled(const RateSequence& base, double a) {
  if (!(a > 0)) throw Error(ErrorCode::InvalidArgument, "rate scaling needs a > 0");
  if (near_one(a)) return base;
  if (std::holds_alternative<Node::Unbounded>(base.node_->v)) return base;
  if (auto c = base.constant_value()) return constant(*c * a);
  return RateSequence(std::make_shared<const Node>(Node{Node::Scaled{base, a}}));
}

RateSequence RateSequence::unbounded() {
  static const auto node = std::make_shared<const Node>(Node{Node::Unbounded{}});
  return RateSequence(node);
}

RateSequence RateSequence::truncation_ceiling(const RateFunction& f, double from, const SizeSequence& p,
                                              const RateSequence& rate) {
  if (auto c = p.constant_value(); c && *c == 0.0) return unbounded();
  return RateSequence(
      std::make_shared<const Node>(Node{Node::TruncationCeiling{f, from, p, rate}}));
}

double RateSequence::operator()(double n) const {
  return std::visit(
      [n](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Node::Const>) {
          return s.r;
        } else if constexpr (std::is_same_v<T, Node::LogN>) {
          return s.c * std::log(n);
        } else if constexpr (std::is_same_v<T, Node::LinearN>) {
          return s.c * n;
        } else if constexpr (std::is_same_v<T, Node::DimLog>) {
          const double d = s.dim(n);
          return s.c * d * std::log(n / d);
        } else if constexpr (std::is_same_v<T, Node::Min>) {
          return std::min(s.a(n), s.b(n));
        } else if constexpr (std::is_same_v<T, Node::Custom>) {
          return lookup_custom(s.values, n, "Custom rate");
        } else if constexpr (std::is_same_v<T, Node::Power>) {
          return std::pow(s.base(n), s.gamma);
        } else if constexpr (std::is_same_v<T, Node::Scaled>) {
          return s.a * s.base(n);
        } else if constexpr (std::is_same_v<T, Node::Unbounded>) {
          return kInf;
        } else {
          const double p = s.p(n);
          if (p <= 0) return kInf;
          const double level = -std::log(p) / s.rate(n);
          auto r = last_below(s.f, level, s.from);
          return r ? *r : 0.0;
        }
      },
      node_->v);
}

std::optional<double> RateSequence::constant_value() const {
  if (const auto* c = std::get_if<Node::Const>(&node_->v)) return c->r;
  return std::nullopt;
}

std::string RateSequence::describe() const {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Node::Const>) {
          return fmt(s.r);
        } else if constexpr (std::is_same_v<T, Node::LogN>) {
          return fmt(s.c) + "*log(n)";
        } else if constexpr (std::is_same_v<T, Node::LinearN>) {
          return fmt(s.c) + "*n";
        } else if constexpr (std::is_same_v<T, Node::DimLog>) {
          return fmt(s.c) + "*d*log(n/d), d=" + s.dim.describe();
        } else if constexpr (std::is_same_v<T, Node::Min>) {
          return "min(" + s.a.describe() + ", " + s.b.describe() + ")";
        } else if constexpr (std::is_same_v<T, Node::Custom>) {
          return "custom[" + std::to_string(s.values.size()) + "]";
        } else if constexpr (std::is_same_v<T, Node::Power>) {
          return "(" + s.base.describe() + ")^" + fmt(s.gamma);
        } else if constexpr (std::is_same_v<T, Node::Scaled>) {
          return fmt(s.a) + "*(" + s.base.describe() + ")";
        } else if constexpr (std::is_same_v<T, Node::Unbounded>) {
          return "inf";
        } else {
          return "ceiling{f=" + s.f.describe() + ", p=" + s.p.describe() + "}";
        }
      },
      node_->v);
}

json RateSequence::to_json() const {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Node::Const>) {
          return {{"form", "const"}, {"r", s.r}};
        } else if constexpr (std::is_same_v<T, Node::LogN>) {
          return {{"form", "log_n"}, {"c", s.c}};
        } else if constexpr (std::is_same_v<T, Node::LinearN>) {
          return {{"form", "linear_n"}, {"c", s.c}};
        } else if constexpr (std::is_same_v<T, Node::DimLog>) {
          return {{"form", "dim_log"}, {"dim", s.dim.to_json()}, {"c", s.c}};
        } else if constexpr (std::is_same_v<T, Node::Min>) {
          return {{"form", "min"}, {"a", s.a.to_json()}, {"b", s.b.to_json()}};
        } else if constexpr (std::is_same_v<T, Node::Custom>) {
          return {{"form", "custom"}, {"values", table_to_json(s.values)}};
        } else if constexpr (std::is_same_v<T, Node::Power>) {
          return {{"form", "power"}, {"base", s.base.to_json()}, {"gamma", s.gamma}};
        } else if constexpr (std::is_same_v<T, Node::Scaled>) {
          return {{"form", "scaled"}, {"base", s.base.to_json()}, {"a", s.a}};
        } else if constexpr (std::is_same_v<T, Node::Unbounded>) {
          return {{"form", "unbounded"}};
        } else {
          return {{"form", "truncation_ceiling"},
                  {"f", s.f.to_json()},
                  {"from", s.from},
                  {"p", s.p.to_json()},
                  {"rate", s.rate.to_json()}};
        }
      },
      node_->v);
}

RateSequence RateSequence::from_json(const json& j) {
  const auto form = j.at("form").get<std::string>();
  if (form == "const") return constant(j.at("r").get<double>());
  if (form == "log_n") return log_n(j.at("c").get<double>());
  if (form == "linear_n") return linear_n(j.at("c").get<double>());
  if (form == "dim_log") return dim_log(SizeSequence::from_json(j.at("dim")), j.at("c").get<double>());
  if (form == "min") return min(from_json(j.at("a")), from_json(j.at("b")));
  if (form == "custom") return custom(table_from_json(j.at("values")));
  if (form == "power") return power(from_json(j.at("base")), j.at("gamma").get<double>());
  if (form == "scaled") return scaled(from_json(j.at("base")), j.at("a").get<double>());
  if (form == "unbounded") return unbounded();
  if (form == "truncation_ceiling") {
    return truncation_ceiling(RateFunction::from_json(j.at("f")), j.at("from").get<double>(),
                              SizeSequence::from_json(j.at("p")), from_json(j.at("rate")));
  }
  throw Error(ErrorCode::ParseError, "unknown rate sequence form '" + form + "'");
}

bool operator==(const RateSequence& a, const RateSequence& b) {
  return a.node_ == b.node_ || a.to_json() == b.to_json();
}

// ---------------------------------------------------------------------------
// SizeSequence

struct SizeSequence::Node {
  struct Const { double y; };
  struct Monomial { double c, a, b; };
  struct SqrtRateOverN { RateSequence rate; };
  struct PowerOfRate { RateSequence rate; double gamma; };
  struct NthRoot { RateSequence rate; std::optional<SizeSequence> dim; };
  struct Product { std::vector<SizeSequence> terms; };
  struct Sum { std::vector<SizeSequence> terms; };
  struct Max { std::vector<SizeSequence> terms; };
  struct Power { SizeSequence base; double alpha; };
  struct Custom { std::map<double, double> values; };
  std::variant<Const, Monomial, SqrtRateOverN, PowerOfRate, NthRoot, Product, Sum, Max, Power, Custom> v;
};

SizeSequence::SizeSequence() : SizeSequence(constant(1.0)) {}

SizeSequence SizeSequence::constant(double y) {
  if (!(y >= 0) || std::isinf(y)) throw Error(ErrorCode::InvalidArgument, "Const(y) needs finite y >= 0");
  return SizeSequence(std::make_shared<const Node>(Node{Node::Const{y}}));
}

SizeSequence SizeSequence::monomial(double c, double a, double b) {
  if (!(c > 0)) throw Error(ErrorCode::InvalidArgument, "Monomial needs c > 0");
  if (a == 0 && b == 0) return constant(c);
  return SizeSequence(std::make_shared<const Node>(Node{Node::Monomial{c, a, b}}));
}

SizeSequence SizeSequence::sqrt_rate_over_n(const RateSequence& rate) {
  return SizeSequence(std::make_shared<const Node>(Node{Node::SqrtRateOverN{rate}}));
}

SizeSequence SizeSequence::power_of_rate(const RateSequence& rate, double gamma) {
  if (auto c = rate.constant_value()) return constant(std::pow(*c, gamma));
  return SizeSequence(std::make_shared<const Node>(Node{Node::PowerOfRate{rate, gamma}}));
}

SizeSequence SizeSequence::nth_root(const RateSequence& rate, std::optional<SizeSequence> dim) {
  return SizeSequence(std::make_shared<const Node>(Node{Node::NthRoot{rate, std::move(dim)}}));
}

SizeSequence SizeSequence::product(std::vector<SizeSequence> terms) {
  std::vector<SizeSequence> flat;
  double k = 1.0;
  for (const auto& t : terms) {
    if (const auto* p = std::get_if<Node::Product>(&t.node_->v)) {
      for (const auto& inner : p->terms) {
        if (auto c = inner.constant_value()) k *= *c; else flat.push_back(inner);
      }
    } else if (auto c = t.constant_value()) {
      k *= *c;
    } else {
      flat.push_back(t);
    }
  }
  if (k == 0.0 || flat.empty()) return constant(k);
  if (!near_one(k)) flat.insert(flat.begin(), constant(k));
  if (flat.size() == 1) return flat.front();
  return SizeSequence(std::make_shared<const Node>(Node{Node::Product{std::move(flat)}}));
}

SizeSequence SizeSequence::sum(std::vector<SizeSequence> terms) {
  std::vector<SizeSequence> flat;
  double k = 0.0;
  for (const auto& t : terms) {
    if (const auto* s = std::get_if<Node::Sum>(&t.node_->v)) {
      for (const auto& inner : s->terms) {
        if (auto c = inner.constant_value()) k += *c; else flat.push_back(inner);
      }
    } else if (auto c = t.constant_value()) {
      k += *c;
    } else {
      flat.push_back(t);
    }
  }
  if (flat.empty()) return constant(k);
  if (k != 0.0) flat.push_back(constant(k));
  if (flat.size() == 1) return flat.front();
  return SizeSequence(std::make_shared<const Node>(Node{Node::Sum{std::move(flat)}}));
}

SizeSequence SizeSequence::max(std::vector<SizeSequence> terms) {
  if (terms.empty()) throw Error(ErrorCode::InvalidArgument, "Max of no sizes");
  std::vector<SizeSequence> uniq;
  std::optional<double> k;
  for (const auto& t : terms) {
    if (auto c = t.constant_value()) {
      k = k ? std::max(*k, *c) : *c;
    } else if (std::find(uniq.begin(), uniq.end(), t) == uniq.end()) {
      uniq.push_back(t);
    }
  }
  if (uniq.empty()) return constant(*k);
  if (k) uniq.push_back(constant(*k));
  if (uniq.size() == 1) return uniq.front();
  return SizeSequence(std::make_shared<const Node>(Node{Node::Max{std::move(uniq)}}));
}

SizeSequence SizeSequence::power(const SizeSequence& base, double alpha) {
  if (!(alpha > 0)) throw Error(ErrorCode::InvalidArgument, "size power needs alpha > 0");
  if (near_one(alpha)) return base;
  if (auto c = base.constant_value()) return constant(std::pow(*c, alpha));
  if (const auto* p = std::get_if<Node::Power>(&base.node_->v)) return power(p->base, p->alpha * alpha);
  return SizeSequence(std::make_shared<const Node>(Node{Node::Power{base, alpha}}));
}

SizeSequence SizeSequence::custom(std::map<double, double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "Custom size sequence is empty");
  return SizeSequence(std::make_shared<const Node>(Node{Node::Custom{std::move(values)}}));
}

double SizeSequence::operator()(double n) const {
  return std::visit(
      [n](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Node::Const>) {
          return s.y;
        } else if constexpr (std::is_same_v<T, Node::Monomial>) {
          double v = s.c * std::pow(n, s.a);
          if (s.b != 0) v *= std::pow(std::log(n), s.b);
          return v;
        } else if constexpr (std::is_same_v<T, Node::SqrtRateOverN>) {
          return std::sqrt(s.rate(n) / n);
        } else if constexpr (std::is_same_v<T, Node::PowerOfRate>) {
          return std::pow(s.rate(n), s.gamma);
        } else if constexpr (std::is_same_v<T, Node::NthRoot>) {
          const double d = s.dim ? (*s.dim)(n) : n;
          return std::pow(d, 1.0 / s.rate(n));
        } else if constexpr (std::is_same_v<T, Node::Product>) {
          double v = 1.0;
          for (const auto& t : s.terms) v *= t(n);
          return v;
        } else if constexpr (std::is_same_v<T, Node::Sum>) {
          double v = 0.0;
          for (const auto& t : s.terms) v += t(n);
          return v;
        } else if constexpr (std::is_same_v<T, Node::Max>) {
          double v = -kInf;
          for (const auto& t : s.terms) v = std::max(v, t(n));
          return v;
        } else if constexpr (std::is_same_v<T, Node::Power>) {
          return std::pow(s.base(n), s.alpha);
        } else {
          return lookup_custom(s.values, n, "Custom size");
        }
      },
      node_->v);
}

std::optional<double> SizeSequence::constant_value() const {
  if (const auto* c = std::get_if<Node::Const>(&node_->v)) return c->y;
  return std::nullopt;
}

namespace {
std::string join_terms(const std::vector<SizeSequence>& terms, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out += sep;
    out += terms[i].describe();
  }
  return out;
}

json terms_to_json(const std::vector<SizeSequence>& terms) {
  json out = json::array();
  for (const auto& t : terms) out.push_back(t.to_json());
  return out;
}

std::vector<SizeSequence> terms_from_json(const json& j) {
  std::vector<SizeSequence> out;
  for (const auto& t : j) out.push_back(SizeSequence::from_json(t));
  return out;
}
}  // namespace

std::string SizeSequence::describe() const {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Node::Const>) {
          return fmt(s.y);
        } else if constexpr (std::is_same_v<T, Node::Monomial>) {
          return fmt(s.c) + "*n^" + fmt(s.a) + "*log(n)^" + fmt(s.b);
        } else if constexpr (std::is_same_v<T, Node::SqrtRateOverN>) {
          return "sqrt((" + s.rate.describe() + ")/n)";
        } else if constexpr (std::is_same_v<T, Node::PowerOfRate>) {
          return "(" + s.rate.describe() + ")^" + fmt(s.gamma);
        } else if constexpr (std::is_same_v<T, Node::NthRoot>) {
          return std::string(s.dim ? "d" : "n") + "^(1/(" + s.rate.describe() + "))";
        } else if constexpr (std::is_same_v<T, Node::Product>) {
          return "(" + join_terms(s.terms, " * ") + ")";
        } else if constexpr (std::is_same_v<T, Node::Sum>) {
          return "(" + join_terms(s.terms, " + ") + ")";
        } else if constexpr (std::is_same_v<T, Node::Max>) {
          return "max(" + join_terms(s.terms, ", ") + ")";
        } else if constexpr (std::is_same_v<T, Node::Power>) {
          return "(" + s.base.describe() + ")^" + fmt(s.alpha);
        } else {
          return "custom[" + std::to_string(s.values.size()) + "]";
        }
      },
      node_->v);
}

json SizeSequence::to_json() const {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Node::Const>) {
          return {{"form", "const"}, {"y", s.y}};
        } else if constexpr (std::is_same_v<T, Node::Monomial>) {
          return {{"form", "monomial"}, {"c", s.c}, {"a", s.a}, {"b", s.b}};
        } else if constexpr (std::is_same_v<T, Node::SqrtRateOverN>) {
          return {{"form", "sqrt_rate_over_n"}, {"rate", s.rate.to_json()}};
        } else if constexpr (std::is_same_v<T, Node::PowerOfRate>) {
          return {{"form", "power_of_rate"}, {"rate", s.rate.to_json()}, {"gamma", s.gamma}};
        } else if constexpr (std::is_same_v<T, Node::NthRoot>) {
          json j{{"form", "nth_root"}, {"rate", s.rate.to_json()}};
          if (s.dim) j["dim"] = s.dim->to_json();
          return j;
        } else if constexpr (std::is_same_v<T, Node::Product>) {
          return {{"form", "product"}, {"terms", terms_to_json(s.terms)}};
        } else if constexpr (std::is_same_v<T, Node::Sum>) {
          return {{"form", "sum"}, {"terms", terms_to_json(s.terms)}};
        } else if constexpr (std::is_same_v<T, Node::Max>) {
          return {{"form", "max"}, {"terms", terms_to_json(s.terms)}};
        } else if constexpr (std::is_same_v<T, Node::Power>) {
          return {{"form", "power"}, {"base", s.base.to_json()}, {"alpha", s.alpha}};
        } else {
          return {{"form", "custom"}, {"values", table_to_json(s.values)}};
        }
      },
      node_->v);
}

SizeSequence SizeSequence::from_json(const json& j) {
  const auto form = j.at("form").get<std::string>();
  if (form == "const") return constant(j.at("y").get<double>());
  if (form == "monomial")
    return monomial(j.at("c").get<double>(), j.at("a").get<double>(), j.at("b").get<double>());
  if (form == "sqrt_rate_over_n") return sqrt_rate_over_n(RateSequence::from_json(j.at("rate")));
  if (form == "power_of_rate")
    return power_of_rate(RateSequence::from_json(j.at("rate")), j.at("gamma").get<double>());
  if (form == "nth_root") {
    std::optional<SizeSequence> dim;
    if (j.contains("dim")) dim = from_json(j.at("dim"));
    return nth_root(RateSequence::from_json(j.at("rate")), dim);
  }
  if (form == "product") return product(terms_from_json(j.at("terms")));
  if (form == "sum") return sum(terms_from_json(j.at("terms")));
  if (form == "max") return max(terms_from_json(j.at("terms")));
  if (form == "power") return power(from_json(j.at("base")), j.at("alpha").get<double>());
  if (form == "custom") return custom(table_from_json(j.at("values")));
  throw Error(ErrorCode::ParseError, "unknown size sequence form '" + form + "'");
}

bool operator==(const SizeSequence& a, const SizeSequence& b) {
  return a.node_ == b.node_ || a.to_json() == b.to_json();
}

// ---------------------------------------------------------------------------
// helpers

std::vector<double> geometric_grid(double from, double to, int count) {
  if (count < 1 || !(from > 0) || !(to >= from)) {
    throw Error(ErrorCode::BadGrid, "geometric grid needs 0 < from <= to and count >= 1");
  }
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = from;
    return out;
  }
  const double step = std::log(to / from) / (count - 1);
  for (int i = 0; i < count; ++i) out[i] = from * std::exp(step * i);
  out.back() = to;
  return out;
}

bool is_non_decreasing(const RateFunction& f, double from, double to, int points) {
  double prev = -kInf;
  for (double t : geometric_grid(from, to, points)) {
    const double v = f(t);
    if (std::isnan(v) || v < prev - 1e-12 * std::max(1.0, std::abs(prev))) return false;
    prev = v;
  }
  return true;
}

std::optional<double> first_reaching(const RateFunction& f, double level, double lo, double hi) {
  if (f(lo) >= level) return lo;
  if (!(f(hi) >= level)) return std::nullopt;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) >= level) hi = mid; else lo = mid;
  }
  return hi;
}

std::optional<double> last_below(const RateFunction& f, double level, double lo) {
  if (f(lo) > level) return std::nullopt;
  double hi = std::max(lo, 1.0) * 2.0;
  while (f(hi) <= level) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return kInf;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) <= level) lo = mid; else hi = mid;
  }
  return lo;
}

std::optional<double> divergence_threshold(const RateFunction& f, double level, double start) {
  double t = std::max(start, 1e-300);
  for (int i = 0; i < 2100; ++i) {
    if (f(t) > level) return t;
    t *= 2.0;
    if (std::isinf(t)) break;
  }
  return std::nullopt;
}

}  // namespace tailcert
