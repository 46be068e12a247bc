#include "tailcert/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tailcert/error.hpp"

namespace tailcert {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double nan_max(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return kNaN;
  return std::max(a, b);
}

std::optional<RateSequence> min_ceiling(const TailCertificate& a, const TailCertificate& b) {
  const auto& ra = a.flavor == Flavor::OHat ? a.ceiling : std::nullopt;
  const auto& rb = b.flavor == Flavor::OHat ? b.ceiling : std::nullopt;
  if (ra && rb) return RateSequence::min(*ra, *rb);
  return ra ? ra : rb;
}

// Flavor O survives a binary combination only when both inputs are O with the
// same N; otherwise the result is stated in the hat flavor.
void combine_flavor(TailCertificate& out, const TailCertificate& a, const TailCertificate& b,
                    const std::optional<RateSequence>& ceiling) {
  out.n_threshold = std::max(a.n_threshold, b.n_threshold);
  if (a.flavor == Flavor::O && b.flavor == Flavor::O && a.n_threshold == b.n_threshold) {
    out.flavor = Flavor::O;
    out.ceiling.reset();
  } else {
    out.flavor = Flavor::OHat;
    out.ceiling = ceiling ? *ceiling : RateSequence::unbounded();
  }
}

std::optional<RateSequence> map_ceiling(const TailCertificate& c,
                                        const std::function<RateSequence(const RateSequence&)>& fn) {
  if (c.flavor != Flavor::OHat || !c.ceiling) return c.ceiling;
  return fn(*c.ceiling);
}

json range_json(const EvalRange& r) { return r.ns; }
EvalRange range_from(const json& j) { return EvalRange{j.get<std::vector<double>>()}; }

template <class Seq>
std::optional<double> try_eval(const Seq& s, double n) {
  try {
    return s(n);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::OutOfDomain) return std::nullopt;
    throw;
  }
}

json sizes_json(const std::optional<std::vector<SizeSequence>>& v) {
  if (!v) return nullptr;
  json out = json::array();
  for (const auto& s : *v) out.push_back(s.to_json());
  return out;
}

std::optional<std::vector<SizeSequence>> sizes_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  std::vector<SizeSequence> out;
  for (const auto& s : j) out.push_back(SizeSequence::from_json(s));
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

TailCertificate add(const TailCertificate& a, const TailCertificate& b) {
  validate(a);
  validate(b);
  TailCertificate out;
  out.size = SizeSequence::sum({a.size, b.size});
  out.rate = RateSequence::min(a.rate, b.rate);
  out.c1 = a.c1 + b.c1;
  out.c2 = nan_max(a.c2, b.c2);
  out.f = RateFunction::min(a.f, b.f);
  combine_flavor(out, a, b, min_ceiling(a, b));
  out.provenance = make_provenance("add", json::object(), {a, b});
  return out;
}

TailCertificate multiply(const TailCertificate& a, const TailCertificate& b) {
  validate(a);
  validate(b);
  TailCertificate out;
  out.size = SizeSequence::product({a.size, b.size});
  out.rate = RateSequence::min(a.rate, b.rate);
  out.c1 = a.c1 + b.c1;
  const double c2 = nan_max(a.c2, b.c2);
  out.c2 = c2 * c2;
  out.f = RateFunction::sqrt_arg(RateFunction::min(a.f, b.f));
  auto ceiling = min_ceiling(a, b);
  if (ceiling) ceiling = RateSequence::power(*ceiling, 2.0);
  combine_flavor(out, a, b, ceiling);
  out.provenance = make_provenance("multiply", json::object(), {a, b});
  return out;
}

TailCertificate power_transform(const TailCertificate& cert, double alpha) {
  if (!(alpha > 0)) throw Error(ErrorCode::NonPositiveAlpha, "alpha must be positive");
  validate(cert);
  if (alpha == 1.0) return cert;
  TailCertificate out = cert;
  out.size = SizeSequence::power(cert.size, alpha);
  out.c2 = std::pow(cert.c2, alpha);
  out.f = RateFunction::arg_power(cert.f, 1.0 / alpha);
  out.ceiling = map_ceiling(cert, [alpha](const RateSequence& r) { return RateSequence::power(r, alpha); });
  out.provenance = make_provenance("power_transform", {{"alpha", alpha}}, {cert});
  return out;
}

SmallnessWitness continuous_transform_o(const SmallnessWitness& witness,
                                        const std::function<double(double)>& modulus) {
  if (witness.direction != Direction::ToZero) {
    throw Error(ErrorCode::InvalidArgument, "continuous transform needs a witness tending to zero");
  }
  if (!(std::abs(modulus(0.0)) <= 1e-12)) throw Error(ErrorCode::BadModulus, "modulus must vanish at 0");
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 12; ++k) {
    const double v = modulus(std::pow(10.0, -k));
    if (!(v >= 0) || v > prev * (1 + 1e-12)) {
      throw Error(ErrorCode::BadModulus, "modulus must be nonnegative and shrink toward 0");
    }
    prev = v;
  }
  if (prev > 1e-6) throw Error(ErrorCode::BadModulus, "modulus does not vanish at 0 on the probe grid");

  SmallnessWitness out;
  const double c = witness.threshold;
  auto w = witness.w;
  out.w = [w, c, modulus](double n) { return modulus(c * w(n)); };
  out.direction = Direction::ToZero;
  out.threshold = 1.0;
  out.description = "omega(" + fmt(c) + " * " + witness.description + ")";
  return out;
}

TailCertificate truncate(const TailCertificate& hat_cert, const DominationEvidence& dom,
                         const TruncateOptions& options) {
  validate(hat_cert);
  if (!(dom.rate == hat_cert.rate)) {
    throw Error(ErrorCode::MismatchedSizeOrRate, "domination evidence must use the certificate's rate");
  }
  TailCertificate out = hat_cert;
  out.c1 = hat_cert.c1 + 1.0;
  out.flavor = Flavor::OHat;
  const auto tc = RateSequence::truncation_ceiling(hat_cert.f, hat_cert.c2, dom.p, dom.rate);
  out.ceiling = hat_cert.flavor == Flavor::OHat && hat_cert.ceiling
                    ? RateSequence::min(*hat_cert.ceiling, tc)
                    : tc;

  if (hat_cert.concrete()) {
    const double level = hat_cert.f(hat_cert.c2);
    const auto top = static_cast<std::uint64_t>(options.n_probe_max);
    std::uint64_t last_fail = 0;
    bool failed_at_top = false;
    for (std::uint64_t n = hat_cert.n_threshold; n <= top; ++n) {
      const double nd = static_cast<double>(n);
      auto p = try_eval(dom.p, nd);
      if (!p) continue;
      if (*p < 0 || *p > 1) throw Error(ErrorCode::InvalidArgument, "p_n must lie in [0, 1]");
      const bool ok = *p == 0.0 || -std::log(*p) / dom.rate(nd) >= level;
      if (!ok) {
        last_fail = n;
        failed_at_top = true;
      } else {
        failed_at_top = false;
      }
    }
    if (failed_at_top) {
      throw Error(ErrorCode::DominationTooWeak,
                  "-log(p_n)/r_n stays below f(C2) up to n = " + fmt(options.n_probe_max));
    }
    out.n_threshold = std::max(hat_cert.n_threshold, last_fail + 1);
  }

  out.provenance = make_provenance(
      "truncate",
      {{"p", dom.p.to_json()}, {"rate", dom.rate.to_json()}, {"n_probe_max", options.n_probe_max}},
      {hat_cert});
  return out;
}

TailCertificate strengthen_to_all_n(const TailCertificate& cert, bool size_never_zero) {
  if (!size_never_zero) {
    throw Error(ErrorCode::MissingAssertion, "strengthening to all n needs P(Y_n = 0) = 0");
  }
  if (cert.flavor == Flavor::O && cert.n_threshold == 1) return cert;
  TailCertificate out = cert;
  out.flavor = Flavor::O;
  out.n_threshold = 1;
  out.ceiling.reset();
  out.provenance = make_provenance(
      "strengthen_to_all_n", {{"size_never_zero", true}}, {cert},
      {"constants for n < " + std::to_string(cert.n_threshold) +
           " are absorbed by taking the maximum over those finitely many n; the stored C2 is not "
           "enlarged accordingly"});
  return out;
}

TailCertificate relax_to_hat(const TailCertificate& cert) {
  if (cert.flavor == Flavor::OHat) return cert;
  TailCertificate out = cert;
  out.flavor = Flavor::OHat;
  out.ceiling = RateSequence::unbounded();
  out.provenance = make_provenance("relax_to_hat", json::object(), {cert});
  return out;
}

namespace {

TailCertificate max_over_index(const UniformCertificate& u, double kappa, const EvalRange& range) {
  if (!(kappa >= 0)) throw Error(ErrorCode::InvalidArgument, "kappa must be >= 0");
  const auto& m = u.member;
  validate(m);
  for (double n : range.ns) {
    if (n < static_cast<double>(m.n_threshold)) continue;
    auto card = try_eval(u.cardinality, n);
    auto r = try_eval(m.rate, n);
    if (!card || !r) continue;
    if (*card < 1) throw Error(ErrorCode::InvalidArgument, "index set must be non-empty");
    if (std::log(*card) > kappa * *r * (1 + 1e-12) + 1e-12) {
      throw Error(ErrorCode::CardinalityTooLarge,
                  "log|Lambda_n| = " + fmt(std::log(*card)) + " exceeds kappa * r_n = " +
                      fmt(kappa * *r) + " at n = " + fmt(n));
    }
  }
  TailCertificate out = m;
  out.size = u.index_sizes ? SizeSequence::max(*u.index_sizes) : m.size;
  out.f = RateFunction::shifted(m.f, kappa);
  if (m.f.is_concrete() && std::isfinite(m.c2)) {
    auto c2 = first_reaching(m.f, kappa + 1.0, m.c2, m.c2 * 1e15);
    if (!c2) {
      throw Error(ErrorCode::CardinalityTooLarge, "f never reaches kappa + 1 in the search window");
    }
    out.c2 = *c2;
  } else {
    out.c2 = kNaN;
  }
  return out;
}

json uniform_params(const UniformCertificate& u, double kappa, const EvalRange& range) {
  return {{"kappa", kappa},
          {"cardinality", u.cardinality.to_json()},
          {"index_sizes", sizes_json(u.index_sizes)},
          {"range", range_json(range)}};
}

}  // namespace

TailCertificate finite_max(const UniformCertificate& u, double kappa, const EvalRange& range) {
  TailCertificate out = max_over_index(u, kappa, range);
  out.provenance = make_provenance("finite_max", uniform_params(u, kappa, range), {u.member});
  return out;
}

TailCertificate covering_supremum(const UniformCertificate& net_cert, double kappa,
                                  const TailCertificate& lip_cert, const SizeSequence& eps,
                                  bool lipschitz_asserted, const EvalRange& range) {
  if (!lipschitz_asserted) {
    throw Error(ErrorCode::MissingLipschitzAssertion,
                "covering bound needs the self-bounding Lipschitz condition to be asserted");
  }
  validate(lip_cert, range);
  const TailCertificate mx = max_over_index(net_cert, kappa, range);

  TailCertificate out = mx;
  const auto scale2 = [](const RateSequence& r) { return RateSequence::scaled(r, 2.0); };
  if (auto z = lip_cert.size.constant_value(); z && *z == 0.0) {
    out.c1 = 2.0 * mx.c1;
    out.c2 = 2.0 * mx.c2;
    out.f = RateFunction::rescaled(mx.f, 2.0);
    out.ceiling = map_ceiling(mx, scale2);
  } else {
    out.size = SizeSequence::sum({mx.size, SizeSequence::product({eps, lip_cert.size})});
    out.rate = RateSequence::min(mx.rate, lip_cert.rate);
    out.c1 = 2.0 * std::max(mx.c1, lip_cert.c1);
    out.c2 = 2.0 * nan_max(mx.c2, lip_cert.c2);
    out.f = RateFunction::rescaled(RateFunction::min(mx.f, lip_cert.f), 2.0);
    auto ceiling = min_ceiling(mx, lip_cert);
    if (ceiling) ceiling = scale2(*ceiling);
    combine_flavor(out, mx, lip_cert, ceiling);
  }
  json params = uniform_params(net_cert, kappa, range);
  params["eps"] = eps.to_json();
  out.provenance = make_provenance("covering_supremum", params, {net_cert.member, lip_cert});
  return out;
}

TailCertificate dominate_size(const TailCertificate& cert, const SizeSequence& new_size, double k,
                              const EvalRange& range) {
  if (!(k > 0)) throw Error(ErrorCode::InvalidArgument, "domination constant must be positive");
  for (double n : range.ns) {
    if (n < static_cast<double>(cert.n_threshold)) continue;
    auto y = try_eval(cert.size, n);
    auto z = try_eval(new_size, n);
    if (!y || !z) continue;
    if (*y > k * *z * (1 + 1e-12)) {
      throw Error(ErrorCode::InvalidArgument,
                  "size " + fmt(*y) + " exceeds K * new size " + fmt(k * *z) + " at n = " + fmt(n));
    }
  }
  TailCertificate out = cert;
  out.size = new_size;
  out.c2 = cert.c2 * k;
  out.f = RateFunction::rescaled(cert.f, k);
  out.ceiling = map_ceiling(cert, [k](const RateSequence& r) { return RateSequence::scaled(r, k); });
  out.provenance = make_provenance(
      "dominate_size", {{"size", new_size.to_json()}, {"k", k}, {"range", range_json(range)}}, {cert});
  return out;
}

ThetaCertificate theta_pair(const TailCertificate& upper, const LowerTailCertificate& lower) {
  if (!(upper.size == lower.size) || !(upper.rate == lower.rate)) {
    throw Error(ErrorCode::MismatchedSizeOrRate, "upper and lower certificates must share size and rate");
  }
  validate(upper);
  validate(lower);
  return ThetaCertificate{upper, lower};
}

namespace {

TailCertificate replay(const TailCertificate& cert, const Bindings& values);

}  // namespace

TailCertificate bind_constants(const TailCertificate& cert, const Bindings& values) {
  TailCertificate out = replay(cert, values);
  if (cert.provenance && out.provenance) {
    for (const auto& note : cert.provenance->notes) {
      const auto& have = out.provenance->notes;
      if (std::find(have.begin(), have.end(), note) == have.end()) out = with_note(out, note);
    }
  }
  return out;
}

namespace {

TailCertificate replay(const TailCertificate& cert, const Bindings& values) {
  const auto& prov = cert.provenance;
  if (!prov || prov->children.empty()) {
    TailCertificate out = cert;
    out.f = cert.f.bind(values);
    return out;
  }
  std::vector<TailCertificate> kids;
  for (const auto& c : prov->children) kids.push_back(bind_constants(c, values));
  const auto& p = prov->params;
  const auto& op = prov->op;

  if (op == "add") return add(kids.at(0), kids.at(1));
  if (op == "multiply") return multiply(kids.at(0), kids.at(1));
  if (op == "power_transform") return power_transform(kids.at(0), p.at("alpha").get<double>());
  if (op == "truncate") {
    DominationEvidence dom{SizeSequence::from_json(p.at("p")), RateSequence::from_json(p.at("rate"))};
    return truncate(kids.at(0), dom, {p.at("n_probe_max").get<double>()});
  }
  if (op == "strengthen_to_all_n") return strengthen_to_all_n(kids.at(0), true);
  if (op == "relax_to_hat") return relax_to_hat(kids.at(0));
  if (op == "finite_max" || op == "covering_supremum") {
    UniformCertificate u{kids.at(0), SizeSequence::from_json(p.at("cardinality")),
                         sizes_from(p.at("index_sizes"))};
    const double kappa = p.at("kappa").get<double>();
    const EvalRange range = range_from(p.at("range"));
    if (op == "finite_max") return finite_max(u, kappa, range);
    return covering_supremum(u, kappa, kids.at(1), SizeSequence::from_json(p.at("eps")), true, range);
  }
  if (op == "dominate_size") {
    return dominate_size(kids.at(0), SizeSequence::from_json(p.at("size")), p.at("k").get<double>(),
                         range_from(p.at("range")));
  }
  throw Error(ErrorCode::InvalidArgument, "cannot replay provenance operation '" + op + "'");
}

}  // namespace

}  // namespace tailcert
