#include "tailcert/document.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "tailcert/error.hpp"

namespace tailcert {

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json provenance_json(const Provenance& p) {
  json children = json::array();
  for (const auto& c : p.children) {
    children.push_back({{"digest", certificate_digest(c)}, {"certificate", to_json(c)}});
  }
  return {{"op", p.op}, {"params", p.params}, {"notes", p.notes}, {"children", children}};
}

std::shared_ptr<const Provenance> provenance_from(const json& j) {
  auto p = std::make_shared<Provenance>();
  p->op = j.at("op").get<std::string>();
  p->params = j.value("params", json::object());
  p->notes = j.value("notes", std::vector<std::string>{});
  for (const auto& c : j.value("children", json::array())) {
    p->children.push_back(certificate_from_json(c.at("certificate")));
  }
  return p;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest(const json& doc) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(doc.dump())));
  return buf;
}

json constants_status(const TailCertificate& cert) {
  auto names = cert.unknown_constants();
  if (names.empty()) return "concrete";
  return {{"unknown_positive", std::vector<std::string>(names.begin(), names.end())}};
}

json to_json(const TailCertificate& cert) {
  json j{{"size", cert.size.to_json()},
         {"rate", cert.rate.to_json()},
         {"c1", cert.c1},
         {"c2", number_or_null(cert.c2)},
         {"n_threshold", cert.n_threshold},
         {"f", cert.f.to_json()},
         {"flavor", to_string(cert.flavor)},
         {"ceiling", cert.ceiling ? cert.ceiling->to_json() : json(nullptr)},
         {"constants_status", constants_status(cert)}};
  j["provenance"] = cert.provenance ? provenance_json(*cert.provenance) : json(nullptr);
  return j;
}

TailCertificate certificate_from_json(const json& j) {
  try {
    TailCertificate c;
    c.size = SizeSequence::from_json(j.at("size"));
    c.rate = RateSequence::from_json(j.at("rate"));
    c.c1 = j.at("c1").get<double>();
    c.c2 = number_from(j.at("c2"));
    c.n_threshold = j.at("n_threshold").get<std::uint64_t>();
    c.f = RateFunction::from_json(j.at("f"));
    c.flavor = flavor_from_string(j.at("flavor").get<std::string>());
    if (j.contains("ceiling") && !j.at("ceiling").is_null()) {
      c.ceiling = RateSequence::from_json(j.at("ceiling"));
    }
    if (j.contains("provenance") && !j.at("provenance").is_null()) {
      c.provenance = provenance_from(j.at("provenance"));
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("certificate document: ") + e.what());
  }
}

std::string certificate_digest(const TailCertificate& cert) {
  json j = to_json(cert);
  j.erase("provenance");
  if (cert.provenance) j["op"] = cert.provenance->op;
  return digest(j);
}

json to_json(const LowerTailCertificate& cert) {
  return {{"size", cert.size.to_json()}, {"rate", cert.rate.to_json()},
          {"c1", cert.c1},               {"c2", cert.c2},
          {"n_threshold", cert.n_threshold}, {"h", cert.h.to_json()}};
}

LowerTailCertificate lower_certificate_from_json(const json& j) {
  try {
    LowerTailCertificate c;
    c.size = SizeSequence::from_json(j.at("size"));
    c.rate = RateSequence::from_json(j.at("rate"));
    c.c1 = j.at("c1").get<double>();
    c.c2 = j.at("c2").get<double>();
    c.n_threshold = j.at("n_threshold").get<std::uint64_t>();
    c.h = RateFunction::from_json(j.at("h"));
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("lower-tail document: ") + e.what());
  }
}

json to_json(const UniformCertificate& u) {
  json j{{"member", to_json(u.member)}, {"cardinality", u.cardinality.to_json()}};
  if (u.index_sizes) {
    json sizes = json::array();
    for (const auto& s : *u.index_sizes) sizes.push_back(s.to_json());
    j["index_sizes"] = sizes;
  }
  return j;
}

UniformCertificate uniform_certificate_from_json(const json& j) {
  UniformCertificate u;
  u.member = certificate_from_json(j.at("member"));
  u.cardinality = SizeSequence::from_json(j.at("cardinality"));
  if (j.contains("index_sizes")) {
    std::vector<SizeSequence> sizes;
    for (const auto& s : j.at("index_sizes")) sizes.push_back(SizeSequence::from_json(s));
    u.index_sizes = std::move(sizes);
  }
  return u;
}

json to_json(const DominationEvidence& d) { return {{"p", d.p.to_json()}, {"rate", d.rate.to_json()}}; }

DominationEvidence domination_from_json(const json& j) {
  return {SizeSequence::from_json(j.at("p")), RateSequence::from_json(j.at("rate"))};
}

json to_json(const ThetaCertificate& t) { return {{"upper", to_json(t.upper)}, {"lower", to_json(t.lower)}}; }

}  // namespace tailcert
