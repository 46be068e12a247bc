#include "tailcert/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tailcert/document.hpp"
#include "tailcert/error.hpp"

namespace tailcert {

namespace {

json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double num_from(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::ParseError, "bad number '" + s + "'");
  }
  return j.get<double>();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* status_name(ProbeStatus s) {
  switch (s) {
    case ProbeStatus::Checked: return "checked";
    case ProbeStatus::Skipped: return "skipped";
    case ProbeStatus::Unresolved: return "unresolved";
  }
  return "?";
}

json tail_entry(const LabeledTail& lt) {
  const auto& tail = lt.tail;
  json probes = json::array();
  for (std::size_t i = 0; i < tail.probes.size(); ++i) {
    json p = to_json(tail.probes[i]);
    p["ucb"] = num(tail.probes[i].ucb);
    if (lt.verdict && i < lt.verdict->checks.size()) {
      const auto& c = lt.verdict->checks[i];
      p["status"] = status_name(c.status);
      p["bound"] = num(c.bound);
      p["slack"] = num(c.slack);
    }
    probes.push_back(std::move(p));
  }
  json t = to_json(tail);
  t["probes"] = probes;
  json e{{"label", lt.label}, {"digest", digest(to_json(tail))}, {"tail", t}};
  if (lt.verdict) e["verdict"] = to_json(*lt.verdict);
  return e;
}

}  // namespace

json report_to_json(const ExperimentReport& r) {
  json doc;
  doc["tool"] = {{"name", "tailcert"}, {"version", kToolVersion}};
  doc["config"] = to_json(r.config);
  doc["certificates"] = r.certificates;
  json tails = json::array();
  for (const auto& t : r.tails) tails.push_back(tail_entry(t));
  doc["tails"] = tails;
  doc["diagnostics"] = r.diagnostics;
  doc["stats"] = r.stats;
  doc["nets"] = r.nets;
  doc["notes"] = r.notes;
  json checks = json::object();
  for (const auto& [k, v] : r.checks) checks[k] = v;
  doc["checks"] = checks;
  json plot = json::array();
  for (const auto& p : r.plot) plot.push_back({num(p.x), num(p.y), p.series});
  doc["plot"] = plot;
  doc["pass"] = r.pass;
  doc["run"] = {{"wall_seconds", r.wall_seconds}, {"workers", r.workers}};
  doc["content_digest"] = content_digest(doc);
  return doc;
}

std::string content_digest(const json& report_doc) {
  json body = report_doc;
  body.erase("run");
  body.erase("content_digest");
  return digest(body);
}

std::string report_csv(const json& doc) {
  std::string out = "tail,n,t,m,k,ucb,bound,slack\n";
  for (const auto& e : doc.at("tails")) {
    const auto label = e.at("label").get<std::string>();
    for (const auto& p : e.at("tail").at("probes")) {
      const double bound = p.contains("bound") ? num_from(p["bound"]) : std::nan("");
      const double slack = p.contains("slack") ? num_from(p["slack"]) : std::nan("");
      out += label + "," + fmt(p.at("n").get<double>()) + "," + fmt(p.at("t").get<double>()) + "," +
             std::to_string(p.at("m").get<std::uint64_t>()) + "," + std::to_string(p.at("k").get<std::uint64_t>()) +
             "," + fmt(num_from(p.at("ucb"))) + "," + fmt(bound) + "," + fmt(slack) + "\n";
    }
  }
  return out;
}

std::string report_plotdata(const json& doc) {
  std::string out = "# report " + doc.value("content_digest", content_digest(doc)) + "\nx,y,series\n";
  for (const auto& p : doc.at("plot")) {
    out += fmt(num_from(p.at(0))) + "," + fmt(num_from(p.at(1))) + "," + p.at(2).get<std::string>() + "\n";
  }
  return out;
}

EmitFormat emit_format_from_string(const std::string& s) {
  if (s == "json" || s == "structured-text") return EmitFormat::Json;
  if (s == "csv") return EmitFormat::Csv;
  if (s == "plotdata") return EmitFormat::Plotdata;
  throw Error(ErrorCode::InvalidArgument, "unknown format '" + s + "'");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error(ErrorCode::IoFailure, "write to " + path.string() + " failed");
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void emit(const json& doc, EmitFormat format, const std::filesystem::path& path) {
  switch (format) {
    case EmitFormat::Json: write_text_file(path, doc.dump(2) + "\n"); return;
    case EmitFormat::Csv: write_text_file(path, report_csv(doc)); return;
    case EmitFormat::Plotdata: write_text_file(path, report_plotdata(doc)); return;
  }
}

EmpiricalTail tail_from_json(const json& j) {
  try {
    EmpiricalTail t;
    t.sampler_digest = j.value("sampler_digest", "");
    t.joint = j.value("joint", false);
    t.delta = j.value("delta", 0.01);
    t.seed = j.value("seed", std::uint64_t{0});
    for (const auto& p : j.at("probes")) {
      TailProbe q;
      q.n = p.at("n").get<double>();
      q.t = p.at("t").get<double>();
      q.trials = p.at("m").get<std::uint64_t>();
      q.exceedances = p.at("k").get<std::uint64_t>();
      q.ucb = num_from(p.at("ucb"));
      q.size_value = p.value("size_value", 1.0);
      t.probes.push_back(q);
    }
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad tail document: ") + e.what());
  }
}

}  // namespace tailcert
