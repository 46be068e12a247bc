// tailcert: run scenarios, emit report files, build nets, fit and check
// certificates.  Exit status 0 means every verdict passed, 1 means some
// verdict failed, 2 means the input could not be processed.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tailcert/document.hpp"
#include "tailcert/error.hpp"
#include "tailcert/kernels.hpp"
#include "tailcert/mc_verify.hpp"
#include "tailcert/nets.hpp"
#include "tailcert/report.hpp"
#include "tailcert/scenarios.hpp"

namespace fs = std::filesystem;
using namespace tailcert;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Override the configured seed");
  cmd->add_option("--out", o.out, "Output directory (run) or file");
  cmd->add_option("--workers", o.workers, "Worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
}

// A member that is either an inline document or a path to one.
json inline_or_file(const json& j, const fs::path& base) {
  if (j.is_string()) {
    fs::path p = j.get<std::string>();
    if (p.is_relative()) p = base / p;
    return read_json_file(p);
  }
  return j;
}

EmpiricalTail resolve_tail(const json& cfg, const fs::path& base) {
  const json t = inline_or_file(cfg.at("tail"), base);
  if (t.contains("report")) {
    fs::path p = t.at("report").get<std::string>();
    if (p.is_relative()) p = base / p;
    const json rep = read_json_file(p);
    const auto label = t.at("label").get<std::string>();
    for (const auto& e : rep.at("tails")) {
      if (e.at("label") == label) return tail_from_json(e.at("tail"));
    }
    throw Error(ErrorCode::InvalidArgument, "report has no tail labelled '" + label + "'");
  }
  return tail_from_json(t);
}

void write_or_print(const std::optional<std::string>& out, const std::string& text) {
  if (out) {
    write_text_file(*out, text);
  } else {
    std::cout << text;
  }
}

int cmd_run(const std::string& config_path, const Overrides& o) {
  auto cfg = config_from_json(read_json_file(config_path));
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  const auto report = run_scenario(cfg);
  const json doc = report_to_json(report);
  const fs::path dir = cfg.out;
  emit(doc, EmitFormat::Json, dir / "report.json");
  emit(doc, EmitFormat::Csv, dir / "probes.csv");
  emit(doc, EmitFormat::Plotdata, dir / "plotdata.csv");
  for (const auto& t : report.tails) {
    if (!t.verdict) continue;
    std::printf("%-28s %s  worst slack %.4g  (%zu checked, %zu unresolved, %zu skipped)\n", t.label.c_str(),
                t.verdict->pass ? "PASS" : "FAIL", t.verdict->worst_slack, t.verdict->checked, t.verdict->unresolved,
                t.verdict->skipped);
  }
  for (const auto& [name, ok] : report.checks) std::printf("%-28s %s\n", name.c_str(), ok ? "PASS" : "FAIL");
  std::printf("%s: %s in %.1fs, report %s\n", cfg.scenario.c_str(), report.pass ? "PASS" : "FAIL",
              report.wall_seconds, doc.at("content_digest").get<std::string>().c_str());
  return report.pass ? 0 : 1;
}

int cmd_emit(const std::string& report_path, const std::string& format, const Overrides& o) {
  const json doc = read_json_file(report_path);
  const auto f = emit_format_from_string(format);
  if (o.out) {
    emit(doc, f, *o.out);
  } else {
    std::cout << (f == EmitFormat::Json ? doc.dump(2) + "\n" : f == EmitFormat::Csv ? report_csv(doc) : report_plotdata(doc));
  }
  return doc.value("pass", false) ? 0 : 1;
}

int cmd_net(const std::string& config_path, const Overrides& o) {
  const json cfg = read_json_file(config_path);
  const auto space = space_from_json(cfg.at("space"));
  NetOptions opt;
  opt.strategy = net_strategy_from_string(cfg.value("strategy", "greedy_packing"));
  opt.streak_factor = cfg.value("streak_factor", opt.streak_factor);
  const std::uint64_t seed = o.seed.value_or(cfg.value("seed", std::uint64_t{1}));
  Net net = build_net(space, cfg.at("epsilon").get<double>(), seed, opt);
  net.verification = verify_covering(net, cfg.value("probes", std::uint64_t{100000}), substream_seed(seed, 1),
                                     cfg.value("tolerance", 0.05));
  write_or_print(o.out ? o.out : cfg.contains("out") ? std::optional<std::string>(cfg.at("out").get<std::string>())
                                                     : std::nullopt,
                 net_to_csv(net));
  const auto& v = *net.verification;
  std::fprintf(stderr, "net: %zu points (bound %.4g), max probe distance %.4g, %s\n", net.size(),
               space.cardinality_bound(net.epsilon), v.max_probe_distance, v.pass ? "PASS" : "FAIL");
  return v.pass ? 0 : 1;
}

FitSearch search_from(const json& cfg) {
  FitSearch s;
  if (cfg.contains("search")) {
    const auto& j = cfg.at("search");
    s.lo = j.value("lo", s.lo);
    s.hi = j.value("hi", s.hi);
    s.per_decade = j.value("per_decade", s.per_decade);
  }
  return s;
}

int cmd_fit(const std::string& config_path, const Overrides& o) {
  const json cfg = read_json_file(config_path);
  const fs::path base = fs::path(config_path).parent_path();
  const auto shape = certificate_from_json(inline_or_file(cfg.at("certificate"), base));
  const auto tail = resolve_tail(cfg, base);
  const auto fit = fit_constants(shape, tail, search_from(cfg));
  const json out{{"certificate", to_json(fit.cert)}, {"verdict", to_json(fit.verdict)}};
  write_or_print(o.out, out.dump(2) + "\n");
  return fit.verdict.pass ? 0 : 1;
}

int cmd_check(const std::string& config_path, const Overrides& o) {
  const json cfg = read_json_file(config_path);
  const fs::path base = fs::path(config_path).parent_path();
  const auto cert = certificate_from_json(inline_or_file(cfg.at("certificate"), base));
  const auto tail = resolve_tail(cfg, base);
  const auto v = check_certificate(cert, tail);
  write_or_print(o.out, to_json(v).dump(2) + "\n");
  if (o.out) std::printf("%s  worst slack %.4g\n", v.pass ? "PASS" : "FAIL", v.worst_slack);
  return v.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail certificates: build, simulate, check."};
  app.require_subcommand(1);
  Overrides o;
  std::string config, report, format = "csv";

  auto* run = app.add_subcommand("run", "Run a scenario from a JSON config");
  run->add_option("config", config, "Scenario config")->required()->check(CLI::ExistingFile);
  add_overrides(run, o);

  auto* em = app.add_subcommand("emit", "Write csv, plotdata or json from a report");
  em->add_option("report", report, "report.json")->required()->check(CLI::ExistingFile);
  em->add_option("--format", format, "json | csv | plotdata");
  add_overrides(em, o);

  auto* net = app.add_subcommand("net", "Build and verify an epsilon-net");
  net->add_option("config", config, "Net config")->required()->check(CLI::ExistingFile);
  add_overrides(net, o);

  auto* fit = app.add_subcommand("fit", "Fit symbolic constants of a certificate to a tail");
  fit->add_option("config", config, "Fit config")->required()->check(CLI::ExistingFile);
  add_overrides(fit, o);

  auto* chk = app.add_subcommand("check", "Check a concrete certificate against a tail");
  chk->add_option("config", config, "Check config")->required()->check(CLI::ExistingFile);
  add_overrides(chk, o);

  CLI11_PARSE(app, argc, argv);
  if (o.workers) set_worker_count(*o.workers);

  try {
    if (*run) return cmd_run(config, o);
    if (*em) return cmd_emit(report, format, o);
    if (*net) return cmd_net(config, o);
    if (*fit) return cmd_fit(config, o);
    if (*chk) return cmd_check(config, o);
  } catch (const Error& e) {
    std::fprintf(stderr, "tailcert: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "tailcert: %s\n", e.what());
    return 2;
  }
  return 2;
}
