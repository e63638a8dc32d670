#include "corrdetect/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "corrdetect/detectors.hpp"
#include "corrdetect/errors.hpp"
#include "corrdetect/exponents.hpp"
#include "corrdetect/io.hpp"
#include "corrdetect/likelihood.hpp"
#include "corrdetect/parallel.hpp"
#include "corrdetect/risk.hpp"
#include "corrdetect/verify.hpp"

namespace corrdetect {

namespace {

using io::json;

constexpr std::uint64_t kDefaultSeed = 20240517;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  unsigned threads = 0;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::size_t> trials;
  std::string output;
  std::string format;
  std::string config;
};

struct PointOptions {
  std::size_t n = 0, d = 1, k = 0;
  std::optional<double> rho, rho2;
  int rho_sign = 1;
  double tau = 0.0;
  std::size_t calibration_trials = kDefaultCalibrationTrials;

  ModelParams params() const {
    if (rho.has_value() == rho2.has_value()) throw UsageError("give exactly one of --rho and --rho2");
    ModelParams p;
    try {
      if (rho) {
        p = {n, d, k == 0 ? n : k, *rho};
        p.validate();
      } else {
        p = ModelParams::from_rho2(n, d, k == 0 ? n : k, *rho2, rho_sign);
      }
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    return p;
  }
};

std::string context(const ModelParams& p) {
  std::ostringstream os;
  os.precision(17);
  os << "(n=" << p.n << ", d=" << p.d << ", k=" << p.k << ", rho=" << p.rho << ")";
  return os.str();
}

// Appends "--key value..." for config entries whose option was not given on
// the command line.
std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open config file '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(f);
  } catch (const std::exception& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  std::vector<std::string> extra;
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (key == "config" || given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back(flag);
    } else if (value.is_array()) {
      extra.push_back(flag);
      for (const auto& v : value) extra.push_back(scalar(v));
    } else {
      extra.push_back(flag);
      extra.push_back(scalar(value));
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

// Destination for machine-readable output.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback, bool append) : os_(&fallback) {
    if (!path.empty()) {
      file_.open(path, append ? std::ios::app : std::ios::trunc);
      if (!file_) throw std::runtime_error("cannot open output file '" + path + "'");
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

std::string resolve_format(const Common& c, const char* fallback) { return c.format.empty() ? fallback : c.format; }

int do_sweep(const SweepSpec& spec, const Common& common, bool resume, std::ostream& out, std::ostream& err) {
  const std::string format = resolve_format(common, "csv");
  std::vector<SweepRow> previous;
  bool have_header = false;
  if (resume) {
    if (common.output.empty()) throw UsageError("--resume needs --output");
    if (format != "csv") throw UsageError("--resume supports the csv format only");
    std::ifstream in(common.output);
    if (in) {
      previous = io::read_sweep_csv(in);
      in.clear();
      in.seekg(0, std::ios::end);
      have_header = in.tellg() > 0;
    }
  }
  const auto done = io::completed_keys(previous);
  std::size_t total = spec.n.size() * spec.d.size() * spec.k.size() * spec.rho2.size() *
                      std::max<std::size_t>(1, spec.detectors.size());
  std::size_t finished = previous.size();

  if (format == "json") {
    auto rows = run_sweep(spec, done, [&](const SweepRow& r) {
      err << "[" << ++finished << "/" << total << "] n=" << r.n << " rho2=" << io::format_double(r.rho2) << " "
          << r.detector << " risk=" << io::format_double(r.risk) << (r.note.empty() ? "" : " (" + r.note + ")")
          << '\n';
    });
    Sink sink(common.output, out, false);
    sink.stream() << io::sweep_json(rows).dump(2) << '\n';
    return kExitOk;
  }

  Sink sink(common.output, out, resume);
  if (!have_header) io::write_sweep_header(sink.stream());
  std::size_t errors = 0;
  run_sweep(spec, done, [&](const SweepRow& r) {
    io::write_sweep_row(sink.stream(), r);
    sink.stream().flush();
    if (r.note.find(':') != std::string::npos) ++errors;
    err << "[" << ++finished << "/" << total << "] n=" << r.n << " rho2=" << io::format_double(r.rho2) << " "
        << r.detector << " risk=" << io::format_double(r.risk) << (r.note.empty() ? "" : " (" + r.note + ")") << '\n';
  });
  err << "sweep finished: " << finished << " rows";
  if (errors) err << ", " << errors << " with recorded errors";
  err << '\n';
  return kExitOk;
}

void add_point_options(CLI::App* sub, PointOptions& p) {
  sub->add_option("--n", p.n, "rows per database")->required()->check(CLI::PositiveNumber);
  sub->add_option("--d", p.d, "features per row")->check(CLI::PositiveNumber);
  sub->add_option("--k", p.k, "correlated rows (default n)");
  sub->add_option("--rho", p.rho, "correlation");
  sub->add_option("--rho2", p.rho2, "squared correlation");
  sub->add_option("--rho-sign", p.rho_sign, "sign of rho when --rho2 is given")->check(CLI::IsMember({-1, 1}));
}

json moment_entry(const std::string& method, const std::function<MomentEstimate()>& fn, const ModelParams& p) {
  try {
    return io::to_json(fn(), p);
  } catch (const std::exception& e) {
    return {{"method", method}, {"error", e.what()}};
  }
}

int cmd_second_moment(const PointOptions& po, const std::string& method, double tol, const Common& common,
                      std::ostream& out, std::ostream& err) {
  const ModelParams p = po.params();
  const std::size_t trials = common.trials.value_or(100000);
  static const std::vector<std::string> known{"all", "partition", "equiv", "cycle", "cycle-mc", "upper", "mc"};
  if (std::find(known.begin(), known.end(), method) == known.end()) throw UsageError("unknown method '" + method + "'");
  auto want = [&](const char* m) { return method == m || (method == "all" && std::string(m) != "mc" && std::string(m) != "cycle-mc"); };

  json results = json::array();
  if (want("partition")) {
    results.push_back(moment_entry("partition_sum", [&] {
      if (p.d != 1 || p.k != p.n) throw DomainError("partition sum needs d = 1 and k = n");
      return second_moment_partition_sum(p.rho, p.n, tol);
    }, p));
  }
  if (want("equiv")) {
    results.push_back(moment_entry("equiv_sum", [&] {
      return second_moment_equiv_sum(p, equiv_sum_terms_for(p, tol));
    }, p));
  }
  if (want("cycle")) {
    results.push_back(moment_entry("cycle_enumerate", [&] { return second_moment_cycle(p, CycleMode::enumerate); }, p));
  }
  if (want("cycle-mc")) {
    results.push_back(moment_entry("cycle_mc", [&] {
      return second_moment_cycle(p, CycleMode::mc, trials, common.seed);
    }, p));
  }
  if (want("upper")) {
    results.push_back(moment_entry("closed_product", [&] {
      MomentEstimate m;
      m.method = "closed_product";
      m.value = second_moment_upper_bound(p);
      return m;
    }, p));
  }
  if (want("mc")) {
    results.push_back(moment_entry("mc", [&] { return second_moment_mc(p, trials, common.seed); }, p));
  }

  std::size_t ok = 0;
  for (const auto& r : results) {
    if (r.contains("error")) {
      err << r["method"].get<std::string>() << ": " << r["error"].get<std::string>() << '\n';
    } else {
      ++ok;
      err << r["method"].get<std::string>() << ": " << r["value"].dump() << '\n';
    }
  }
  if (ok == 0) {
    err << "no method succeeded for " << context(p) << '\n';
    return kExitRuntime;
  }

  Sink sink(common.output, out, false);
  if (resolve_format(common, "json") == "json") {
    json doc{{"schema_version", io::kSchemaVersion}, {"kind", "second_moment_report"}, {"params", io::to_json(p)},
             {"results", results}};
    sink.stream() << doc.dump(2) << '\n';
  } else {
    sink.stream() << "method,value,tail_bound,stderr,trials,seed,terms,error\n";
    for (const auto& r : results) {
      auto f = [&](const char* key) -> std::string {
        if (!r.contains(key) || r[key].is_null()) return "";
        return r[key].is_string() ? r[key].get<std::string>() : r[key].dump();
      };
      sink.stream() << f("method") << ',' << f("value") << ',' << f("tail_bound") << ',' << f("stderr") << ','
                    << f("trials") << ',' << f("seed") << ',' << f("terms") << ",\"" << f("error") << "\"\n";
    }
  }
  return kExitOk;
}

int cmd_bounds(const PointOptions& po, const Common& common, std::ostream& out, std::ostream& err) {
  const ModelParams p = po.params();
  json lbs = json::array();
  auto add = [&](const char* label, BoundMethod m) {
    try {
      const LowerBound b = risk_lower_bound(p, m);
      lbs.push_back(io::to_json(b));
      err << "R* >= " << io::format_double(b.value) << " via " << b.method << '\n';
    } catch (const std::exception& e) {
      lbs.push_back({{"method", label}, {"error", e.what()}});
      err << label << ": " << e.what() << " " << context(p) << '\n';
    }
  };
  add("partition", BoundMethod::partition);
  add("closed", BoundMethod::closed);
  if (p.n <= kCycleEnumerateMaxN) add("cycle", BoundMethod::cycle);

  json doc{{"schema_version", io::kSchemaVersion}, {"kind", "bounds"}, {"params", io::to_json(p)}, {"lower_bounds", lbs}};
  try {
    doc["conditions"] = io::to_json(regime_conditions(p));
  } catch (const std::exception& e) {
    doc["conditions"] = {{"error", e.what()}};
  }
  try {
    doc["exponent_profile"] = io::to_json(exponent_profile(po.tau, p.rho));
    doc["chernoff"] = {{"q_tail_bound", chernoff_tails(po.tau, p.rho, p.d).q_tail_bound},
                       {"p_lower_bound", chernoff_tails(po.tau, p.rho, p.d).p_lower_bound}};
  } catch (const std::exception& e) {
    doc["exponent_profile"] = {{"error", e.what()}};
  }

  Sink sink(common.output, out, false);
  if (resolve_format(common, "json") == "json") {
    sink.stream() << doc.dump(2) << '\n';
  } else {
    sink.stream() << "method,value,raw,second_moment,error\n";
    for (const auto& b : lbs) {
      if (b.contains("error")) {
        sink.stream() << b["method"].get<std::string>() << ",,,,\"" << b["error"].get<std::string>() << "\"\n";
      } else {
        sink.stream() << b["method"].get<std::string>() << ',' << b["value"].dump() << ',' << b["raw"].dump() << ','
                      << b["second_moment"].dump() << ",\n";
      }
    }
  }
  return kExitOk;
}

int cmd_thresholds(const PointOptions& po, const Common& common, std::ostream& out, std::ostream& err) {
  const ModelParams p = po.params();
  json doc{{"schema_version", io::kSchemaVersion}, {"kind", "thresholds"}, {"params", io::to_json(p)}};
  try {
    const ComparisonTestConfig cmp = comparison_threshold(p);
    const SumTestConfig sum = sum_threshold(p);
    const CountTestConfig cnt =
        calibrate_count(p, po.tau, common.trials.value_or(po.calibration_trials), common.seed);
    doc["comparison"] = io::to_json(cmp);
    doc["sum"] = {{"threshold", sum.threshold}, {"sign", sum.sign}};
    doc["count"] = io::to_json(cnt);
    doc["count"]["acceptance_threshold"] = cnt.acceptance_threshold(p.k);
    err << "comparison theta = " << io::format_double(cmp.theta) << ", count threshold k P/2 = "
        << io::format_double(cnt.acceptance_threshold(p.k)) << ", sum threshold = " << io::format_double(sum.threshold)
        << '\n';
  } catch (const DegenerateError& e) {
    err << "degenerate input " << context(p) << ": " << e.what() << '\n';
    return kExitRuntime;
  }
  Sink sink(common.output, out, false);
  if (resolve_format(common, "json") == "json") {
    sink.stream() << doc.dump(2) << '\n';
  } else {
    sink.stream() << "quantity,value\n"
                  << "theta," << doc["comparison"]["theta"].dump() << '\n'
                  << "count_acceptance," << doc["count"]["acceptance_threshold"].dump() << '\n'
                  << "p_rho_d," << doc["count"]["p_rho_d"].dump() << '\n'
                  << "q_rho_d," << doc["count"]["q_rho_d"].dump() << '\n'
                  << "sum_threshold," << doc["sum"]["threshold"].dump() << '\n';
  }
  return kExitOk;
}

int cmd_verify(bool quick, const Common& common, std::ostream& out, std::ostream& err) {
  const auto checks = run_verification(quick, common.seed);
  std::size_t failed = 0;
  for (const auto& c : checks) failed += c.passed ? 0 : 1;
  Sink sink(common.output, out, false);
  if (resolve_format(common, "text") == "json") {
    json arr = json::array();
    for (const auto& c : checks) arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    sink.stream() << json{{"schema_version", io::kSchemaVersion}, {"kind", "verify"}, {"quick", quick}, {"checks", arr}}.dump(2)
                  << '\n';
  } else {
    for (const auto& c : checks) sink.stream() << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  }
  err << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  return failed ? kExitVerifyFailed : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Detection of correlated Gaussian databases: experiments, bounds and verification", "corrdetect"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  if (const char* env = std::getenv("CORRDETECT_SEED")) {
    try {
      common.seed = std::stoull(env);
    } catch (const std::exception&) {
      err << "CORRDETECT_SEED is not an unsigned integer\n";
      return kExitUsage;
    }
  }
  app.add_option("--threads", common.threads, "worker threads (0 = all cores)");
  app.add_option("--seed", common.seed, "master seed");
  app.add_option("--trials", common.trials, "Monte Carlo trials");
  app.add_option("--output", common.output, "output file (default stdout)");
  app.add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json", "text"}));
  app.add_option("--config", common.config, "JSON file supplying options not given on the command line");

  // risk-curve
  auto* rc = app.add_subcommand("risk-curve", "count-test risk against rho^2 (n = 100, d = 1, k = n, tau = 0 by default)");
  std::size_t rc_n = 100, rc_d = 1, rc_k = 0, rc_points = 13;
  double rc_tau = 0.0;
  std::vector<std::string> rc_detectors{"count"};
  std::size_t rc_cal = kDefaultCalibrationTrials;
  bool rc_resume = false;
  rc->add_option("--n", rc_n)->check(CLI::PositiveNumber);
  rc->add_option("--d", rc_d)->check(CLI::PositiveNumber);
  rc->add_option("--k", rc_k, "0 means k = n");
  rc->add_option("--points", rc_points)->check(CLI::PositiveNumber);
  rc->add_option("--tau", rc_tau);
  rc->add_option("--detectors", rc_detectors);
  rc->add_option("--calibration-trials", rc_cal)->check(CLI::PositiveNumber);
  rc->add_flag("--resume", rc_resume, "skip rows already present in --output");

  // sweep
  auto* sw = app.add_subcommand("sweep", "risk and bounds over a parameter grid");
  SweepSpec spec;
  spec.rho2.clear();
  bool sw_resume = false;
  sw->add_option("--n", spec.n)->required();
  sw->add_option("--d", spec.d);
  sw->add_option("--k", spec.k, "0 means k = n");
  sw->add_option("--rho2", spec.rho2)->required();
  sw->add_option("--detectors", spec.detectors, "count comparison sum coin always0 always1, or none");
  sw->add_option("--tau", spec.tau);
  sw->add_option("--calibration-trials", spec.calibration_trials)->check(CLI::PositiveNumber);
  sw->add_option("--rho-sign", spec.rho_sign)->check(CLI::IsMember({-1, 1}));
  sw->add_flag("--resume", sw_resume, "skip rows already present in --output");

  // second-moment
  auto* sm = app.add_subcommand("second-moment", "E_H0[L^2] by the available methods");
  PointOptions sm_p;
  std::string sm_method = "all";
  double sm_tol = 1e-12;
  add_point_options(sm, sm_p);
  sm->add_option("--method", sm_method, "all, partition, equiv, cycle, cycle-mc, upper or mc");
  sm->add_option("--tol", sm_tol, "absolute tail tolerance for the series")->check(CLI::PositiveNumber);

  // bounds
  auto* bd = app.add_subcommand("bounds", "risk lower bounds, regime conditions and Chernoff exponents");
  PointOptions bd_p;
  add_point_options(bd, bd_p);
  bd->add_option("--tau", bd_p.tau);

  // thresholds
  auto* th = app.add_subcommand("thresholds", "calibrated thresholds of the count, comparison and sum tests");
  PointOptions th_p;
  add_point_options(th, th_p);
  th->add_option("--tau", th_p.tau);
  th->add_option("--calibration-trials", th_p.calibration_trials)->check(CLI::PositiveNumber);

  // verify
  auto* vf = app.add_subcommand("verify", "cross-oracle verification suite");
  bool quick = false;
  vf->add_flag("--quick", quick, "reduced grids");

  try {
    std::vector<std::string> args = apply_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  set_default_threads(common.threads);
  try {
    if (*rc) {
      if (rc_points < 2) throw UsageError("--points must be at least 2");
      SweepSpec s = risk_curve_spec(rc_n, rc_points, common.trials.value_or(1000));
      s.d = {rc_d};
      s.k = {rc_k};
      s.tau = rc_tau;
      s.detectors = rc_detectors;
      s.calibration_trials = rc_cal;
      s.master_seed = common.seed;
      return do_sweep(s, common, rc_resume, out, err);
    }
    if (*sw) {
      spec.trials = common.trials.value_or(1000);
      spec.master_seed = common.seed;
      if (spec.detectors.size() == 1 && spec.detectors[0] == "none") spec.detectors.clear();
      return do_sweep(spec, common, sw_resume, out, err);
    }
    if (*sm) return cmd_second_moment(sm_p, sm_method, sm_tol, common, out, err);
    if (*bd) return cmd_bounds(bd_p, common, out, err);
    if (*th) return cmd_thresholds(th_p, common, out, err);
    if (*vf) return cmd_verify(quick, common, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace corrdetect
