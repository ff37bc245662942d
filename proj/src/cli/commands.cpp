#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "minrel/cli.hpp"
#include "minrel/geometry.hpp"
#include "report.hpp"

namespace minrel::cli {

namespace {

struct Options {
  std::string config;
  std::string output;
  std::string format;
  std::optional<double> tolerance;
  std::optional<int> max_iter;
  std::uint64_t seed = 0;
};

/// Failure inside a command that still produces a report.
struct CommandFailure {
  int code;
  std::string message;
  Document partial;
};

Document vec(const std::vector<double>& v) {
  Document a = Document::array();
  for (double x : v) a.push_back(x);
  return a;
}

Document density_doc(const Density& d) {
  Document o;
  o["labels"] = d.space()->labels();
  o["values"] = vec({d.values().begin(), d.values().end()});
  return o;
}

Document solve_doc(const SolveResult& r, const Density& prior, const FeatureSet& features) {
  Document o;
  o["kind"] = to_string(r.kind);
  o["q"] = r.q.value();
  o["converged"] = r.converged;
  o["iterations"] = r.iterations;
  o["outer_iterations"] = r.outer_iterations;
  o["beta"] = vec(r.beta);
  o["beta_q"] = vec(r.beta_q());
  o["partition"] = r.partition;
  o["divergence"] = r.divergence;
  o["closed_form_minimum"] = r.closed_form_minimum();
  o["q_mass"] = r.q_mass;
  o["targets"] = vec(r.targets);
  o["residuals"] = vec(r.residuals);
  o["max_abs_residual"] = r.max_abs_residual();
  o["posterior"] = density_doc(r.posterior);
  o["representation_gap"] = q_product_representation_gap(r, prior, features);
  o["diagnostics"] = r.diagnostics;
  return o;
}

Document geometry_doc(const GeometryReport& g, const Density& l) {
  Document o;
  o["regime"] = to_string(g.regime);
  o["q"] = g.q.value();
  o["I_lr"] = g.I_lr;
  o["I_lp"] = g.I_lp;
  o["I_pr"] = g.I_pr;
  o["triangle_residual"] = g.triangle_residual;
  o["scaled_triangle_residual"] = g.scaled_triangle_residual();
  o["cross_term"] = g.cross_term;
  o["additive_gap"] = g.additive_gap;
  o["inequality_sign_consistent"] = g.inequality_sign_consistent();
  o["matching_residuals"] = vec(g.matching_residuals);
  o["matching_holds"] = g.matching_holds;
  o["test_distribution"] = density_doc(l);
  return o;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Portable uniform draw in [0, 1) so reports do not depend on the standard library.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Density random_density(std::mt19937_64& rng, const SpacePtr& space) {
  std::vector<double> probs(space->size());
  for (double& p : probs) p = -std::log(1.0 - unit(rng)) + 1e-3;
  double total = 0.0;
  for (double p : probs) total += p;
  for (double& p : probs) p /= total;
  return Density::from_probabilities(space, probs);
}

Document run_solve(const ProblemConfig& cfg) {
  Document doc;
  doc["solve"] = solve_doc(solve(cfg.prior, cfg.features, cfg.spec, cfg.solver), cfg.prior, cfg.features);
  return doc;
}

Document run_verify(const ProblemConfig& cfg, std::uint64_t seed, int& code) {
  Document doc;
  const double threshold = kMatchingTolerance;
  if (cfg.test_distribution) {
    const auto& l = *cfg.test_distribution;
    auto report = triangle_report(cfg.prior, cfg.features, l, solve(cfg.prior, cfg.features, cfg.spec, cfg.solver));
    doc["solve"] = solve_doc(report.solve, cfg.prior, cfg.features);
    doc["geometry"] = geometry_doc(report, l);
    const bool passed = report.scaled_triangle_residual() < threshold;
    doc["geometry"]["threshold"] = threshold;
    doc["geometry"]["passed"] = passed;
    code = passed ? kOk : kVerificationFailed;
    return doc;
  }
  if (!cfg.family) throw ConfigError("test_distribution", "verify needs 'test_distribution' or 'family'");
  if (cfg.features.count() != 1) throw ConfigError("family", "a family scan needs exactly one feature");

  std::optional<MatchedFamily> found;
  std::optional<Density> a;
  std::optional<Density> b;
  std::string failure;
  if (cfg.family->random) {
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 200 && !found; ++attempt) {
      a = random_density(rng, cfg.prior.space());
      b = random_density(rng, cfg.prior.space());
      try {
        found.emplace(match_along_mixture(cfg.prior, cfg.features, cfg.spec, *a, *b, cfg.family->scan_points, 1e-10,
                                          cfg.solver));
      } catch (const PreconditionError& e) {
        failure = e.what();
      }
    }
  } else {
    a = cfg.family->from;
    b = cfg.family->to;
    try {
      found.emplace(match_along_mixture(cfg.prior, cfg.features, cfg.spec, *a, *b, cfg.family->scan_points, 1e-10,
                                        cfg.solver));
    } catch (const PreconditionError& e) {
      failure = e.what();
    }
  }
  Document fam;
  fam["from"] = density_doc(*a);
  fam["to"] = density_doc(*b);
  if (!found) {
    doc["family"] = fam;
    throw CommandFailure{kVerificationFailed, failure, doc};
  }
  const auto& m = *found;
  doc["solve"] = solve_doc(m.matched.solve, cfg.prior, cfg.features);
  doc["geometry"] = geometry_doc(m.matched, mixture(*a, *b, m.t));
  bool signs = true;
  Document scan = Document::array();
  for (std::size_t k = 0; k < m.scan.size(); ++k) {
    const auto& g = m.scan[k];
    signs = signs && g.inequality_sign_consistent();
    Document row;
    row["t"] = m.scan_t[k];
    row["matching_residual"] = g.matching_residuals[0];
    row["triangle_residual"] = g.triangle_residual;
    row["cross_term"] = g.cross_term;
    row["additive_gap"] = g.additive_gap;
    row["inequality_sign_consistent"] = g.inequality_sign_consistent();
    scan.push_back(row);
  }
  fam["t"] = m.t;
  fam["bisection_steps"] = m.bisection_steps;
  fam["scan"] = scan;
  doc["family"] = fam;
  const bool passed = m.matched.scaled_triangle_residual() < threshold && signs;
  doc["geometry"]["threshold"] = threshold;
  doc["geometry"]["passed"] = passed;
  code = passed ? kOk : kVerificationFailed;
  return doc;
}

Document run_sweep(const ProblemConfig& cfg, std::vector<std::string>& columns, int& code) {
  if (!cfg.sweep) throw ConfigError("sweep", "is required for the sweep command");
  const auto& sw = *cfg.sweep;
  const std::size_t m_count = cfg.features.count();
  const bool with_l = cfg.test_distribution.has_value();
  if (sw.over_q()) {
    columns.push_back("q");
  } else {
    for (std::size_t m = 0; m < m_count; ++m) columns.push_back("target_" + cfg.features.names()[m]);
  }
  columns.push_back("status");
  for (std::size_t m = 0; m < m_count; ++m) columns.push_back("beta_" + cfg.features.names()[m]);
  columns.insert(columns.end(), {"partition", "divergence"});
  if (with_l) columns.insert(columns.end(), {"I_lp", "triangle_residual"});
  columns.push_back("message");

  const std::size_t n = sw.over_q() ? sw.q_values.size() : sw.targets.size();
  Document rows = Document::array();
  std::size_t ok = 0;
  double best = INFINITY;
  long argmin = -1;
  for (std::size_t k = 0; k < n; ++k) {
    MomentSpec spec = cfg.spec;
    Document row;
    if (sw.over_q()) {
      spec.q = QIndex(sw.q_values[k]);
      row["q"] = sw.q_values[k];
    } else {
      spec.targets = sw.targets[k];
      for (std::size_t m = 0; m < m_count; ++m) row["target_" + cfg.features.names()[m]] = spec.targets[m];
    }
    try {
      auto result = solve(cfg.prior, cfg.features, spec, cfg.solver);
      row["status"] = "ok";
      for (std::size_t m = 0; m < m_count; ++m) row["beta_" + cfg.features.names()[m]] = result.beta[m];
      row["partition"] = result.partition;
      row["divergence"] = result.divergence;
      if (with_l) {
        const auto g = triangle_report(cfg.prior, cfg.features, *cfg.test_distribution, std::move(result));
        row["I_lp"] = g.I_lp;
        row["triangle_residual"] = g.triangle_residual;
        if (g.I_lp < best) {
          best = g.I_lp;
          argmin = static_cast<long>(k);
        }
      }
      ++ok;
    } catch (const Error& e) {
      row["status"] = "error";
      row["message"] = e.what();
    }
    rows.push_back(row);
  }
  Document doc;
  doc["rows_ok"] = ok;
  doc["rows_failed"] = n - ok;
  if (with_l && argmin >= 0) doc["argmin_I_lp_row"] = argmin;
  doc["rows"] = rows;
  code = ok > 0 ? kOk : kSolverError;
  return doc;
}

bool read_file(const std::string& path, std::string& bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  bytes = ss.str();
  return true;
}

int execute(const std::string& command, const Options& opt, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  std::string bytes;
  if (!read_file(opt.config, bytes)) {
    err << "error: cannot read config file '" << opt.config << "'\n";
    return kConfigError;
  }
  std::optional<ProblemConfig> cfg;
  try {
    cfg.emplace(parse_config(bytes, opt.config));
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "config error: " << opt.config << ": " << e.what() << "\n";
    return kConfigError;
  }
  if (opt.tolerance) cfg->solver.tolerance = *opt.tolerance;
  if (opt.max_iter) cfg->solver.max_iterations = *opt.max_iter;

  const std::string format = opt.format.empty() ? (command == "sweep" ? "csv" : "json") : opt.format;

  Document body;
  std::vector<std::string> columns;
  int code = kOk;
  std::string message;
  try {
    if (command == "solve") {
      body = run_solve(*cfg);
    } else if (command == "verify") {
      body = run_verify(*cfg, opt.seed, code);
    } else {
      body = run_sweep(*cfg, columns, code);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const CommandFailure& f) {
    code = f.code;
    message = f.message;
    body = f.partial;
  } catch (const ConvergenceError& e) {
    code = kSolverError;
    message = e.what();
    body["last_beta"] = vec(e.last_beta());
    body["last_residuals"] = vec(e.last_residuals());
    if (!e.history().empty()) body["outer_history"] = vec(e.history());
  } catch (const Error& e) {
    code = kSolverError;
    message = e.what();
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Document doc;
  doc["run"] = {{"timestamp", utc_timestamp()}, {"wall_time_seconds", wall}};
  doc["tool"] = "minrel";
  doc["version"] = kVersion;
  doc["command"] = command;
  doc["config_hash"] = "fnv1a64:" + config_hash(bytes);
  doc["seed"] = opt.seed;
  doc["status"] = code == kOk ? "ok" : code == kSolverError ? "solver-error" : "verification-failed";
  doc["exit_code"] = code;
  if (!message.empty()) doc["message"] = message;
  doc["warnings"] = cfg->warnings;
  for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = it.value();

  std::ofstream file;
  std::ostream* sink = &out;
  if (!opt.output.empty()) {
    file.open(opt.output, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "error: cannot write output file '" << opt.output << "'\n";
      return kConfigError;
    }
    sink = &file;
  }
  if (format == "json") {
    write_json(doc, *sink);
  } else if (command == "sweep" && !columns.empty()) {
    write_table_csv(doc, columns, *sink);
  } else {
    write_flat_csv(doc, *sink);
  }
  sink->flush();
  if (code != kOk) err << doc["status"].get<std::string>() << ": " << (message.empty() ? "see report" : message) << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimum relative-entropy projections and triangle-equality checks", "minrel"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Options opt;
  std::string command;
  for (const char* name : {"solve", "verify", "sweep"}) {
    const char* help = std::string(name) == "solve"    ? "Project the prior onto the constraint set"
                       : std::string(name) == "verify" ? "Check the triangle equality for a test density or family"
                                                       : "Solve over a list of q values or targets";
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "Problem config (JSON)")->required();
    sub->add_option("--output", opt.output, "Report file (default: stdout)");
    sub->add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--tolerance", opt.tolerance, "Residual tolerance override")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", opt.max_iter, "Iteration limit override")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "Seed for randomized families");
    sub->callback([&command, name] { command = name; });
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kConfigError;
  }
  return execute(command, opt, out, err);
}

}  // namespace minrel::cli
