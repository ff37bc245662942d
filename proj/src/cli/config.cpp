#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "minrel/cli.hpp"

namespace minrel::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kTopLevelKeys = {"space",  "prior",  "features", "constraint", "solver",
                                             "test_distribution", "family", "sweep"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& require(const json& obj, const std::string& key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path.empty() ? key : path + "." + key, "is required");
  return *it;
}

void require_object(const json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path, "must be an object");
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

int integer(const json& v, const std::string& path, int lo) {
  if (!v.is_number_integer()) throw ConfigError(path, "must be an integer");
  const auto x = v.get<long long>();
  if (x < lo || x > 1000000000) throw ConfigError(path, "must be an integer >= " + std::to_string(lo));
  return static_cast<int>(x);
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], at(path, i)));
  return out;
}

std::vector<double> sized_numbers(const json& v, const std::string& path, std::size_t n) {
  auto out = numbers(v, path);
  if (out.size() != n) {
    throw ConfigError(path, "has " + std::to_string(out.size()) + " entries, expected " + std::to_string(n));
  }
  return out;
}

SpacePtr parse_space(const json& root) {
  const json& space = require(root, "space", "");
  require_object(space, "space");
  reject_unknown(space, {"points", "mu"}, "space");
  const json& points = require(space, "points", "space");
  std::vector<std::string> labels;
  if (points.is_number_integer()) {
    const int n = integer(points, "space.points", 2);
    for (int i = 1; i <= n; ++i) labels.push_back("x" + std::to_string(i));
  } else if (points.is_array()) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!points[i].is_string()) throw ConfigError(at("space.points", i), "must be a string label");
      labels.push_back(points[i].get<std::string>());
    }
    std::set<std::string> unique(labels.begin(), labels.end());
    if (unique.size() != labels.size()) throw ConfigError("space.points", "labels must be unique");
  } else {
    throw ConfigError("space.points", "must be a point count or an array of labels");
  }
  if (labels.size() < 2) throw ConfigError("space.points", "needs at least 2 points");
  std::vector<double> mu(labels.size(), 1.0);
  if (space.contains("mu")) {
    mu = sized_numbers(space["mu"], "space.mu", labels.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (!(mu[i] > 0.0)) throw ConfigError(at("space.mu", i), "must be positive, got " + fmt(mu[i]));
    }
  }
  return FiniteSpace::make(std::move(labels), std::move(mu));
}

Density parse_density(const json& v, const std::string& path, const SpacePtr& space) {
  if (v.is_string()) {
    if (v.get<std::string>() == "uniform") return Density::uniform(space);
    throw ConfigError(path, "must be \"uniform\" or an array of density values");
  }
  const auto values = sized_numbers(v, path, space->size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) throw ConfigError(at(path, i), "must be nonnegative, got " + fmt(values[i]));
    total += values[i] * space->mu(i);
  }
  if (!(std::abs(total - 1.0) <= kNormalizationTolerance)) {
    throw ConfigError(path, "sum of value * mu is " + fmt(total) + ", expected 1");
  }
  return Density(space, values);
}

FeatureSet parse_features(const json& root, const SpacePtr& space) {
  if (!root.contains("features")) return FeatureSet(space, {});
  const json& f = root["features"];
  if (!f.is_array()) throw ConfigError("features", "must be an array of {name, values}");
  std::vector<std::vector<double>> tables;
  std::vector<std::string> names;
  for (std::size_t m = 0; m < f.size(); ++m) {
    const std::string path = at("features", m);
    require_object(f[m], path);
    reject_unknown(f[m], {"name", "values"}, path);
    std::string name = "u" + std::to_string(m + 1);
    if (f[m].contains("name")) {
      if (!f[m]["name"].is_string()) throw ConfigError(path + ".name", "must be a string");
      name = f[m]["name"].get<std::string>();
    }
    auto values = sized_numbers(require(f[m], "values", path), path + ".values", space->size());
    bool constant = true;
    for (double v : values) constant = constant && v == values[0];
    if (constant) throw ConfigError(path + ".values", "feature '" + name + "' is constant");
    tables.push_back(std::move(values));
    names.push_back(std::move(name));
  }
  return FeatureSet(space, std::move(tables), std::move(names));
}

MomentSpec parse_constraint(const json& root, const FeatureSet& features) {
  MomentSpec spec;
  if (!root.contains("constraint")) {
    if (!features.empty()) throw ConfigError("constraint", "is required when features are given");
    return spec;
  }
  const json& c = root["constraint"];
  require_object(c, "constraint");
  reject_unknown(c, {"kind", "targets", "q"}, "constraint");
  const json& kind = require(c, "kind", "constraint");
  if (!kind.is_string()) throw ConfigError("constraint.kind", "must be a string");
  try {
    spec.kind = constraint_kind_from_string(kind.get<std::string>());
  } catch (const InvalidArgument&) {
    throw ConfigError("constraint.kind",
                      "must be one of classical, q-expectation, normalized-q-expectation; got '" +
                          kind.get<std::string>() + "'");
  }
  if (c.contains("q")) {
    const double q = number(c["q"], "constraint.q");
    if (!(q > 0.0)) throw ConfigError("constraint.q", "must be positive, got " + fmt(q));
    spec.q = QIndex(q);
  } else if (spec.kind != ConstraintKind::classical) {
    throw ConfigError("constraint.q", "is required for kind '" + std::string(to_string(spec.kind)) + "'");
  }
  if (spec.kind == ConstraintKind::classical && !spec.q.is_classical()) {
    throw ConfigError("constraint.q", "must be 1 for kind 'classical'");
  }
  const bool swept = root.contains("sweep") && root["sweep"].is_object() && root["sweep"].contains("targets");
  spec.targets = (features.empty() || swept) && !c.contains("targets")
                     ? std::vector<double>{}
                     : sized_numbers(require(c, "targets", "constraint"), "constraint.targets", features.count());
  return spec;
}

void check_targets(const FeatureSet& features, const MomentSpec& spec, const std::string& path,
                   std::vector<std::string>& warnings) {
  if (spec.kind != ConstraintKind::classical) {
    for (auto& w : validate_moment_spec(features, spec)) warnings.push_back(std::move(w));
    return;
  }
  for (std::size_t m = 0; m < features.count(); ++m) {
    const auto u = features.table(m);
    const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    if (spec.targets[m] < *lo || spec.targets[m] > *hi) {
      throw ConfigError(at(path, m), "target " + fmt(spec.targets[m]) + " lies outside the range [" + fmt(*lo) +
                                         ", " + fmt(*hi) + "] of feature '" + features.names()[m] + "'");
    }
  }
}

SolverOptions parse_solver(const json& root) {
  SolverOptions o;
  if (!root.contains("solver")) return o;
  const json& s = root["solver"];
  require_object(s, "solver");
  reject_unknown(s, {"tolerance", "max_iterations", "outer_tolerance", "max_outer_iterations", "relaxation", "jacobian"},
                 "solver");
  auto positive = [&](const char* key, double& target) {
    if (!s.contains(key)) return;
    const double v = number(s[key], std::string("solver.") + key);
    if (!(v > 0.0)) throw ConfigError(std::string("solver.") + key, "must be positive");
    target = v;
  };
  positive("tolerance", o.tolerance);
  positive("outer_tolerance", o.outer_tolerance);
  if (s.contains("max_iterations")) o.max_iterations = integer(s["max_iterations"], "solver.max_iterations", 1);
  if (s.contains("max_outer_iterations")) {
    o.max_outer_iterations = integer(s["max_outer_iterations"], "solver.max_outer_iterations", 1);
  }
  if (s.contains("relaxation")) {
    o.relaxation = number(s["relaxation"], "solver.relaxation");
    if (!(o.relaxation > 0.0 && o.relaxation <= 1.0)) throw ConfigError("solver.relaxation", "must lie in (0, 1]");
  }
  if (s.contains("jacobian")) {
    const json& j = s["jacobian"];
    if (j == "analytic") {
      o.jacobian = JacobianMode::analytic;
    } else if (j == "finite-difference") {
      o.jacobian = JacobianMode::finite_difference;
    } else {
      throw ConfigError("solver.jacobian", "must be \"analytic\" or \"finite-difference\"");
    }
  }
  return o;
}

FamilyConfig parse_family(const json& f, const SpacePtr& space) {
  require_object(f, "family");
  reject_unknown(f, {"from", "to", "scan_points", "random"}, "family");
  FamilyConfig out;
  if (f.contains("random")) {
    if (!f["random"].is_boolean()) throw ConfigError("family.random", "must be true or false");
    out.random = f["random"].get<bool>();
  }
  if (!out.random) {
    out.from = parse_density(require(f, "from", "family"), "family.from", space);
    out.to = parse_density(require(f, "to", "family"), "family.to", space);
  } else if (f.contains("from") || f.contains("to")) {
    throw ConfigError("family", "'random' excludes 'from' and 'to'");
  }
  if (f.contains("scan_points")) out.scan_points = integer(f["scan_points"], "family.scan_points", 2);
  return out;
}

SweepConfig parse_sweep(const json& s, const FeatureSet& features, const MomentSpec& spec) {
  require_object(s, "sweep");
  reject_unknown(s, {"q", "targets"}, "sweep");
  if (s.contains("q") == s.contains("targets")) throw ConfigError("sweep", "needs exactly one of 'q' or 'targets'");
  SweepConfig out;
  if (s.contains("q")) {
    out.q_values = numbers(s["q"], "sweep.q");
    if (out.q_values.empty()) throw ConfigError("sweep.q", "must not be empty");
    for (std::size_t k = 0; k < out.q_values.size(); ++k) {
      if (!(out.q_values[k] > 0.0)) throw ConfigError(at("sweep.q", k), "must be positive");
    }
    if (spec.kind == ConstraintKind::classical) {
      throw ConfigError("sweep.q", "a q sweep needs a q-expectation or normalized-q-expectation constraint");
    }
    return out;
  }
  const json& t = s["targets"];
  if (!t.is_array()) throw ConfigError("sweep.targets", "must be an array of target vectors");
  if (t.empty()) throw ConfigError("sweep.targets", "must not be empty");
  for (std::size_t k = 0; k < t.size(); ++k) {
    // A scalar is accepted as a one-element target vector.
    std::vector<double> row = t[k].is_number() ? std::vector<double>{number(t[k], at("sweep.targets", k))}
                                               : sized_numbers(t[k], at("sweep.targets", k), features.count());
    if (row.size() != features.count()) {
      throw ConfigError(at("sweep.targets", k), "expected " + std::to_string(features.count()) + " targets");
    }
    out.targets.push_back(std::move(row));
  }
  return out;
}

}  // namespace

ProblemConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    const auto pos = msg.find("parse error");
    if (pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError("", source + ": " + msg);
  }
  require_object(root, "");
  reject_unknown(root, kTopLevelKeys, "");

  const SpacePtr space = parse_space(root);
  Density prior = root.contains("prior") ? parse_density(root["prior"], "prior", space) : Density::uniform(space);
  FeatureSet features = parse_features(root, space);
  ProblemConfig cfg(std::move(prior), std::move(features));
  cfg.spec = parse_constraint(root, cfg.features);
  cfg.solver = parse_solver(root);
  if (root.contains("test_distribution")) {
    cfg.test_distribution = parse_density(root["test_distribution"], "test_distribution", space);
  }
  if (root.contains("family")) cfg.family = parse_family(root["family"], space);
  auto flag_support = [&](const std::optional<Density>& l, const char* field) {
    if (l && support_violation(*l, cfg.prior)) {
      cfg.warnings.push_back(std::string(field) + " puts mass where the prior is zero; I(l||r) is reported as inf");
    }
  };
  flag_support(cfg.test_distribution, "test_distribution");
  if (cfg.family) {
    flag_support(cfg.family->from, "family.from");
    flag_support(cfg.family->to, "family.to");
  }
  if (root.contains("sweep")) {
    cfg.sweep = parse_sweep(root["sweep"], cfg.features, cfg.spec);
  } else {
    check_targets(cfg.features, cfg.spec, "constraint.targets", cfg.warnings);
  }
  return cfg;
}

std::string config_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace minrel::cli
