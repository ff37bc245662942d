#include "minrel/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "minrel/errors.hpp"

namespace minrel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string describe(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

// ---- FiniteSpace ---------------------------------------------------------

FiniteSpace::FiniteSpace(std::vector<std::string> labels, std::vector<double> mu)
    : labels_(std::move(labels)), mu_(std::move(mu)) {
  if (mu_.size() < 2) throw InvalidArgument("FiniteSpace needs at least 2 points");
  if (labels_.empty()) {
    for (std::size_t i = 0; i < mu_.size(); ++i) labels_.push_back("x" + std::to_string(i + 1));
  }
  if (labels_.size() != mu_.size()) {
    throw InvalidArgument("FiniteSpace: " + std::to_string(labels_.size()) + " labels for " +
                          std::to_string(mu_.size()) + " weights");
  }
  for (std::size_t i = 0; i < mu_.size(); ++i) {
    if (!std::isfinite(mu_[i]) || mu_[i] <= 0.0) {
      throw InvalidArgument("FiniteSpace: mu[" + std::to_string(i) + "] = " + describe(mu_[i]) +
                            " must be finite and > 0");
    }
  }
  std::set<std::string> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) throw InvalidArgument("FiniteSpace: point labels must be unique");
}

SpacePtr FiniteSpace::counting(std::size_t n) {
  return std::make_shared<const FiniteSpace>(std::vector<std::string>{}, std::vector<double>(n, 1.0));
}

SpacePtr FiniteSpace::make(std::vector<std::string> labels, std::vector<double> mu) {
  return std::make_shared<const FiniteSpace>(std::move(labels), std::move(mu));
}

void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* what) {
  if (a == b) return;
  if (!a || !b || !(*a == *b)) {
    throw InvalidArgument(std::string(what) + ": arguments live on different spaces");
  }
}

// ---- Density -------------------------------------------------------------

Density::Density(SpacePtr space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (!space_) throw InvalidArgument("Density: null space");
  if (values_.size() != space_->size()) {
    throw InvalidArgument("Density: " + std::to_string(values_.size()) + " values for a space of " +
                          std::to_string(space_->size()) + " points");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw InvalidArgument("Density: value[" + std::to_string(i) + "] = " + describe(values_[i]) +
                            " must be finite and >= 0");
    }
    total += values_[i] * space_->mu(i);
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw InvalidArgument("Density: sum of values * mu is " + describe(total) + ", expected 1");
  }
}

Density Density::normalized(SpacePtr space, std::vector<double> weights) {
  if (!space) throw InvalidArgument("Density: null space");
  if (weights.size() != space->size()) throw InvalidArgument("Density: weight count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
      throw InvalidArgument("Density: weight[" + std::to_string(i) + "] must be finite and >= 0");
    }
    total += weights[i] * space->mu(i);
  }
  if (!(total > 0.0)) throw InvalidArgument("Density: weights have zero total mass");
  for (double& w : weights) w /= total;
  return Density(std::move(space), std::move(weights));
}

Density Density::from_probabilities(SpacePtr space, std::span<const double> probabilities) {
  if (!space) throw InvalidArgument("Density: null space");
  if (probabilities.size() != space->size()) throw InvalidArgument("Density: probability count mismatch");
  std::vector<double> values(probabilities.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = probabilities[i] / space->mu(i);
  return Density(std::move(space), std::move(values));
}

Density Density::uniform(SpacePtr space) {
  const std::size_t n = space->size();
  return normalized(std::move(space), std::vector<double>(n, 1.0));
}

std::vector<double> Density::probabilities() const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = probability(i);
  return out;
}

std::vector<bool> Density::support() const {
  std::vector<bool> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] > 0.0;
  return out;
}

// ---- FeatureSet ----------------------------------------------------------

FeatureSet::FeatureSet(SpacePtr space, std::vector<std::vector<double>> tables,
                       std::vector<std::string> names)
    : space_(std::move(space)), tables_(std::move(tables)), names_(std::move(names)) {
  if (!space_) throw InvalidArgument("FeatureSet: null space");
  if (names_.empty()) {
    for (std::size_t m = 0; m < tables_.size(); ++m) names_.push_back("u" + std::to_string(m + 1));
  }
  if (names_.size() != tables_.size()) throw InvalidArgument("FeatureSet: name count mismatch");
  for (std::size_t m = 0; m < tables_.size(); ++m) {
    const auto& t = tables_[m];
    if (t.size() != space_->size()) {
      throw InvalidArgument("FeatureSet: feature '" + names_[m] + "' has " + std::to_string(t.size()) +
                            " values for a space of " + std::to_string(space_->size()) + " points");
    }
    for (double v : t) {
      if (!std::isfinite(v)) throw InvalidArgument("FeatureSet: feature '" + names_[m] + "' is not finite");
    }
    const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    if (*lo == *hi) {
      throw InvalidArgument("FeatureSet: feature '" + names_[m] +
                            "' is constant, which makes the constraint degenerate");
    }
  }
}

const char* to_string(ConstraintKind kind) noexcept {
  switch (kind) {
    case ConstraintKind::classical: return "classical";
    case ConstraintKind::q_expectation: return "q-expectation";
    case ConstraintKind::normalized_q_expectation: return "normalized-q-expectation";
  }
  return "unknown";
}

ConstraintKind constraint_kind_from_string(const std::string& name) {
  if (name == "classical") return ConstraintKind::classical;
  if (name == "q-expectation") return ConstraintKind::q_expectation;
  if (name == "normalized-q-expectation") return ConstraintKind::normalized_q_expectation;
  throw InvalidArgument("unknown constraint kind '" + name +
                        "' (expected classical, q-expectation or normalized-q-expectation)");
}

std::vector<std::string> validate_moment_spec(const FeatureSet& features, const MomentSpec& spec) {
  if (spec.targets.size() != features.count()) {
    throw InvalidArgument("MomentSpec: " + std::to_string(spec.targets.size()) + " targets for " +
                          std::to_string(features.count()) + " features");
  }
  std::vector<std::string> warnings;
  for (std::size_t m = 0; m < features.count(); ++m) {
    const auto t = features.table(m);
    const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    const double target = spec.targets[m];
    if (!std::isfinite(target)) throw InvalidArgument("MomentSpec: target " + std::to_string(m) + " is not finite");
    if (target >= *lo && target <= *hi) continue;
    std::string msg = "target[" + std::to_string(m) + "] = " + describe(target) + " for feature '" +
                      features.names()[m] + "' lies outside its range [" + describe(*lo) + ", " +
                      describe(*hi) + "]";
    if (spec.kind == ConstraintKind::classical) throw InfeasibleError(msg);
    warnings.push_back(std::move(msg));
  }
  return warnings;
}

// ---- functionals ---------------------------------------------------------

bool support_violation(const Density& p, const Density& r) {
  require_same_space(p.space(), r.space(), "support_violation");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && r[i] == 0.0) return true;
  }
  return false;
}

double shannon_relative_entropy(const Density& p, const Density& r) {
  require_same_space(p.space(), r.space(), "shannon_relative_entropy");
  const auto mu = p.space()->mu();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (r[i] == 0.0) return kInf;
    sum += p[i] * std::log(p[i] / r[i]) * mu[i];
  }
  return sum;
}

double shannon_entropy(const Density& p) {
  const auto mu = p.space()->mu();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) sum -= p[i] * std::log(p[i]) * mu[i];
  }
  return sum;
}

double tsallis_entropy(const Density& p, QIndex q) {
  if (q.is_classical()) return shannon_entropy(p);
  const auto mu = p.space()->mu();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) sum -= q_pow(p[i], q) * q_log(p[i], q) * mu[i];
  }
  return sum;
}

double tsallis_entropy_power_sum(const Density& p, QIndex q) {
  if (q.is_classical()) return shannon_entropy(p);
  return (1.0 - q_mass(p, q)) / (q.value() - 1.0);
}

double tsallis_relative_entropy(const Density& p, const Density& r, QIndex q) {
  if (q.is_classical()) return shannon_relative_entropy(p, r);
  require_same_space(p.space(), r.space(), "tsallis_relative_entropy");
  const auto mu = p.space()->mu();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (r[i] == 0.0) return kInf;
    sum -= p[i] * q_log(r[i] / p[i], q) * mu[i];
  }
  return sum;
}

double tsallis_relative_entropy_decomposed(const Density& p, const Density& r, QIndex q) {
  require_same_space(p.space(), r.space(), "tsallis_relative_entropy_decomposed");
  const auto mu = p.space()->mu();
  double cross = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (r[i] == 0.0) return kInf;
    cross -= q_pow(p[i], q) * q_log(r[i], q) * mu[i];
  }
  return cross - tsallis_entropy(p, q);
}

double relative_entropy(const Density& p, const Density& r, QIndex q) {
  return q.is_classical() ? shannon_relative_entropy(p, r) : tsallis_relative_entropy(p, r, q);
}

double expectation(std::span<const double> u, const Density& p) {
  const auto mu = p.space()->mu();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += u[i] * p[i] * mu[i];
  return sum;
}

double q_expectation(std::span<const double> u, const Density& p, QIndex q) {
  if (q.is_classical()) return expectation(u, p);
  const auto mu = p.space()->mu();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += u[i] * q_pow(p[i], q) * mu[i];
  return sum;
}

double q_mass(const Density& p, QIndex q) {
  if (q.is_classical()) return 1.0;
  const auto mu = p.space()->mu();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += q_pow(p[i], q) * mu[i];
  return sum;
}

double normalized_q_expectation(std::span<const double> u, const Density& p, QIndex q) {
  return q_expectation(u, p, q) / q_mass(p, q);
}

double moment(ConstraintKind kind, std::span<const double> u, const Density& p, QIndex q) {
  switch (kind) {
    case ConstraintKind::classical: return expectation(u, p);
    case ConstraintKind::q_expectation: return q_expectation(u, p, q);
    case ConstraintKind::normalized_q_expectation: return normalized_q_expectation(u, p, q);
  }
  return 0.0;
}

std::vector<double> moments(ConstraintKind kind, const FeatureSet& u, const Density& p, QIndex q) {
  require_same_space(u.space(), p.space(), "moments");
  std::vector<double> out(u.count());
  for (std::size_t m = 0; m < u.count(); ++m) out[m] = moment(kind, u.table(m), p, q);
  return out;
}

Density product_density(const Density& px, const Density& py) {
  const auto& sx = *px.space();
  const auto& sy = *py.space();
  std::vector<std::string> labels;
  std::vector<double> mu;
  std::vector<double> values;
  labels.reserve(sx.size() * sy.size());
  for (std::size_t i = 0; i < sx.size(); ++i) {
    for (std::size_t j = 0; j < sy.size(); ++j) {
      labels.push_back("(" + sx.labels()[i] + "," + sy.labels()[j] + ")");
      mu.push_back(sx.mu(i) * sy.mu(j));
      values.push_back(px[i] * py[j]);
    }
  }
  return Density(FiniteSpace::make(std::move(labels), std::move(mu)), std::move(values));
}

}  // namespace minrel
