#pragma once

// Finite sample spaces with a reference measure, densities on them, and the
// entropy / divergence functionals. Integrals against mu are weighted sums.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "minrel/qalgebra.hpp"

namespace minrel {

inline constexpr double kNormalizationTolerance = 1e-10;

/// Sample space X = {x_1, ..., x_n} with positive reference weights mu_i.
class FiniteSpace {
 public:
  FiniteSpace(std::vector<std::string> labels, std::vector<double> mu);

  /// n points labelled "x1".."xn" with unit weights.
  static std::shared_ptr<const FiniteSpace> counting(std::size_t n);
  static std::shared_ptr<const FiniteSpace> make(std::vector<std::string> labels,
                                                 std::vector<double> mu);

  std::size_t size() const noexcept { return mu_.size(); }
  std::span<const double> mu() const noexcept { return mu_; }
  double mu(std::size_t i) const { return mu_[i]; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  friend bool operator==(const FiniteSpace& a, const FiniteSpace& b) {
    return a.labels_ == b.labels_ && a.mu_ == b.mu_;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<double> mu_;
};

using SpacePtr = std::shared_ptr<const FiniteSpace>;

/// Throws InvalidArgument unless both pointers describe the same space.
void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* what);

/// Nonnegative function on a FiniteSpace with sum_i values_i mu_i = 1.
/// Probabilities are values_i * mu_i.
class Density {
 public:
  /// Validates nonnegativity and normalization to kNormalizationTolerance.
  Density(SpacePtr space, std::vector<double> values);

  /// Rescales arbitrary nonnegative weights (not all zero) to a density.
  static Density normalized(SpacePtr space, std::vector<double> weights);
  /// Builds a density from point probabilities (values = prob / mu).
  static Density from_probabilities(SpacePtr space, std::span<const double> probabilities);
  static Density uniform(SpacePtr space);

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double probability(std::size_t i) const { return values_[i] * space_->mu(i); }
  std::vector<double> probabilities() const;

  /// Points with positive mass.
  std::vector<bool> support() const;

 private:
  SpacePtr space_;
  std::vector<double> values_;
};

/// Real-valued feature tables u_m on a space. May be empty (no constraints).
class FeatureSet {
 public:
  /// Every table must have one entry per point and must not be constant.
  FeatureSet(SpacePtr space, std::vector<std::vector<double>> tables,
             std::vector<std::string> names = {});

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t count() const noexcept { return tables_.size(); }
  bool empty() const noexcept { return tables_.empty(); }
  std::span<const double> table(std::size_t m) const { return tables_[m]; }
  double operator()(std::size_t m, std::size_t i) const { return tables_[m][i]; }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  SpacePtr space_;
  std::vector<std::vector<double>> tables_;
  std::vector<std::string> names_;
};

enum class ConstraintKind { classical, q_expectation, normalized_q_expectation };

const char* to_string(ConstraintKind kind) noexcept;
/// Accepts "classical", "q-expectation", "normalized-q-expectation".
ConstraintKind constraint_kind_from_string(const std::string& name);

/// Moment targets together with the constraint semantics they are read in.
struct MomentSpec {
  ConstraintKind kind = ConstraintKind::classical;
  std::vector<double> targets;
  QIndex q = QIndex::classical();
};

/// Checks target count and ranges. Throws InfeasibleError when a classical
/// target lies outside its feature's range; returns warnings for the q cases.
std::vector<std::string> validate_moment_spec(const FeatureSet& features, const MomentSpec& spec);

// ---- functionals ---------------------------------------------------------

/// sum p ln(p/r) mu, with 0 ln 0 = 0 and +inf when p charges a point r does not.
double shannon_relative_entropy(const Density& p, const Density& r);
double shannon_entropy(const Density& p);

/// S_q(p) = -sum p^q ln_q(p) mu; the Shannon entropy at the classical switch.
double tsallis_entropy(const Density& p, QIndex q);
/// The same quantity through the power-sum form (1 - sum p^q mu) / (q - 1).
double tsallis_entropy_power_sum(const Density& p, QIndex q);

/// I_q(p||r) = -sum p ln_q(r/p) mu. +inf on support violation for every q.
double tsallis_relative_entropy(const Density& p, const Density& r, QIndex q);
/// -sum p^q ln_q(r) mu - S_q(p); equals tsallis_relative_entropy when r > 0 on supp p.
double tsallis_relative_entropy_decomposed(const Density& p, const Density& r, QIndex q);

/// Relative entropy matched to q: Shannon at the classical switch, Tsallis otherwise.
double relative_entropy(const Density& p, const Density& r, QIndex q);

/// true when p puts mass where r has none.
bool support_violation(const Density& p, const Density& r);

/// sum u p mu.
double expectation(std::span<const double> u, const Density& p);
/// sum u p^q mu.
double q_expectation(std::span<const double> u, const Density& p, QIndex q);
/// sum p^q mu.
double q_mass(const Density& p, QIndex q);
/// q_expectation / q_mass.
double normalized_q_expectation(std::span<const double> u, const Density& p, QIndex q);

/// Moment of u_m under p read with the semantics of kind.
double moment(ConstraintKind kind, std::span<const double> u, const Density& p, QIndex q);
/// All M moments of a feature set.
std::vector<double> moments(ConstraintKind kind, const FeatureSet& u, const Density& p, QIndex q);

/// Independent joint density p_X(i) p_Y(j) on the product space (row-major in (i, j)).
Density product_density(const Density& px, const Density& py);

}  // namespace minrel
