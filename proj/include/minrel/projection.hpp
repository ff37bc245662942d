#pragma once

// Minimum relative-entropy densities under moment constraints.
//
// Each solver starts from beta = 0 (posterior = prior) and works on the
// prior's support only: points with r_i = 0 carry no posterior mass.
//
//   classical                p_i = r_i exp(-sum_m beta_m u_mi) / Z
//   q-expectation            p_i = [r_i^(1-q) - (1-q) sum_m beta_m u_mi]_+^(1/(1-q)) / Z_q
//   normalized q-expectation p_i = [r_i^(1-q) - (1-q) sum_m beta_m (u_mi - U_m) / s]_+^(1/(1-q)) / Zbar_q
//
// with s = sum_i p_i^q mu_i in the normalized case.

#include <span>
#include <string>
#include <vector>

#include "minrel/measures.hpp"

namespace minrel {

enum class JacobianMode { analytic, finite_difference };

struct SolverOptions {
  /// Sup norm of the constraint residuals at convergence.
  double tolerance = 1e-10;
  int max_iterations = 200;
  /// Normalized regime: fixed-point iteration on s = sum p^q mu.
  double outer_tolerance = 1e-9;
  int max_outer_iterations = 500;
  double relaxation = 0.5;
  /// Jacobian of the q-regime moment equations.
  JacobianMode jacobian = JacobianMode::analytic;
};

struct SolveResult {
  explicit SolveResult(Density p) : posterior(std::move(p)) {}

  ConstraintKind kind = ConstraintKind::classical;
  QIndex q = QIndex::classical();
  Density posterior;
  std::vector<double> beta;
  /// Z, Z_q or Zbar_q according to kind.
  double partition = 1.0;
  /// I(p||r) or I_q(p||r), computed directly from the posterior.
  double divergence = 0.0;
  std::vector<double> targets;
  /// Achieved moment minus target, per constraint.
  std::vector<double> residuals;
  /// sum p^q mu (1 in the classical case).
  double q_mass = 1.0;
  int iterations = 0;
  int outer_iterations = 0;
  bool converged = false;
  std::vector<std::string> diagnostics;

  /// beta_m / sum p^q mu.
  std::vector<double> beta_q() const;
  /// Minimum value from the partition function:
  /// -ln Z - sum beta <u>, -ln_q Z_q - sum beta <u>_q, or -ln_q Zbar_q.
  double closed_form_minimum() const;
  double max_abs_residual() const;
};

SolveResult solve_classical(const Density& prior, const FeatureSet& features, const MomentSpec& spec,
                            const SolverOptions& options = {});
SolveResult solve_tsallis_q(const Density& prior, const FeatureSet& features, const MomentSpec& spec,
                            const SolverOptions& options = {});
SolveResult solve_tsallis_normalized(const Density& prior, const FeatureSet& features,
                                     const MomentSpec& spec, const SolverOptions& options = {});
/// Dispatches on spec.kind; a q-regime with q at the classical switch is solved classically.
SolveResult solve(const Density& prior, const FeatureSet& features, const MomentSpec& spec,
                  const SolverOptions& options = {});

// ---- the distribution families, evaluated at given multipliers ------------

/// A normalized member of one of the families plus its partition value.
struct FamilyMember {
  std::vector<double> density;
  double partition = 1.0;
};

/// Linear potential phi_i = sum_m beta_m (u_mi - shift_m) / scale. Empty shift means 0.
std::vector<double> potential(const FeatureSet& features, std::span<const double> beta,
                              std::span<const double> shift = {}, double scale = 1.0);

/// r_i exp(-phi_i) / Z on the prior's support.
FamilyMember classical_member(const Density& prior, std::span<const double> phi);
/// Brackets r_i^(1-q) - (1-q) phi_i (0 off the prior's support).
std::vector<double> tsallis_brackets(const Density& prior, std::span<const double> phi, QIndex q);
/// Bracket form with the Tsallis cut-off. Throws DomainError when no point survives.
FamilyMember tsallis_member(const Density& prior, std::span<const double> phi, QIndex q);
/// r_i (x)_q e_q^(-phi_i) / Z. Throws DomainError where e_q^(-phi_i) is undefined (q > 1).
FamilyMember tsallis_member_q_product(const Density& prior, std::span<const double> phi, QIndex q);

/// ln Z (classical) or ln_q Z_q at arbitrary beta, constraints released.
double log_partition_at(const Density& prior, const FeatureSet& features, std::span<const double> beta,
                        QIndex q);

/// Sup-norm gap between the bracket form and the q-product form of a q-regime
/// posterior. NaN when the q-product form is undefined at some point.
double q_product_representation_gap(const SolveResult& result, const Density& prior,
                                    const FeatureSet& features);

/// Exhaustive search over a probability grid on the prior's support (at most 4
/// points), keeping grid points that meet the constraints within a slack band
/// proportional to the spacing, followed by zooming local refinement.
/// Independent of the dual solvers; meant for validating them.
Density brute_force_primal(const Density& prior, const FeatureSet& features, const MomentSpec& spec,
                           double grid_spacing = 1e-3);

}  // namespace minrel
