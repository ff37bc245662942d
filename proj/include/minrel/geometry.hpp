#pragma once

// Triangle equalities for minimum relative-entropy projections.
//
// For a prior r, constraints u with targets U, the projection p and a test
// density l, the report holds I(l||r), I(l||p), I(p||r) and
//
//   triangle_residual = I(l||r) - [I(l||p) + I(p||r) + (q-1) I(l||p) I(p||r)]
//
// (q = 1 in the classical regime). The residual vanishes when l meets the
// matching condition of its regime:
//
//   classical                <u>_l = U
//   q-expectation            U = <u>_q,l / (1 - (1-q) I_q(l||p))
//   normalized q-expectation <<u>>_q,l = U

#include <string>
#include <vector>

#include "minrel/projection.hpp"

namespace minrel {

/// Tolerance used for the matching and precondition checks.
inline constexpr double kMatchingTolerance = 1e-8;

struct GeometryReport {
  explicit GeometryReport(SolveResult s) : solve(std::move(s)) {}

  ConstraintKind regime = ConstraintKind::classical;
  QIndex q = QIndex::classical();
  double I_lr = 0.0;
  double I_lp = 0.0;
  double I_pr = 0.0;
  double triangle_residual = 0.0;
  /// (q-1) I(l||p) I(p||r); nonpositive for q < 1, nonnegative for q > 1.
  double cross_term = 0.0;
  /// I(l||r) - I(l||p) - I(p||r).
  double additive_gap = 0.0;
  std::vector<double> matching_residuals;
  bool matching_holds = false;
  SolveResult solve;

  /// Sign of the cross term agrees with the inequality for this q (roundoff allowed).
  bool inequality_sign_consistent() const;
  /// |triangle_residual| / max(1, |I_lr|).
  double scaled_triangle_residual() const;
};

/// Report for a given projection and test density. No precondition checks.
GeometryReport triangle_report(const Density& prior, const FeatureSet& features, const Density& l,
                               SolveResult solve);

/// Solves classically and reports. Throws PreconditionError when l misses the
/// constraints by more than kMatchingTolerance.
GeometryReport verify_classical_pythagoras(const Density& prior, const FeatureSet& features,
                                           const std::vector<double>& targets, const Density& l,
                                           const SolverOptions& options = {});

/// Solves under q-expectation constraints and reports, whether or not l matches.
GeometryReport verify_nonextensive_pythagoras_q(const Density& prior, const FeatureSet& features,
                                                const std::vector<double>& targets_q, const Density& l, QIndex q,
                                                const SolverOptions& options = {});

/// Solves under normalized q-expectation constraints. Throws PreconditionError
/// when the normalized q-moments of l differ from the targets by more than kMatchingTolerance.
GeometryReport verify_nonextensive_pythagoras_normalized(const Density& prior, const FeatureSet& features,
                                                         const std::vector<double>& targets, const Density& l,
                                                         QIndex q, const SolverOptions& options = {});

// ---- expectation-matching scan, classical ----------------------------------

struct MatchingScanPoint {
  std::vector<double> targets;
  bool feasible = false;
  double I_lp = 0.0;
  std::string note;
};

struct MatchingScan {
  std::vector<MatchingScanPoint> points;
  /// Moments of l.
  std::vector<double> l_moments;
  /// Index of the smallest I(l||p) among feasible points.
  std::size_t argmin = 0;
  /// Index of the feasible point closest to l_moments.
  std::size_t closest = 0;
  bool argmin_is_closest() const { return argmin == closest; }
};

/// Projects r onto every target in the grid and records I(l||p). Grid points
/// the solver cannot reach are flagged and skipped.
MatchingScan scan_expectation_matching_classical(const Density& prior, const FeatureSet& features, const Density& l,
                                                 const std::vector<std::vector<double>>& target_grid,
                                                 const SolverOptions& options = {});

// ---- matching along a mixture family ---------------------------------------

/// Result of locating l(t) = (1-t) a + t b that meets the matching condition.
struct MatchedFamily {
  explicit MatchedFamily(GeometryReport r) : matched(std::move(r)) {}

  double t = 0.0;
  int bisection_steps = 0;
  /// Report at l(t*).
  GeometryReport matched;
  /// Reports at the scan points, in order of t.
  std::vector<double> scan_t;
  std::vector<GeometryReport> scan;
};

/// Density (1-t) a + t b.
Density mixture(const Density& a, const Density& b, double t);

/// Projects once, scans l(t) over scan_points equally spaced t in [0, 1], then
/// bisects the first sign change of the (single) matching residual down to
/// |residual| <= condition_tolerance. regime is q_expectation or
/// normalized_q_expectation (classical is accepted too). Throws
/// PreconditionError when the scan finds no sign change.
MatchedFamily match_along_mixture(const Density& prior, const FeatureSet& features, const MomentSpec& spec,
                                  const Density& a, const Density& b, int scan_points = 41,
                                  double condition_tolerance = 1e-10, const SolverOptions& options = {});

// ---- thermodynamic relations -----------------------------------------------

struct ThermoCheck {
  std::string identity;
  std::size_t index = 0;
  double finite_difference = 0.0;
  double expected = 0.0;
  /// |finite_difference - expected| / max(1, |expected|).
  double residual = 0.0;
};

/// Central differences of step h around a converged solve:
///   d(ln Z)/d(beta_m) = -U_m         partition evaluated directly, constraints released
///   dI/dU_m = -beta_m                re-solves at perturbed targets
/// with ln_q and the regime's moments in the q cases. The normalized regime
/// also checks ln_q Z_q = ln_q Zbar_q - sum beta U through its beta-derivative,
/// obtained from re-solves and the chain rule.
std::vector<ThermoCheck> check_thermodynamic_identities(const Density& prior, const FeatureSet& features,
                                                        const SolveResult& result, double h = 1e-5,
                                                        const SolverOptions& options = {});

}  // namespace minrel
