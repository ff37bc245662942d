#include "minrel/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "minrel/errors.hpp"

namespace minrel {

bool GeometryReport::inequality_sign_consistent() const {
  const double slack = 1e-14 * std::max(1.0, std::abs(I_lr));
  if (q.is_classical()) return true;
  return q.value() < 1.0 ? cross_term <= slack : cross_term >= -slack;
}

double GeometryReport::scaled_triangle_residual() const {
  return std::abs(triangle_residual) / std::max(1.0, std::abs(I_lr));
}

GeometryReport triangle_report(const Density& prior, const FeatureSet& features, const Density& l,
                               SolveResult solve) {
  require_same_space(prior.space(), l.space(), "triangle_report");
  const QIndex q = solve.q;
  GeometryReport report(std::move(solve));
  const auto& s = report.solve;
  report.regime = s.kind;
  report.q = q;
  report.I_lr = relative_entropy(l, prior, q);
  report.I_lp = relative_entropy(l, s.posterior, q);
  report.I_pr = relative_entropy(s.posterior, prior, q);
  const double q_minus_one = q.is_classical() ? 0.0 : q.value() - 1.0;
  report.cross_term = q_minus_one * report.I_lp * report.I_pr;
  report.additive_gap = report.I_lr - report.I_lp - report.I_pr;
  report.triangle_residual = report.additive_gap - report.cross_term;

  report.matching_residuals.resize(features.count());
  report.matching_holds = true;
  for (std::size_t m = 0; m < features.count(); ++m) {
    const auto u = features.table(m);
    double r = 0.0;
    switch (s.kind) {
      case ConstraintKind::classical:
        r = expectation(u, l) - s.targets[m];
        break;
      case ConstraintKind::q_expectation:
        r = s.targets[m] - q_expectation(u, l, q) / (1.0 - q.one_minus() * report.I_lp);
        break;
      case ConstraintKind::normalized_q_expectation:
        r = normalized_q_expectation(u, l, q) - s.targets[m];
        break;
    }
    report.matching_residuals[m] = r;
    if (!(std::abs(r) <= kMatchingTolerance)) report.matching_holds = false;
  }
  return report;
}

namespace {

void require_moments(const FeatureSet& features, const Density& l, const MomentSpec& spec, const char* what) {
  const auto achieved = moments(spec.kind, features, l, spec.q);
  std::size_t worst = 0;
  double worst_value = 0.0;
  for (std::size_t m = 0; m < achieved.size(); ++m) {
    const double d = achieved[m] - spec.targets[m];
    if (!(std::abs(d) <= std::abs(worst_value))) {
      worst = m;
      worst_value = d;
    }
  }
  if (!(std::abs(worst_value) <= kMatchingTolerance)) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": l misses constraint '" << features.names()[worst] << "' (index " << worst
       << ") by " << worst_value << " (" << to_string(spec.kind) << " moment " << achieved[worst] << ", target "
       << spec.targets[worst] << ")";
    throw PreconditionError(os.str());
  }
}

}  // namespace

GeometryReport verify_classical_pythagoras(const Density& prior, const FeatureSet& features,
                                           const std::vector<double>& targets, const Density& l,
                                           const SolverOptions& options) {
  const MomentSpec spec{ConstraintKind::classical, targets, QIndex::classical()};
  if (targets.size() != features.count()) throw InvalidArgument("verify_classical_pythagoras: target count mismatch");
  require_moments(features, l, spec, "verify_classical_pythagoras");
  return triangle_report(prior, features, l, solve_classical(prior, features, spec, options));
}

GeometryReport verify_nonextensive_pythagoras_q(const Density& prior, const FeatureSet& features,
                                                const std::vector<double>& targets_q, const Density& l, QIndex q,
                                                const SolverOptions& options) {
  const MomentSpec spec{ConstraintKind::q_expectation, targets_q, q};
  return triangle_report(prior, features, l, solve_tsallis_q(prior, features, spec, options));
}

GeometryReport verify_nonextensive_pythagoras_normalized(const Density& prior, const FeatureSet& features,
                                                         const std::vector<double>& targets, const Density& l,
                                                         QIndex q, const SolverOptions& options) {
  const MomentSpec spec{ConstraintKind::normalized_q_expectation, targets, q};
  if (targets.size() != features.count()) {
    throw InvalidArgument("verify_nonextensive_pythagoras_normalized: target count mismatch");
  }
  require_moments(features, l, spec, "verify_nonextensive_pythagoras_normalized");
  return triangle_report(prior, features, l, solve_tsallis_normalized(prior, features, spec, options));
}

MatchingScan scan_expectation_matching_classical(const Density& prior, const FeatureSet& features, const Density& l,
                                                 const std::vector<std::vector<double>>& target_grid,
                                                 const SolverOptions& options) {
  if (target_grid.empty()) throw InvalidArgument("scan_expectation_matching_classical: empty target grid");
  MatchingScan scan;
  scan.l_moments = moments(ConstraintKind::classical, features, l, QIndex::classical());
  for (std::size_t m = 0; m < features.count(); ++m) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& t : target_grid) {
      if (t.size() != features.count()) {
        throw InvalidArgument("scan_expectation_matching_classical: grid point with wrong dimension");
      }
      lo = std::min(lo, t[m]);
      hi = std::max(hi, t[m]);
    }
    if (scan.l_moments[m] < lo || scan.l_moments[m] > hi) {
      throw PreconditionError("scan_expectation_matching_classical: grid does not cover the moment of l for '" +
                              features.names()[m] + "'");
    }
  }

  double best = std::numeric_limits<double>::infinity();
  double nearest = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t k = 0; k < target_grid.size(); ++k) {
    MatchingScanPoint point;
    point.targets = target_grid[k];
    try {
      const auto res = solve_classical(prior, features, {ConstraintKind::classical, point.targets,
                                                         QIndex::classical()}, options);
      point.feasible = true;
      point.I_lp = shannon_relative_entropy(l, res.posterior);
    } catch (const InfeasibleError& e) {
      point.note = e.what();
    } catch (const ConvergenceError& e) {
      point.note = e.what();
    }
    if (point.feasible) {
      any = true;
      if (point.I_lp < best) {
        best = point.I_lp;
        scan.argmin = k;
      }
      double d = 0.0;
      for (std::size_t m = 0; m < point.targets.size(); ++m) {
        d += (point.targets[m] - scan.l_moments[m]) * (point.targets[m] - scan.l_moments[m]);
      }
      if (d < nearest) {
        nearest = d;
        scan.closest = k;
      }
    }
    scan.points.push_back(std::move(point));
  }
  if (!any) throw InfeasibleError("scan_expectation_matching_classical: no grid point is reachable");
  return scan;
}

Density mixture(const Density& a, const Density& b, double t) {
  require_same_space(a.space(), b.space(), "mixture");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (1.0 - t) * a[i] + t * b[i];
  return Density::normalized(a.space(), std::move(v));
}

MatchedFamily match_along_mixture(const Density& prior, const FeatureSet& features, const MomentSpec& spec,
                                  const Density& a, const Density& b, int scan_points, double condition_tolerance,
                                  const SolverOptions& options) {
  if (features.count() != 1) throw InvalidArgument("match_along_mixture: needs exactly one constraint");
  if (scan_points < 2) throw InvalidArgument("match_along_mixture: needs at least 2 scan points");
  const SolveResult projection = solve(prior, features, spec, options);
  auto report_at = [&](double t) { return triangle_report(prior, features, mixture(a, b, t), projection); };

  std::vector<double> ts;
  std::vector<GeometryReport> reports;
  for (int k = 0; k < scan_points; ++k) {
    const double t = static_cast<double>(k) / (scan_points - 1);
    ts.push_back(t);
    reports.push_back(report_at(t));
  }

  auto residual = [](const GeometryReport& r) { return r.matching_residuals[0]; };
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const double rk = residual(reports[k]);
    if (std::abs(rk) <= condition_tolerance) {
      MatchedFamily out(reports[k]);
      out.t = ts[k];
      out.scan_t = std::move(ts);
      out.scan = std::move(reports);
      return out;
    }
    if (k + 1 == reports.size()) break;
    const double rn = residual(reports[k + 1]);
    if (!std::isfinite(rk) || !std::isfinite(rn) || (rk > 0.0) == (rn > 0.0)) continue;

    double lo = ts[k];
    double hi = ts[k + 1];
    double r_lo = rk;
    int steps = 0;
    GeometryReport mid = reports[k];
    double t_mid = lo;
    while (steps < 200) {
      t_mid = 0.5 * (lo + hi);
      mid = report_at(t_mid);
      ++steps;
      const double r_mid = residual(mid);
      if (std::abs(r_mid) <= condition_tolerance || hi - lo <= 4 * std::numeric_limits<double>::epsilon()) break;
      if ((r_mid > 0.0) == (r_lo > 0.0)) {
        lo = t_mid;
        r_lo = r_mid;
      } else {
        hi = t_mid;
      }
    }
    MatchedFamily out(std::move(mid));
    out.t = t_mid;
    out.bisection_steps = steps;
    out.scan_t = std::move(ts);
    out.scan = std::move(reports);
    return out;
  }
  throw PreconditionError("match_along_mixture: the matching residual does not change sign along the family");
}

}  // namespace minrel
