#include "minrel/projection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "minrel/errors.hpp"
#include "newton.hpp"

namespace minrel {

using detail::Matrix;
using detail::NewtonOutcome;
using detail::NewtonSystem;
using detail::Vector;

std::vector<double> SolveResult::beta_q() const {
  std::vector<double> out(beta);
  for (double& b : out) b /= q_mass;
  return out;
}

double SolveResult::closed_form_minimum() const {
  const bool classical = q.is_classical();
  const double log_z = classical ? std::log(partition) : q_log(partition, q);
  if (kind == ConstraintKind::normalized_q_expectation) return -log_z;
  double value = -log_z;
  for (std::size_t m = 0; m < beta.size(); ++m) value -= beta[m] * targets[m];
  return value;
}

double SolveResult::max_abs_residual() const {
  double worst = 0.0;
  for (double r : residuals) worst = std::max(worst, std::abs(r));
  return worst;
}

namespace {

std::string format_vector(const Vector& v) {
  std::ostringstream os;
  os.precision(6);
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector to_eigen(std::span<const double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

void check_inputs(const Density& prior, const FeatureSet& features, const MomentSpec& spec) {
  require_same_space(prior.space(), features.space(), "solve");
  if (spec.targets.size() != features.count()) {
    throw InvalidArgument("solve: " + std::to_string(spec.targets.size()) + " targets for " +
                          std::to_string(features.count()) + " features");
  }
}

// Fills the fields every regime shares, recomputing moments and divergence
// directly from the posterior.
SolveResult finish(Density posterior, const Density& prior, const FeatureSet& features,
                   const MomentSpec& spec, std::vector<double> beta, double partition) {
  SolveResult result(std::move(posterior));
  result.kind = spec.kind;
  result.q = spec.q;
  if (spec.kind == ConstraintKind::classical) result.q = QIndex::classical();
  result.beta = std::move(beta);
  result.partition = partition;
  result.targets = spec.targets;
  result.q_mass = q_mass(result.posterior, result.q);
  result.divergence = relative_entropy(result.posterior, prior, result.q);
  const auto achieved = moments(spec.kind, features, result.posterior, result.q);
  result.residuals.resize(achieved.size());
  for (std::size_t m = 0; m < achieved.size(); ++m) result.residuals[m] = achieved[m] - spec.targets[m];
  return result;
}

// Strict interior of each feature's range on the prior's support. Exact
// feasibility test when M = 1, necessary condition otherwise.
void require_interior_targets(const Density& prior, const FeatureSet& features, const MomentSpec& spec) {
  for (std::size_t m = 0; m < features.count(); ++m) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < prior.size(); ++i) {
      if (prior[i] == 0.0) continue;
      lo = std::min(lo, features(m, i));
      hi = std::max(hi, features(m, i));
    }
    const double u = spec.targets[m];
    if (!(u > lo && u < hi)) {
      std::ostringstream os;
      os.precision(17);
      os << "target[" << m << "] = " << u << " for feature '" << features.names()[m]
         << "' is not strictly inside its range (" << lo << ", " << hi << ") on the prior's support";
      throw InfeasibleError(os.str());
    }
  }
}

// ---- classical -------------------------------------------------------------

SolveResult classical_impl(const Density& prior, const FeatureSet& features, const MomentSpec& spec,
                           const SolverOptions& options) {
  check_inputs(prior, features, spec);
  require_interior_targets(prior, features, spec);
  const std::size_t m_count = features.count();
  const auto mu = prior.space()->mu();
  const Vector targets = to_eigen(spec.targets);

  Vector beta = Vector::Zero(static_cast<Eigen::Index>(m_count));
  auto evaluate = [&](const Vector& b, Vector& mean, double& dual) {
    const auto member = classical_member(prior, potential(features, to_std(b)));
    mean.resize(static_cast<Eigen::Index>(m_count));
    for (std::size_t m = 0; m < m_count; ++m) {
      double s = 0.0;
      for (std::size_t i = 0; i < prior.size(); ++i) s += features(m, i) * member.density[i] * mu[i];
      mean[static_cast<Eigen::Index>(m)] = s;
    }
    dual = std::log(member.partition) + b.dot(targets);
    return member;
  };

  Vector mean;
  double dual = 0.0;
  auto member = evaluate(beta, mean, dual);
  int it = 0;
  bool converged = false;
  std::string failure;
  for (;; ++it) {
    const Vector residual = mean - targets;
    if (converged || m_count == 0 || residual.lpNorm<Eigen::Infinity>() < options.tolerance) {
      const bool polished = converged || m_count == 0;
      // Converged; one more Newton step is kept below if it helps.
      converged = true;
      if (polished) break;
    }
    if (it >= options.max_iterations) {
      failure = "reached the iteration limit";
      break;
    }
    // Hessian of the dual ln Z(beta) + beta.U is the covariance of u under p.
    Matrix cov = Matrix::Zero(static_cast<Eigen::Index>(m_count), static_cast<Eigen::Index>(m_count));
    for (std::size_t i = 0; i < prior.size(); ++i) {
      const double w = member.density[i] * mu[i];
      if (w == 0.0) continue;
      for (std::size_t a = 0; a < m_count; ++a) {
        for (std::size_t b = 0; b < m_count; ++b) {
          cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
              w * (features(a, i) - mean[static_cast<Eigen::Index>(a)]) *
              (features(b, i) - mean[static_cast<Eigen::Index>(b)]);
        }
      }
    }
    Eigen::LDLT<Matrix> ldlt(cov);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
      if (it == 0 && !converged) {
        throw InvalidArgument("solve_classical: features are affinely dependent on the prior's support");
      }
      failure = "dual Hessian became singular (targets may lie on the boundary of the feasible set)";
      break;
    }
    const Vector step = ldlt.solve(residual);  // -H^{-1} grad, grad = U - mean
    const double slope = -residual.dot(step);
    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
      const Vector trial = beta + alpha * step;
      Vector trial_mean;
      double trial_dual = 0.0;
      auto trial_member = evaluate(trial, trial_mean, trial_dual);
      // Close to the optimum the dual decrease drops below roundoff; a drop in
      // the gradient norm is accepted instead, as long as the dual stays flat.
      const bool sufficient = trial_dual <= dual + 1e-4 * alpha * slope;
      const bool gradient_drop = trial_dual <= dual + 1e-12 * std::max(1.0, std::abs(dual)) &&
                                 (trial_mean - targets).norm() <= (1.0 - 1e-4 * alpha) * residual.norm();
      if (std::isfinite(trial_dual) && (sufficient || gradient_drop)) {
        beta = trial;
        mean = trial_mean;
        dual = trial_dual;
        member = std::move(trial_member);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      failure = "line search could not decrease the dual";
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("solve_classical: " + failure + " after " + std::to_string(it) +
                               " iterations; last beta " + format_vector(beta) +
                               " (the targets may lie outside the convex hull of the features)",
                           to_std(beta), to_std(mean - targets));
  }
  auto result = finish(Density(prior.space(), member.density), prior, features, spec, to_std(beta),
                       member.partition);
  result.iterations = it;
  result.converged = true;
  return result;
}

// ---- q regimes -------------------------------------------------------------

// Solves F(beta; U) = 0 starting from beta0, which must solve the system at
// the targets `start`. Falls back to continuation along U(t) = start + t (U - start).
NewtonOutcome solve_with_continuation(const std::function<NewtonSystem(const Vector&)>& make_system,
                                      const Vector& beta0, const Vector& start, const Vector& targets,
                                      const SolverOptions& options, std::vector<std::string>& diagnostics) {
  NewtonOutcome direct = detail::damped_newton(make_system(targets), beta0, options.tolerance,
                                               options.max_iterations);
  if (direct.converged) return direct;

  int total = direct.iterations;
  Vector beta = beta0;
  double t = 0.0;
  double dt = 0.25;
  int steps = 0;
  while (t < 1.0) {
    const double next = std::min(1.0, t + dt);
    const Vector path_target = start + next * (targets - start);
    const double tol = next == 1.0 ? options.tolerance : std::max(options.tolerance, 1e-8);
    auto step = detail::damped_newton(make_system(path_target), beta, tol, options.max_iterations);
    total += step.iterations;
    if (step.converged) {
      beta = step.beta;
      t = next;
      dt = std::min(0.5, dt * 2.0);
      ++steps;
      if (next == 1.0) {
        step.iterations = total;
        diagnostics.push_back("direct Newton from beta = 0 failed (" + direct.failure +
                              "); solved by target continuation in " + std::to_string(steps) + " steps");
        return step;
      }
    } else {
      dt *= 0.5;
      if (dt < 1e-6) {
        step.iterations = total;
        step.failure = "continuation stalled at t = " + std::to_string(t) + ": " + step.failure;
        return step;
      }
    }
  }
  direct.failure = "continuation did not reach the targets";
  return direct;
}

bool brackets_admissible(const Density& prior, std::span<const double> phi, QIndex q) {
  if (q.one_minus() > 0.0) return true;  // q < 1: negative brackets are cut off
  const auto b = tsallis_brackets(prior, phi, q);
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (prior[i] > 0.0 && !(b[i] > 0.0)) return false;
  }
  return true;
}

SolveResult relabel_classical(SolveResult result, const MomentSpec& spec) {
  result.kind = spec.kind;
  result.q = spec.q;
  if (spec.kind == ConstraintKind::normalized_q_expectation) {
    // Zbar = Z exp(sum beta U) so that -ln Zbar is the minimum value.
    double shift = 0.0;
    for (std::size_t m = 0; m < result.beta.size(); ++m) shift += result.beta[m] * spec.targets[m];
    result.partition *= std::exp(shift);
  }
  result.diagnostics.push_back("q within the classical switch; solved with the classical solver");
  return result;
}

SolveResult tsallis_q_impl(const Density& prior, const FeatureSet& features, const MomentSpec& spec,
                           const SolverOptions& options) {
  check_inputs(prior, features, spec);
  const QIndex q = spec.q;
  const std::size_t m_count = features.count();
  const auto mu = prior.space()->mu();
  std::vector<std::string> diagnostics = validate_moment_spec(features, spec);

  auto make_system = [&](const Vector& targets) {
    NewtonSystem sys;
    sys.residual = [&, targets](const Vector& b) -> std::optional<Vector> {
      const auto phi = potential(features, to_std(b));
      if (!brackets_admissible(prior, phi, q)) return std::nullopt;
      FamilyMember member;
      try {
        member = tsallis_member(prior, phi, q);
      } catch (const DomainError&) {
        return std::nullopt;
      }
      Vector f(static_cast<Eigen::Index>(m_count));
      for (std::size_t m = 0; m < m_count; ++m) {
        double s = 0.0;
        for (std::size_t i = 0; i < prior.size(); ++i) s += features(m, i) * q_pow(member.density[i], q) * mu[i];
        f[static_cast<Eigen::Index>(m)] = s - targets[static_cast<Eigen::Index>(m)];
      }
      return f;
    };
    if (options.jacobian == JacobianMode::analytic) {
      // With w_i the unnormalized weights and A_k = sum u_k w^q mu:
      // dF_m/dbeta_k = q Z^(-1-q) A_k A_m - q Z^(-q) sum u_m u_k w^(2q-1) mu.
      sys.jacobian = [&](const Vector& b) {
        const auto phi = potential(features, to_std(b));
        const auto member = tsallis_member(prior, phi, q);
        const double z = member.partition;
        const double qv = q.value();
        std::vector<double> w(prior.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = member.density[i] * z;
        Vector a = Vector::Zero(static_cast<Eigen::Index>(m_count));
        for (std::size_t m = 0; m < m_count; ++m) {
          for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] > 0.0) a[static_cast<Eigen::Index>(m)] += features(m, i) * std::pow(w[i], qv) * mu[i];
          }
        }
        Matrix jac(static_cast<Eigen::Index>(m_count), static_cast<Eigen::Index>(m_count));
        for (std::size_t m = 0; m < m_count; ++m) {
          for (std::size_t k = 0; k < m_count; ++k) {
            double second = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) {
              if (w[i] > 0.0) second += features(m, i) * features(k, i) * std::pow(w[i], 2.0 * qv - 1.0) * mu[i];
            }
            jac(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) =
                qv * std::pow(z, -1.0 - qv) * a[static_cast<Eigen::Index>(k)] * a[static_cast<Eigen::Index>(m)] -
                qv * std::pow(z, -qv) * second;
          }
        }
        return jac;
      };
    }
    return sys;
  };

  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(m_count));
  const Vector start = to_eigen(moments(ConstraintKind::q_expectation, features, prior, q));
  const Vector targets = to_eigen(spec.targets);
  const auto outcome = solve_with_continuation(make_system, zero, start, targets, options, diagnostics);
  if (!outcome.converged) {
    throw ConvergenceError("solve_tsallis_q: " + outcome.failure + " after " +
                               std::to_string(outcome.iterations) + " iterations; last beta " +
                               format_vector(outcome.beta) + " (targets may be infeasible or outside the range of the cut-off q-exponential family)",
                           to_std(outcome.beta), to_std(outcome.residual));
  }
  const auto beta = to_std(outcome.beta);
  const auto member = tsallis_member(prior, potential(features, beta), q);
  auto result = finish(Density(prior.space(), member.density), prior, features, spec, beta, member.partition);
  result.iterations = outcome.iterations;
  result.converged = true;
  result.diagnostics = std::move(diagnostics);
  return result;
}

SolveResult tsallis_normalized_impl(const Density& prior, const FeatureSet& features, const MomentSpec& spec,
                                    const SolverOptions& options) {
  check_inputs(prior, features, spec);
  const QIndex q = spec.q;
  const double qv = q.value();
  const std::size_t m_count = features.count();
  const auto mu = prior.space()->mu();
  std::vector<std::string> diagnostics = validate_moment_spec(features, spec);

  // Inner system at a fixed scale s: normalized moments of the family with
  // potential sum beta (u - U) / s.
  auto make_system_at = [&](double s) {
    return [&, s](const Vector& targets) {
      NewtonSystem sys;
      const std::vector<double> shift = to_std(targets);
      sys.residual = [&, s, shift](const Vector& b) -> std::optional<Vector> {
        const auto phi = potential(features, to_std(b), shift, s);
        if (!brackets_admissible(prior, phi, q)) return std::nullopt;
        FamilyMember member;
        try {
          member = tsallis_member(prior, phi, q);
        } catch (const DomainError&) {
          return std::nullopt;
        }
        double mass = 0.0;
        for (std::size_t i = 0; i < prior.size(); ++i) mass += q_pow(member.density[i], q) * mu[i];
        Vector f(static_cast<Eigen::Index>(m_count));
        for (std::size_t m = 0; m < m_count; ++m) {
          double acc = 0.0;
          for (std::size_t i = 0; i < prior.size(); ++i) acc += features(m, i) * q_pow(member.density[i], q) * mu[i];
          f[static_cast<Eigen::Index>(m)] = acc / mass - shift[m];
        }
        return f;
      };
      if (options.jacobian == JacobianMode::analytic) {
        // G_m = B_m / C with v = u - U, B_m = sum v_m w^q mu, C = sum w^q mu and
        // dw_i/dgamma_k = -v_ki w_i^q, gamma = beta / s.
        sys.jacobian = [&, s, shift](const Vector& b) {
          const auto phi = potential(features, to_std(b), shift, s);
          const auto member = tsallis_member(prior, phi, q);
          std::vector<double> w(prior.size());
          for (std::size_t i = 0; i < w.size(); ++i) w[i] = member.density[i] * member.partition;
          auto v = [&](std::size_t m, std::size_t i) { return features(m, i) - shift[m]; };
          double c = 0.0;
          Vector bm = Vector::Zero(static_cast<Eigen::Index>(m_count));
          Vector dc = Vector::Zero(static_cast<Eigen::Index>(m_count));
          Matrix db = Matrix::Zero(static_cast<Eigen::Index>(m_count), static_cast<Eigen::Index>(m_count));
          for (std::size_t i = 0; i < w.size(); ++i) {
            if (!(w[i] > 0.0)) continue;
            const double wq = std::pow(w[i], qv);
            const double w2 = std::pow(w[i], 2.0 * qv - 1.0);
            c += wq * mu[i];
            for (std::size_t m = 0; m < m_count; ++m) {
              bm[static_cast<Eigen::Index>(m)] += v(m, i) * wq * mu[i];
              dc[static_cast<Eigen::Index>(m)] -= qv * v(m, i) * w2 * mu[i];
              for (std::size_t k = 0; k < m_count; ++k) {
                db(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) -= qv * v(m, i) * v(k, i) * w2 * mu[i];
              }
            }
          }
          Matrix jac(static_cast<Eigen::Index>(m_count), static_cast<Eigen::Index>(m_count));
          for (Eigen::Index m = 0; m < jac.rows(); ++m) {
            for (Eigen::Index k = 0; k < jac.cols(); ++k) {
              jac(m, k) = (db(m, k) * c - bm[m] * dc[k]) / (c * c) / s;
            }
          }
          return jac;
        };
      }
      return sys;
    };
  };

  const Vector start = to_eigen(moments(ConstraintKind::normalized_q_expectation, features, prior, q));
  const Vector targets = to_eigen(spec.targets);
  double s = q_mass(prior, q);
  Vector beta = Vector::Zero(static_cast<Eigen::Index>(m_count));
  std::vector<double> history;
  int inner_iterations = 0;
  int outer = 0;
  bool converged = false;
  Vector last_residual = Vector::Zero(static_cast<Eigen::Index>(m_count));
  std::vector<std::string> inner_notes;
  for (outer = 1; outer <= options.max_outer_iterations; ++outer) {
    // The first inner solve starts from beta = 0 and may need continuation;
    // later ones are warm-started with the multipliers rescaled to the new s.
    const Vector inner_start = outer == 1 ? start : targets;
    auto outcome = solve_with_continuation(make_system_at(s), beta, inner_start, targets, options, inner_notes);
    inner_iterations += outcome.iterations;
    if (!outcome.converged) {
      throw ConvergenceError("solve_tsallis_normalized: inner solve failed at outer iteration " +
                                 std::to_string(outer) + ": " + outcome.failure,
                             to_std(outcome.beta), to_std(outcome.residual), history);
    }
    beta = outcome.beta;
    last_residual = outcome.residual;
    const auto member = tsallis_member(prior, potential(features, to_std(beta), spec.targets, s), q);
    double s_new = 0.0;
    for (std::size_t i = 0; i < prior.size(); ++i) s_new += q_pow(member.density[i], q) * mu[i];
    history.push_back(s_new);
    if (std::abs(s_new - s) < options.outer_tolerance) {
      // The family depends on beta / s only; report beta on the scale of the
      // posterior's own q-mass so that beta_q = beta / sum p^q mu holds exactly.
      beta *= s_new / s;
      s = s_new;
      converged = true;
      break;
    }
    const double relaxed = s + options.relaxation * (s_new - s);
    beta *= relaxed / s;
    s = relaxed;
  }
  if (!converged) {
    throw ConvergenceError("solve_tsallis_normalized: fixed point on sum p^q mu did not settle within " +
                               std::to_string(options.max_outer_iterations) + " outer iterations",
                           to_std(beta), to_std(last_residual), history);
  }
  const auto b = to_std(beta);
  const auto member = tsallis_member(prior, potential(features, b, spec.targets, s), q);
  auto result = finish(Density(prior.space(), member.density), prior, features, spec, b, member.partition);
  result.iterations = inner_iterations;
  result.outer_iterations = outer;
  result.converged = true;
  diagnostics.insert(diagnostics.end(), inner_notes.begin(), inner_notes.end());
  result.diagnostics = std::move(diagnostics);
  return result;
}

}  // namespace

SolveResult solve_classical(const Density& prior, const FeatureSet& features, const MomentSpec& spec,
                            const SolverOptions& options) {
  MomentSpec classical = spec;
  classical.kind = ConstraintKind::classical;
  classical.q = QIndex::classical();
  return classical_impl(prior, features, classical, options);
}

SolveResult solve_tsallis_q(const Density& prior, const FeatureSet& features, const MomentSpec& spec,
                            const SolverOptions& options) {
  MomentSpec qspec = spec;
  qspec.kind = ConstraintKind::q_expectation;
  if (qspec.q.is_classical()) return relabel_classical(solve_classical(prior, features, qspec, options), qspec);
  return tsallis_q_impl(prior, features, qspec, options);
}

SolveResult solve_tsallis_normalized(const Density& prior, const FeatureSet& features, const MomentSpec& spec,
                                     const SolverOptions& options) {
  MomentSpec nspec = spec;
  nspec.kind = ConstraintKind::normalized_q_expectation;
  if (nspec.q.is_classical()) return relabel_classical(solve_classical(prior, features, nspec, options), nspec);
  return tsallis_normalized_impl(prior, features, nspec, options);
}

SolveResult solve(const Density& prior, const FeatureSet& features, const MomentSpec& spec,
                  const SolverOptions& options) {
  switch (spec.kind) {
    case ConstraintKind::classical: return solve_classical(prior, features, spec, options);
    case ConstraintKind::q_expectation: return solve_tsallis_q(prior, features, spec, options);
    case ConstraintKind::normalized_q_expectation: return solve_tsallis_normalized(prior, features, spec, options);
  }
  throw InvalidArgument("solve: unknown constraint kind");
}

}  // namespace minrel
