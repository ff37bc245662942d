#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "minrel/errors.hpp"
#include "minrel/projection.hpp"

namespace minrel {

namespace {

// Primal problem restricted to the prior's support, written in terms of the
// point probabilities pi_i = p_i mu_i so the simplex is the standard one.
struct Primal {
  std::vector<double> r;   // prior values on the support
  std::vector<double> mu;  // reference weights on the support
  std::vector<std::vector<double>> u;
  std::vector<double> targets;
  ConstraintKind kind;
  double q;
  bool classical;

  double divergence(const std::vector<double>& pi) const {
    double s = 0.0;
    if (classical) {
      for (std::size_t i = 0; i < pi.size(); ++i) {
        if (pi[i] > 0.0) s += pi[i] * std::log(pi[i] / (mu[i] * r[i]));
      }
      return s;
    }
    for (std::size_t i = 0; i < pi.size(); ++i) {
      if (pi[i] > 0.0) s += std::pow(pi[i] / mu[i], q) * std::pow(r[i], 1.0 - q) * mu[i];
    }
    return (1.0 - s) / (1.0 - q);
  }

  // Constraint values minus targets and their gradients in pi.
  void residuals(const std::vector<double>& pi, std::vector<double>& g, std::vector<std::vector<double>>& grad) const {
    const std::size_t k = pi.size();
    std::vector<double> pq(k), dpq(k);
    double mass = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double p = std::max(pi[i] / mu[i], 1e-300);
      pq[i] = classical ? p : std::pow(p, q);
      dpq[i] = classical ? 1.0 : q * std::pow(p, q - 1.0);
      mass += pq[i] * mu[i];
    }
    const bool normalized = kind == ConstraintKind::normalized_q_expectation && !classical;
    g.assign(u.size(), 0.0);
    grad.assign(u.size(), std::vector<double>(k, 0.0));
    for (std::size_t m = 0; m < u.size(); ++m) {
      for (std::size_t i = 0; i < k; ++i) g[m] += u[m][i] * pq[i] * mu[i];
      if (normalized) g[m] /= mass;
      for (std::size_t i = 0; i < k; ++i) grad[m][i] = normalized ? dpq[i] * (u[m][i] - g[m]) / mass : u[m][i] * dpq[i];
      g[m] -= targets[m];
    }
  }

  // True when every constraint is met within the slack band h * |grad g|_1.
  bool feasible(const std::vector<double>& pi, double h) const {
    const std::size_t k = pi.size();
    std::vector<double> p(k), pq(k), dpq(k);
    for (std::size_t i = 0; i < k; ++i) {
      p[i] = pi[i] / mu[i];
      const double floored = std::max(p[i], h / (2.0 * mu[i]));
      pq[i] = classical ? p[i] : (p[i] > 0.0 ? std::pow(p[i], q) : 0.0);
      dpq[i] = classical ? 1.0 : q * std::pow(floored, q - 1.0);
    }
    double mass = 0.0;
    for (std::size_t i = 0; i < k; ++i) mass += pq[i] * mu[i];
    for (std::size_t m = 0; m < u.size(); ++m) {
      double g = 0.0;
      for (std::size_t i = 0; i < k; ++i) g += u[m][i] * pq[i] * mu[i];
      double slope = 0.0;
      if (kind == ConstraintKind::normalized_q_expectation && !classical) {
        g /= mass;
        for (std::size_t i = 0; i < k; ++i) slope += std::abs(dpq[i] * (u[m][i] - g) / mass);
      } else {
        for (std::size_t i = 0; i < k; ++i) slope += std::abs(u[m][i] * dpq[i]);
      }
      if (std::abs(g - targets[m]) > h * slope + 1e-13) return false;
    }
    return true;
  }
};

struct Best {
  std::vector<double> pi;
  double value = std::numeric_limits<double>::infinity();
};

void consider(const Primal& primal, const std::vector<double>& pi, double h, Best& best) {
  if (!primal.feasible(pi, h)) return;
  const double v = primal.divergence(pi);
  if (v < best.value) {
    best.value = v;
    best.pi = pi;
  }
}

// Every composition of n steps into k parts.
void enumerate(const Primal& primal, std::size_t k, long n, double h, Best& best) {
  std::vector<long> steps(k, 0);
  std::vector<double> pi(k);
  auto recurse = [&](auto&& self, std::size_t index, long left) -> void {
    if (index + 1 == k) {
      steps[index] = left;
      for (std::size_t i = 0; i < k; ++i) pi[i] = static_cast<double>(steps[i]) / static_cast<double>(n);
      consider(primal, pi, h, best);
      return;
    }
    for (long s = 0; s <= left; ++s) {
      steps[index] = s;
      self(self, index + 1, left - s);
    }
  };
  recurse(recurse, 0, n);
}

// Window of +-radius steps of size d around center in the first k-1 coordinates.
void window(const Primal& primal, const std::vector<double>& center, double d, int radius, Best& best) {
  const std::size_t k = center.size();
  std::vector<int> offset(k - 1, -radius);
  std::vector<double> pi(k);
  for (;;) {
    double sum = 0.0;
    bool inside = true;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      pi[i] = center[i] + offset[i] * d;
      if (pi[i] < 0.0) inside = false;
      sum += pi[i];
    }
    pi[k - 1] = 1.0 - sum;
    if (inside && pi[k - 1] >= 0.0) consider(primal, pi, d, best);
    std::size_t j = 0;
    while (j < k - 1 && ++offset[j] > radius) offset[j++] = -radius;
    if (j == k - 1) break;
  }
}

// Moves pi onto the constraint surface inside the simplex with minimum-norm
// Gauss-Newton steps in the tangent space of sum(pi) = 1.
std::vector<double> restore(const Primal& primal, std::vector<double> pi) {
  const std::size_t k = pi.size();
  const std::size_t m_count = primal.u.size();
  std::vector<double> g;
  std::vector<std::vector<double>> grad;
  for (int it = 0; it < 100; ++it) {
    primal.residuals(pi, g, grad);
    double worst = 0.0;
    for (double v : g) worst = std::max(worst, std::abs(v));
    if (worst < 1e-14) break;
    Eigen::MatrixXd j(static_cast<Eigen::Index>(m_count), static_cast<Eigen::Index>(k));
    Eigen::VectorXd r(static_cast<Eigen::Index>(m_count));
    for (std::size_t m = 0; m < m_count; ++m) {
      double mean = 0.0;
      for (double v : grad[m]) mean += v;
      mean /= static_cast<double>(k);
      for (std::size_t i = 0; i < k; ++i) j(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i)) = grad[m][i] - mean;
      r[static_cast<Eigen::Index>(m)] = g[m];
    }
    const Eigen::VectorXd step = -j.transpose() * (j * j.transpose()).completeOrthogonalDecomposition().solve(r);
    double scale = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double s = step[static_cast<Eigen::Index>(i)];
      if (pi[i] + s < 0.0) scale = std::min(scale, 0.9 * pi[i] / -s);
    }
    if (!(scale > 1e-12) || !step.allFinite()) break;
    for (std::size_t i = 0; i < k; ++i) pi[i] += scale * step[static_cast<Eigen::Index>(i)];
  }
  return pi;
}

}  // namespace

Density brute_force_primal(const Density& prior, const FeatureSet& features, const MomentSpec& spec,
                           double grid_spacing) {
  require_same_space(prior.space(), features.space(), "brute_force_primal");
  if (spec.targets.size() != features.count()) throw InvalidArgument("brute_force_primal: target count mismatch");
  if (!(grid_spacing > 0.0 && grid_spacing <= 0.5)) {
    throw InvalidArgument("brute_force_primal: grid spacing must lie in (0, 0.5]");
  }
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (prior[i] > 0.0) support.push_back(i);
  }
  if (support.size() > 4) throw InvalidArgument("brute_force_primal: at most 4 support points");

  Primal primal;
  primal.kind = spec.kind;
  primal.q = spec.q.value();
  primal.classical = spec.kind == ConstraintKind::classical || spec.q.is_classical();
  primal.targets = spec.targets;
  primal.u.assign(features.count(), {});
  for (std::size_t i : support) {
    primal.r.push_back(prior[i]);
    primal.mu.push_back(prior.space()->mu(i));
    for (std::size_t m = 0; m < features.count(); ++m) primal.u[m].push_back(features(m, i));
  }

  const std::size_t k = support.size();
  Best best;
  if (k == 1) {
    consider(primal, {1.0}, 1e-9, best);
  } else {
    const long n = std::lround(1.0 / grid_spacing);
    const double h = 1.0 / static_cast<double>(n);
    enumerate(primal, k, n, h, best);
    if (best.pi.empty()) {
      throw InfeasibleError("brute_force_primal: no grid point satisfies the constraints");
    }
    constexpr int kRadius = 16;
    double d = h;
    for (int level = 0; level < 12; ++level) {
      d /= 4.0;
      // The slack band shrinks with d, so the previous optimum is re-scored.
      Best level_best;
      auto center = best.pi;
      for (int recenter = 0; recenter < 200; ++recenter) {
        window(primal, center, d, kRadius, level_best);
        if (level_best.pi.empty() && recenter == 0) {
          // The band narrowed away from the previous optimum.
          center = restore(primal, center);
          window(primal, center, d, kRadius, level_best);
        }
        if (level_best.pi.empty() || level_best.pi == center) break;
        center = level_best.pi;
      }
      if (level_best.pi.empty()) break;
      best = level_best;
    }
  }
  if (best.pi.empty()) throw InfeasibleError("brute_force_primal: no grid point satisfies the constraints");

  std::vector<double> probabilities(prior.size(), 0.0);
  double total = 0.0;
  for (double v : best.pi) total += v;
  for (std::size_t j = 0; j < k; ++j) probabilities[support[j]] = best.pi[j] / total;
  return Density::from_probabilities(prior.space(), probabilities);
}

}  // namespace minrel
