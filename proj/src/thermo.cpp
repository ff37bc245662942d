#include <Eigen/Dense>
#include <cmath>

#include "minrel/errors.hpp"
#include "minrel/geometry.hpp"

namespace minrel {

namespace {

ThermoCheck make_check(std::string identity, std::size_t index, double fd, double expected) {
  ThermoCheck c;
  c.identity = std::move(identity);
  c.index = index;
  c.finite_difference = fd;
  c.expected = expected;
  c.residual = std::abs(fd - expected) / std::max(1.0, std::abs(expected));
  return c;
}

}  // namespace

std::vector<ThermoCheck> check_thermodynamic_identities(const Density& prior, const FeatureSet& features,
                                                        const SolveResult& result, double h,
                                                        const SolverOptions& options) {
  if (!result.converged) throw InvalidArgument("check_thermodynamic_identities: solve did not converge");
  if (!(h > 0.0)) throw InvalidArgument("check_thermodynamic_identities: step must be positive");
  const std::size_t m_count = result.beta.size();
  const QIndex q = result.q;
  const bool normalized = result.kind == ConstraintKind::normalized_q_expectation && !q.is_classical();
  const char* log_name = q.is_classical() ? "ln" : "ln_q";

  // Re-solves need residuals well below h^2 for the quotient to resolve -beta.
  SolverOptions tight = options;
  tight.tolerance = std::min(options.tolerance, 1e-12);
  tight.outer_tolerance = std::min(options.outer_tolerance, 1e-12);

  std::vector<double> achieved(m_count);
  for (std::size_t m = 0; m < m_count; ++m) achieved[m] = result.targets[m] + result.residuals[m];

  std::vector<ThermoCheck> checks;
  if (!normalized) {
    for (std::size_t m = 0; m < m_count; ++m) {
      auto plus = result.beta;
      auto minus = result.beta;
      plus[m] += h;
      minus[m] -= h;
      const double fd =
          (log_partition_at(prior, features, plus, q) - log_partition_at(prior, features, minus, q)) / (2.0 * h);
      checks.push_back(make_check(std::string("d ") + log_name + " Z / d beta = -U", m, fd, -achieved[m]));
    }
  }

  const MomentSpec base{result.kind, result.targets, result.q};
  Eigen::MatrixXd dbeta(m_count, m_count);
  Eigen::VectorXd dlogz(m_count);
  for (std::size_t k = 0; k < m_count; ++k) {
    MomentSpec plus = base;
    MomentSpec minus = base;
    plus.targets[k] += h;
    minus.targets[k] -= h;
    const auto rp = solve(prior, features, plus, tight);
    const auto rm = solve(prior, features, minus, tight);
    checks.push_back(make_check("dI / dU = -beta", k, (rp.divergence - rm.divergence) / (2.0 * h), -result.beta[k]));
    if (normalized) {
      // ln_q Z_q(U) = ln_q Zbar_q - sum beta U = -I - sum beta U.
      auto log_z = [](const SolveResult& r) {
        double v = -r.divergence;
        for (std::size_t m = 0; m < r.beta.size(); ++m) v -= r.beta[m] * r.targets[m];
        return v;
      };
      dlogz[static_cast<Eigen::Index>(k)] = (log_z(rp) - log_z(rm)) / (2.0 * h);
      for (std::size_t m = 0; m < m_count; ++m) {
        dbeta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = (rp.beta[m] - rm.beta[m]) / (2.0 * h);
      }
    }
  }
  if (normalized && m_count > 0) {
    // d/dbeta = (dbeta/dU)^(-T) d/dU
    const Eigen::VectorXd grad = dbeta.transpose().colPivHouseholderQr().solve(dlogz);
    for (std::size_t m = 0; m < m_count; ++m) {
      checks.push_back(make_check("d ln_q Z / d beta = -U, ln_q Z = ln_q Zbar - beta U", m,
                                  grad[static_cast<Eigen::Index>(m)], -achieved[m]));
    }
  }
  return checks;
}

}  // namespace minrel
