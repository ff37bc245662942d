#include <cmath>
#include <limits>
#include <string>

#include "minrel/errors.hpp"
#include "minrel/projection.hpp"

namespace minrel {

std::vector<double> potential(const FeatureSet& features, std::span<const double> beta,
                              std::span<const double> shift, double scale) {
  const std::size_t n = features.space()->size();
  std::vector<double> phi(n, 0.0);
  for (std::size_t m = 0; m < features.count(); ++m) {
    const double c = shift.empty() ? 0.0 : shift[m];
    for (std::size_t i = 0; i < n; ++i) phi[i] += beta[m] * (features(m, i) - c);
  }
  if (scale != 1.0) {
    for (double& v : phi) v /= scale;
  }
  return phi;
}

FamilyMember classical_member(const Density& prior, std::span<const double> phi) {
  const auto mu = prior.space()->mu();
  const std::size_t n = prior.size();
  std::vector<double> log_w(n, -std::numeric_limits<double>::infinity());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (prior[i] == 0.0) continue;
    log_w[i] = std::log(prior[i]) - phi[i];
    peak = std::max(peak, log_w[i] + std::log(mu[i]));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (prior[i] > 0.0) sum += std::exp(log_w[i] + std::log(mu[i]) - peak);
  }
  const double log_z = peak + std::log(sum);
  FamilyMember out;
  out.density.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (prior[i] > 0.0) out.density[i] = std::exp(log_w[i] - log_z);
  }
  out.partition = std::exp(log_z);
  return out;
}

namespace {

// Bracket written as 1 + t so that (1 + t)^(1/(1-q)) can go through log1p.
std::vector<double> bracket_offsets(const Density& prior, std::span<const double> phi, QIndex q) {
  const double a = q.one_minus();
  std::vector<double> t(prior.size(), -1.0);
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (prior[i] > 0.0) t[i] = std::expm1(a * std::log(prior[i])) - a * phi[i];
  }
  return t;
}

}  // namespace

std::vector<double> tsallis_brackets(const Density& prior, std::span<const double> phi, QIndex q) {
  auto t = bracket_offsets(prior, phi, q);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = prior[i] > 0.0 ? 1.0 + t[i] : 0.0;
  return t;
}

FamilyMember tsallis_member(const Density& prior, std::span<const double> phi, QIndex q) {
  if (q.is_classical()) return classical_member(prior, phi);
  const auto mu = prior.space()->mu();
  const double a = q.one_minus();
  const auto t = bracket_offsets(prior, phi, q);
  FamilyMember out;
  out.density.assign(prior.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (prior[i] > 0.0 && 1.0 + t[i] > 0.0) {
      out.density[i] = std::exp(std::log1p(t[i]) / a);
      z += out.density[i] * mu[i];
    }
  }
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw DomainError("Tsallis bracket is nonpositive on the whole support (degenerate solution)");
  }
  for (double& v : out.density) v /= z;
  out.partition = z;
  return out;
}

FamilyMember tsallis_member_q_product(const Density& prior, std::span<const double> phi, QIndex q) {
  const auto mu = prior.space()->mu();
  FamilyMember out;
  out.density.assign(prior.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    out.density[i] = q_product(prior[i], q_exp(-phi[i], q), q);
    z += out.density[i] * mu[i];
  }
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("q-product form vanishes on the whole space");
  for (double& v : out.density) v /= z;
  out.partition = z;
  return out;
}

double log_partition_at(const Density& prior, const FeatureSet& features, std::span<const double> beta,
                        QIndex q) {
  const auto phi = potential(features, beta);
  if (q.is_classical()) return std::log(classical_member(prior, phi).partition);
  return q_log(tsallis_member(prior, phi, q).partition, q);
}

double q_product_representation_gap(const SolveResult& result, const Density& prior,
                                    const FeatureSet& features) {
  std::vector<double> phi;
  if (result.kind == ConstraintKind::normalized_q_expectation) {
    phi = potential(features, result.beta, result.targets, result.q_mass);
  } else {
    phi = potential(features, result.beta);
  }
  double gap = 0.0;
  try {
    for (std::size_t i = 0; i < prior.size(); ++i) {
      const double w = result.q.is_classical() ? prior[i] * std::exp(-phi[i])
                                               : q_product(prior[i], q_exp(-phi[i], result.q), result.q);
      gap = std::max(gap, std::abs(w / result.partition - result.posterior[i]));
    }
  } catch (const DomainError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return gap;
}

}  // namespace minrel
