#pragma once

#include <random>
#include <vector>

#include "minrel/measures.hpp"

namespace testing_support {

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n, double floor = 0.02) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> w(n);
  double total = 0.0;
  for (double& v : w) {
    v = floor + unit(rng);
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

inline minrel::Density random_density(std::mt19937_64& rng, const minrel::SpacePtr& space, double floor = 0.02) {
  const auto probs = random_simplex(rng, space->size(), floor);
  return minrel::Density::from_probabilities(space, probs);
}

inline std::vector<double> random_feature(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> value(-1.0, 2.0);
  std::vector<double> u(n);
  for (;;) {
    for (double& v : u) v = value(rng);
    double lo = u[0], hi = u[0];
    for (double v : u) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > 0.3) return u;
  }
}

inline double sup_distance(const minrel::Density& a, const minrel::Density& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.probability(i) - b.probability(i)));
  return d;
}

}  // namespace testing_support
