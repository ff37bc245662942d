#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "minrel/errors.hpp"
#include "minrel/measures.hpp"

using namespace minrel;

namespace {

Density two_point(double a, double b) {
  return Density::from_probabilities(FiniteSpace::counting(2), std::vector<double>{a, b});
}

}  // namespace

TEST_CASE("space and density invariants") {
  CHECK_THROWS_AS(FiniteSpace({"a"}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(FiniteSpace({"a", "a"}, {1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(FiniteSpace({"a", "b"}, {1.0, 0.0}), InvalidArgument);
  const auto space = FiniteSpace::make({"a", "b"}, {0.5, 2.0});
  CHECK_THROWS_AS(Density(space, {1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(Density(space, {-0.2, 0.55}), InvalidArgument);
  const Density d(space, {1.0, 0.25});
  CHECK(d.probability(0) == doctest::Approx(0.5));
  CHECK(d.probability(1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(FeatureSet(space, {{2.0, 2.0}}), InvalidArgument);
  CHECK_THROWS_AS(FeatureSet(space, {{2.0}}), InvalidArgument);
  CHECK(FeatureSet(space, {}).empty());
}

TEST_CASE("Shannon relative entropy values") {
  const auto p = two_point(0.3, 0.7);
  const auto r = two_point(0.5, 0.5);
  CHECK(shannon_relative_entropy(p, p) == 0.0);
  CHECK(shannon_relative_entropy(p, r) == doctest::Approx(0.3 * std::log(0.6) + 0.7 * std::log(1.4)).epsilon(1e-14));
  CHECK(shannon_relative_entropy(p, r) == doctest::Approx(0.08228).epsilon(1e-4));
  CHECK(std::isinf(shannon_relative_entropy(two_point(1, 0), two_point(0, 1))));
  CHECK_THROWS_AS(shannon_relative_entropy(p, Density::uniform(FiniteSpace::counting(3))), InvalidArgument);
}

TEST_CASE("Tsallis entropy values") {
  CHECK(tsallis_entropy(two_point(0.5, 0.5), QIndex(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
  for (double q : {0.3, 1.0, 2.0}) CHECK(tsallis_entropy(two_point(1, 0), QIndex(q)) == 0.0);
  const auto p = two_point(0.3, 0.7);
  CHECK(std::abs(tsallis_entropy(p, QIndex(1.0 + 1e-7)) - shannon_entropy(p)) < 1e-6);
}

TEST_CASE("Tsallis relative entropy values") {
  const auto p = two_point(0.3, 0.7);
  const auto r = two_point(0.5, 0.5);
  CHECK(tsallis_relative_entropy(p, p, QIndex(0.7)) == doctest::Approx(0.0));
  CHECK(tsallis_relative_entropy(p, r, QIndex(2.0)) == doctest::Approx(0.16).epsilon(1e-14));
  CHECK(tsallis_relative_entropy_decomposed(p, r, QIndex(2.0)) == doctest::Approx(0.16).epsilon(1e-13));
  for (double eps : {-1e-8, 1e-8}) {
    CHECK(std::abs(tsallis_relative_entropy(p, r, QIndex(1.0 + eps)) - shannon_relative_entropy(p, r)) < 1e-6);
  }
  CHECK(std::isinf(tsallis_relative_entropy(two_point(1, 0), two_point(0, 1), QIndex(0.5))));
}

TEST_CASE("moments") {
  const auto space = FiniteSpace::counting(2);
  const auto p = two_point(0.3, 0.7);
  const std::vector<double> u{0.0, 1.0};
  const std::vector<double> c{3.0, 3.0};
  CHECK(q_expectation(u, p, QIndex(2.0)) == doctest::Approx(0.49).epsilon(1e-15));
  CHECK(q_expectation(u, p, QIndex(1.0)) == doctest::Approx(expectation(u, p)));
  CHECK(expectation(c, p) == doctest::Approx(3.0));
  CHECK(normalized_q_expectation(u, p, QIndex(2.0)) == doctest::Approx(0.49 / 0.58).epsilon(1e-15));
  CHECK(normalized_q_expectation(u, p, QIndex(2.0)) == doctest::Approx(0.8448).epsilon(1e-4));
  CHECK(normalized_q_expectation(c, p, QIndex(0.4)) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("product density") {
  const auto a = two_point(0.3, 0.7);
  const auto b = two_point(0.4, 0.6);
  const auto ab = product_density(a, b);
  const std::vector<double> expected{0.12, 0.18, 0.28, 0.42};
  for (std::size_t i = 0; i < 4; ++i) CHECK(ab[i] == doctest::Approx(expected[i]).epsilon(1e-15));
  const auto uu = product_density(two_point(0.5, 0.5), two_point(0.5, 0.5));
  for (std::size_t i = 0; i < 4; ++i) CHECK(uu[i] == doctest::Approx(0.25));
  const auto degenerate = product_density(two_point(1, 0), b);
  CHECK(degenerate[0] == doctest::Approx(0.4));
  CHECK(degenerate[1] == doctest::Approx(0.6));
  CHECK(degenerate[2] == 0.0);
}

TEST_CASE("randomized divergence properties") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> qs(0.1, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + trial % 4;
    std::vector<double> mu(n);
    for (double& m : mu) m = 0.2 + qs(rng);
    const auto space = FiniteSpace::make({}, mu);
    const auto p = testing_support::random_density(rng, space);
    const auto r = testing_support::random_density(rng, space);
    const QIndex q(qs(rng));
    CHECK(shannon_relative_entropy(p, r) >= 0.0);
    CHECK(tsallis_relative_entropy(p, r, q) >= 0.0);
    CHECK(std::abs(tsallis_relative_entropy(p, p, q)) < 1e-10);
    CHECK(std::abs(tsallis_relative_entropy(p, r, q) - tsallis_relative_entropy_decomposed(p, r, q)) < 1e-10);
    CHECK(std::abs(tsallis_entropy(p, q) - tsallis_entropy_power_sum(p, q)) < 1e-10);
    const auto p2 = testing_support::random_density(rng, space);
    const auto r2 = testing_support::random_density(rng, space);
    const double i1 = tsallis_relative_entropy(p, r, q);
    const double i2 = tsallis_relative_entropy(p2, r2, q);
    const double joint = tsallis_relative_entropy(product_density(p, p2), product_density(r, r2), q);
    CHECK(std::abs(joint - (i1 + i2 + (q.value() - 1.0) * i1 * i2)) < 1e-9);
  }
}
