#include <cmath>
#include <random>

#include "doctest.h"
#include "minrel/errors.hpp"
#include "minrel/qalgebra.hpp"

using namespace minrel;

TEST_CASE("q_log values") {
  CHECK(q_log(1.0, QIndex(2.0)) == 0.0);
  CHECK(q_log(2.0, QIndex(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(q_log(std::exp(1.0), QIndex(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(q_log(0.0, QIndex(0.5)), DomainError);
  CHECK_THROWS_AS(q_log(-1.0, QIndex(1.0)), DomainError);
}

TEST_CASE("q_exp values and branches") {
  CHECK(q_exp(0.0, QIndex(0.5)) == 1.0);
  CHECK(q_exp(0.5, QIndex(2.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(q_exp(-3.0, QIndex(0.5)) == 0.0);
  CHECK_THROWS_AS(q_exp(1.0, QIndex(2.0)), DomainError);
  CHECK_THROWS_AS(q_exp(2.0, QIndex(3.0)), DomainError);
}

TEST_CASE("q_product values") {
  for (double q : {0.3, 1.0, 2.5}) CHECK(q_product(1.7, 1.0, QIndex(q)) == doctest::Approx(1.7).epsilon(1e-14));
  // 0.2^(1-q) + 0.2^(1-q) - 1 < 0 as q -> 0
  CHECK(q_product(0.2, 0.2, QIndex(1e-3)) == 0.0);
  CHECK(q_product(2.0, 2.0, QIndex(0.5)) == doctest::Approx(std::pow(2.0 * std::sqrt(2.0) - 1.0, 2.0)).epsilon(1e-14));
  CHECK(q_product(2.0, 2.0, QIndex(0.5)) == doctest::Approx(3.3431).epsilon(1e-4));
  CHECK(q_product(0.0, 3.0, QIndex(0.5)) == 0.0);
  CHECK(q_product(3.0, 4.0, QIndex(1.0)) == 12.0);
}

TEST_CASE("q_power_n closed form agrees with folding") {
  const QIndex q(0.5);
  double folded = 2.0;
  for (int k = 1; k < 3; ++k) folded = q_product(folded, 2.0, q);
  CHECK(q_power_n(2.0, 3, q) == doctest::Approx(folded).epsilon(1e-14));
  CHECK(q_power_n(2.0, 3, q) == doctest::Approx(std::pow(3.0 * std::sqrt(2.0) - 2.0, 2.0)).epsilon(1e-14));
  CHECK(q_power_n(1.3, 1, QIndex(1.7)) == doctest::Approx(1.3).epsilon(1e-15));
  CHECK(q_power_n(1.3, 4, QIndex(1.0)) == doctest::Approx(std::pow(1.3, 4)).epsilon(1e-14));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(0.1, 3.0), qd(0.2, 2.5);
  for (int trial = 0; trial < 200; ++trial) {
    const double xv = x(rng);
    const QIndex qv(qd(rng));
    for (int n = 1; n <= 6; ++n) {
      double acc = xv;
      for (int k = 1; k < n; ++k) acc = q_product(acc, xv, qv);
      CHECK(q_power_n(xv, n, qv) == doctest::Approx(acc).epsilon(1e-10));
    }
  }
}

TEST_CASE("q_exp_by_limit converges") {
  CHECK(q_exp_by_limit(0.0, 50, QIndex(1.7)) == 1.0);
  CHECK(std::abs(q_exp_by_limit(0.5, 10000, QIndex(2.0)) - q_exp(0.5, QIndex(2.0))) < 1e-3);
  CHECK(std::abs(q_exp_by_limit(1.0, 10000, QIndex(1.0)) - std::exp(1.0)) < 1e-3);
}

TEST_CASE("algebraic laws on random inputs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> xs(0.05, 10.0), qs(0.05, 3.0);
  int checked = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    const double x = xs(rng), y = xs(rng);
    const QIndex q(qs(rng));
    const double a = q.one_minus();
    // ln_q(x/y) = y^(q-1) (ln_q x - ln_q y)
    CHECK(q_log(x / y, q) == doctest::Approx(std::pow(y, -a) * (q_log(x, q) - q_log(y, q))).epsilon(1e-11));
    // ln_q(xy) = ln_q x + ln_q y + (1-q) ln_q x ln_q y
    CHECK(q_log(x * y, q) ==
          doctest::Approx(q_log(x, q) + q_log(y, q) + a * q_log(x, q) * q_log(y, q)).epsilon(1e-11));
    CHECK(q_exp(q_log(x, q), q) == doctest::Approx(x).epsilon(1e-12));
    if (std::pow(x, a) + std::pow(y, a) - 1.0 > 1e-6) {
      CHECK(q_log(q_product(x, y, q), q) == doctest::Approx(q_log(x, q) + q_log(y, q)).epsilon(1e-10));
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("distributive law fails off the classical switch") {
  const QIndex q(0.5);
  CHECK(std::abs(2.0 * q_product(2.0, 2.0, q) - q_product(4.0, 2.0, q)) > 1e-3);
}

TEST_CASE("continuity across the classical switch") {
  for (double eps : {-kClassicalEpsilon * 1.01, kClassicalEpsilon * 1.01}) {
    const QIndex q(1.0 + eps);
    CHECK_FALSE(q.is_classical());
    const QIndex one = QIndex::classical();
    CHECK(std::abs(q_log(2.7, q) - q_log(2.7, one)) < 1e-6);
    CHECK(std::abs(q_exp(-0.8, q) - q_exp(-0.8, one)) < 1e-6);
    CHECK(std::abs(q_product(1.3, 2.2, q) - q_product(1.3, 2.2, one)) < 1e-6);
    CHECK(std::abs(q_power_n(1.1, 5, q) - q_power_n(1.1, 5, one)) < 1e-6);
  }
  CHECK(QIndex(1.0 + 0.5 * kClassicalEpsilon).is_classical());
}

TEST_CASE("QIndex rejects nonpositive values") {
  CHECK_THROWS_AS(QIndex(0.0), DomainError);
  CHECK_THROWS_AS(QIndex(-1.0), DomainError);
  CHECK_THROWS_AS(QIndex(std::nan("")), DomainError);
}
