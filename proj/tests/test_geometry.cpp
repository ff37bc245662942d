#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "minrel/errors.hpp"
#include "minrel/geometry.hpp"

using namespace minrel;

namespace {

SpacePtr two() { return FiniteSpace::counting(2); }

}  // namespace

TEST_CASE("classical triangle on the three-point line") {
  const auto space = FiniteSpace::counting(3);
  const auto r = Density::uniform(space);
  const FeatureSet u(space, {{0.0, 1.0, 2.0}});
  // feasible l: mean 1.2
  const auto l = Density::from_probabilities(space, std::vector<double>{0.3, 0.2, 0.5});
  const auto rep = verify_classical_pythagoras(r, u, {1.2}, l);
  CHECK(std::abs(rep.triangle_residual) < 1e-8);
  CHECK(rep.I_lr >= rep.I_pr);
  const auto bad = Density::from_probabilities(space, std::vector<double>{0.5, 0.2, 0.3});
  CHECK_THROWS_AS(verify_classical_pythagoras(r, u, {1.2}, bad), PreconditionError);
}

TEST_CASE("l = p gives a degenerate triangle") {
  const auto space = two();
  const auto r = Density::uniform(space);
  const FeatureSet u(space, {{0.0, 1.0}});
  const auto p = solve_tsallis_q(r, u, {ConstraintKind::q_expectation, {0.49}, QIndex(2.0)});
  const auto rep = triangle_report(r, u, p.posterior, p);
  CHECK(rep.I_lp == doctest::Approx(0.0));
  CHECK(std::abs(rep.matching_residuals[0]) < 1e-12);
  CHECK(std::abs(rep.triangle_residual) < 1e-12);
}

TEST_CASE("expectation matching scan") {
  const auto space = two();
  const FeatureSet u(space, {{0.0, 1.0}});
  const auto l = Density::from_probabilities(space, std::vector<double>{0.4, 0.6});
  std::vector<std::vector<double>> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back({0.5 + 0.01 * k});
  for (double r0 : {0.5, 0.45}) {
    const auto r = Density::from_probabilities(space, std::vector<double>{r0, 1.0 - r0});
    const auto scan = scan_expectation_matching_classical(r, u, l, grid);
    CHECK(scan.argmin == 10);
    CHECK(scan.argmin_is_closest());
  }
}

TEST_CASE("q-regime matching along a three-point mixture") {
  std::mt19937_64 rng(11);
  const auto space = FiniteSpace::counting(3);
  for (double qv : {0.5, 1.5, 2.0}) {
    for (auto kind : {ConstraintKind::q_expectation, ConstraintKind::normalized_q_expectation}) {
      const QIndex q(qv);
      const auto r = Density::from_probabilities(space, std::vector<double>{0.3, 0.3, 0.4});
      const FeatureSet u(space, {{0.0, 1.0, 2.0}});
      const auto target = moments(kind, u, Density::from_probabilities(space, std::vector<double>{0.25, 0.35, 0.4}), q);
      const MomentSpec spec{kind, target, q};
      const auto a = Density::from_probabilities(space, std::vector<double>{0.6, 0.1, 0.3});
      const auto b = Density::from_probabilities(space, std::vector<double>{0.1, 0.4, 0.5});
      const auto m = match_along_mixture(r, u, spec, a, b);
      CAPTURE(qv);
      CHECK(std::abs(m.matched.matching_residuals[0]) <= 1e-10);
      CHECK(m.matched.I_lp > 1e-6);
      CHECK(m.matched.scaled_triangle_residual() < 1e-8);
      for (const auto& rep : m.scan) CHECK(rep.inequality_sign_consistent());
    }
  }
}

TEST_CASE("thermodynamic identities on the worked problems") {
  const auto space = two();
  const auto r = Density::uniform(space);
  const FeatureSet u(space, {{0.0, 1.0}});
  for (const MomentSpec& spec : {MomentSpec{ConstraintKind::classical, {0.7}, QIndex::classical()},
                                 MomentSpec{ConstraintKind::q_expectation, {0.49}, QIndex(2.0)},
                                 MomentSpec{ConstraintKind::normalized_q_expectation, {0.49 / 0.58}, QIndex(2.0)},
                                 MomentSpec{ConstraintKind::q_expectation, {0.3}, QIndex(0.5)},
                                 MomentSpec{ConstraintKind::normalized_q_expectation, {0.3}, QIndex(0.5)}}) {
    const auto res = solve(r, u, spec);
    for (const auto& c : check_thermodynamic_identities(r, u, res)) {
      CAPTURE(c.identity);
      CAPTURE(c.finite_difference);
      CAPTURE(c.expected);
      CHECK(c.residual < 1e-5);
    }
  }
}
