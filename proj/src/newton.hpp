#pragma once

// Damped Newton iteration for square nonlinear systems F(beta) = 0 with a
// backtracking line search on 0.5 |F|^2. Points where the residual callback
// returns nullopt are outside the admissible region and are never accepted.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>

namespace minrel::detail {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct NewtonSystem {
  std::function<std::optional<Vector>(const Vector&)> residual;
  /// Optional; central finite differences are used when empty.
  std::function<Matrix(const Vector&)> jacobian;
};

struct NewtonOutcome {
  Vector beta;
  Vector residual;
  int iterations = 0;
  bool converged = false;
  std::string failure;
};

inline Matrix finite_difference_jacobian(const NewtonSystem& sys, const Vector& beta, const Vector& f0) {
  const Eigen::Index m = beta.size();
  Matrix jac(f0.size(), m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(beta[k]));
    Vector plus = beta;
    Vector minus = beta;
    plus[k] += h;
    minus[k] -= h;
    auto fp = sys.residual(plus);
    auto fm = sys.residual(minus);
    if (fp && fm) {
      jac.col(k) = (*fp - *fm) / (2.0 * h);
    } else if (fp) {
      jac.col(k) = (*fp - f0) / h;
    } else if (fm) {
      jac.col(k) = (f0 - *fm) / h;
    } else {
      jac.col(k).setZero();
    }
  }
  return jac;
}

inline NewtonOutcome damped_newton(const NewtonSystem& sys, Vector beta, double tolerance,
                                   int max_iterations) {
  NewtonOutcome out;
  auto f = sys.residual(beta);
  if (!f) {
    out.beta = beta;
    out.failure = "starting point is outside the admissible region";
    return out;
  }
  for (int it = 0;; ++it) {
    out.iterations = it;
    if (f->size() == 0 || f->lpNorm<Eigen::Infinity>() < tolerance) {
      out.converged = true;
      // One more full step costs little and removes the residual * beta
      // error from the closed-form values.
      if (f->size() > 0) {
        const Matrix jac = sys.jacobian ? sys.jacobian(beta) : finite_difference_jacobian(sys, beta, *f);
        const Vector trial = beta + jac.colPivHouseholderQr().solve(-*f);
        auto ft = sys.residual(trial);
        if (ft && ft->allFinite() && ft->norm() < f->norm()) {
          beta = trial;
          f = std::move(ft);
        }
      }
      break;
    }
    if (it >= max_iterations) {
      out.failure = "reached the iteration limit";
      break;
    }
    const Matrix jac = sys.jacobian ? sys.jacobian(beta) : finite_difference_jacobian(sys, beta, *f);
    Eigen::ColPivHouseholderQR<Matrix> qr(jac);
    if (qr.rank() < beta.size() || !jac.allFinite()) {
      out.failure = "singular Jacobian";
      break;
    }
    const Vector step = qr.solve(-*f);
    const double merit = 0.5 * f->squaredNorm();
    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
      const Vector trial = beta + alpha * step;
      auto ft = sys.residual(trial);
      if (!ft || !ft->allFinite()) continue;
      if (0.5 * ft->squaredNorm() <= merit * (1.0 - 2e-4 * alpha)) {
        beta = trial;
        f = std::move(ft);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.failure = "line search could not reduce the residual";
      break;
    }
  }
  out.beta = beta;
  out.residual = *f;
  return out;
}

}  // namespace minrel::detail
