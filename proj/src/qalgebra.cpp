#include "minrel/qalgebra.hpp"

#include <cmath>
#include <string>

#include "minrel/errors.hpp"

namespace minrel {

namespace {

// x^(1-q) - 1 without cancellation when (1-q) ln x is small.
double pow_minus_one(double x, double a) { return std::expm1(a * std::log(x)); }

// (1 + t)^(1/a) for 1 + t > 0.
double root_of_one_plus(double t, double a) { return std::exp(std::log1p(t) / a); }

}  // namespace

QIndex::QIndex(double q) : q_(q) {
  if (!std::isfinite(q) || q <= 0.0) {
    throw DomainError("entropic index q must be finite and > 0, got " + std::to_string(q));
  }
}

bool QIndex::is_classical() const noexcept { return std::abs(q_ - 1.0) < kClassicalEpsilon; }

double q_log(double x, QIndex q) {
  if (!(x > 0.0)) throw DomainError("q_log: argument must be > 0, got " + std::to_string(x));
  if (q.is_classical()) return std::log(x);
  const double a = q.one_minus();
  return pow_minus_one(x, a) / a;
}

double q_exp(double x, QIndex q) {
  if (q.is_classical()) return std::exp(x);
  const double a = q.one_minus();
  const double t = a * x;
  if (1.0 + t > 0.0) return root_of_one_plus(t, a);
  if (a > 0.0) return 0.0;  // Tsallis cut-off
  throw DomainError("q_exp: base 1 + (1-q)x = " + std::to_string(1.0 + t) +
                    " is nonpositive for q = " + std::to_string(q.value()) + " > 1");
}

double q_product(double x, double y, QIndex q) {
  if (q.is_classical()) return (x > 0.0 && y > 0.0) ? x * y : 0.0;
  if (!(x > 0.0) || !(y > 0.0)) return 0.0;
  const double a = q.one_minus();
  const double t = pow_minus_one(x, a) + pow_minus_one(y, a);
  if (!(1.0 + t > 0.0)) return 0.0;
  return root_of_one_plus(t, a);
}

double q_power_n(double x, std::int64_t n, QIndex q) {
  if (n < 1) throw DomainError("q_power_n: n must be >= 1");
  if (!(x > 0.0)) throw DomainError("q_power_n: x must be > 0");
  if (n == 1) return x;
  if (q.is_classical()) return std::pow(x, static_cast<double>(n));
  const double a = q.one_minus();
  const double t = static_cast<double>(n) * pow_minus_one(x, a);
  if (!(1.0 + t > 0.0)) return 0.0;
  return root_of_one_plus(t, a);
}

double q_exp_by_limit(double x, std::int64_t n, QIndex q) {
  if (n < 1) throw DomainError("q_exp_by_limit: n must be >= 1");
  const double base = 1.0 + x / static_cast<double>(n);
  if (!(base > 0.0)) return 0.0;
  return q_power_n(base, n, q);
}

double q_pow(double x, QIndex q) {
  if (x == 0.0) return 0.0;
  return std::pow(x, q.value());
}

}  // namespace minrel
