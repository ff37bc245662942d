#pragma once

// q-deformed logarithm, exponential and product.
//
// All functions are pure. Near q = 1 (|q - 1| < kClassicalEpsilon) they
// dispatch to ln / exp / ordinary multiplication; elsewhere the deformed
// formulas are evaluated through expm1/log1p so that they stay accurate as
// (1 - q) becomes small.

#include <cstdint>

namespace minrel {

inline constexpr double kClassicalEpsilon = 1e-8;

/// Entropic index q > 0.
class QIndex {
 public:
  /// Throws DomainError unless q is finite and positive.
  explicit QIndex(double q);

  static QIndex classical() { return QIndex(1.0); }

  double value() const noexcept { return q_; }
  /// 1 - q, the exponent that appears in every deformed formula.
  double one_minus() const noexcept { return 1.0 - q_; }
  bool is_classical() const noexcept;

  friend bool operator==(QIndex a, QIndex b) noexcept { return a.q_ == b.q_; }

 private:
  double q_;
};

/// ln_q x = (x^(1-q) - 1) / (1 - q). Throws DomainError for x <= 0.
double q_log(double x, QIndex q);

/// e_q^x = [1 + (1-q) x]^(1/(1-q)). Returns 0 on the cut-off branch (base <= 0, q < 1);
/// throws DomainError when the base is nonpositive and q > 1.
double q_exp(double x, QIndex q);

/// x (x)_q y = (x^(1-q) + y^(1-q) - 1)^(1/(1-q)) when x, y > 0 and the base is
/// positive, 0 otherwise.
double q_product(double x, double y, QIndex q);

/// n-fold q-product of x with itself, in closed form (n x^(1-q) - (n-1))^(1/(1-q)).
double q_power_n(double x, std::int64_t n, QIndex q);

/// (1 + x/n) raised to the n-fold q-product; tends to e_q^x as n grows.
double q_exp_by_limit(double x, std::int64_t n, QIndex q);

/// x^q with the convention 0^q = 0 for q > 0.
double q_pow(double x, QIndex q);

}  // namespace minrel
