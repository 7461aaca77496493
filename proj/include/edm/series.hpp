#pragma once

// Truncated power series at the origin.
//
// A TruncatedSeries of order N holds the Taylor coefficients c_0..c_N of an
// analytic function; every operation takes its output order explicitly and
// never promotes it.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace edm {

class TruncatedSeries {
 public:
  /// Zero series of the given order.
  explicit TruncatedSeries(std::size_t order = 0);
  /// Takes ownership of c_0..c_N; throws InvalidArgument on an empty or
  /// non-finite coefficient vector.
  explicit TruncatedSeries(std::vector<double> coeffs);
  TruncatedSeries(std::initializer_list<double> coeffs);

  static TruncatedSeries constant(double c, std::size_t order);
  /// The identity function m, truncated at `order` (order >= 1).
  static TruncatedSeries variable(std::size_t order);

  std::size_t order() const noexcept { return coeffs_.size() - 1; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }

  double operator[](std::size_t k) const { return coeffs_[k]; }
  double& operator[](std::size_t k) { return coeffs_[k]; }

  /// Copy re-truncated (or zero-padded) to `order`.
  TruncatedSeries with_order(std::size_t order) const;
  bool all_finite() const noexcept;

  friend bool operator==(const TruncatedSeries&, const TruncatedSeries&) = default;

 private:
  std::vector<double> coeffs_;
};

TruncatedSeries ps_mul(const TruncatedSeries& a, const TruncatedSeries& b,
                       std::size_t n);
TruncatedSeries ps_exp(const TruncatedSeries& a, std::size_t n);
TruncatedSeries ps_log(const TruncatedSeries& a, std::size_t n);
TruncatedSeries ps_pow(const TruncatedSeries& a, unsigned k, std::size_t n);
TruncatedSeries ps_binomial(double alpha, std::size_t n);
double ps_coeff(const TruncatedSeries& a, std::size_t k);

// Coefficient-wise helpers. Output order equals the input order unless
// stated otherwise.
TruncatedSeries ps_add(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries ps_scale(const TruncatedSeries& a, double factor);
/// f(m) -> f(beta * m): coefficient k is multiplied by beta^k.
TruncatedSeries ps_scale_arg(const TruncatedSeries& a, double beta);
/// Termwise derivative; the result has order max(order-1, 0).
TruncatedSeries ps_derivative(const TruncatedSeries& a);
/// Value of the truncated polynomial at m.
double ps_eval(const TruncatedSeries& a, double m);

/// Successive powers a, a^2, a^3, ... at a fixed truncation order, each
/// obtained from the previous one by a single product.
class SeriesPowers {
 public:
  SeriesPowers(TruncatedSeries base, std::size_t order);

  /// a^exponent(); starts at a^0 = 1.
  const TruncatedSeries& current() const noexcept { return current_; }
  unsigned exponent() const noexcept { return exponent_; }
  const TruncatedSeries& next();

 private:
  TruncatedSeries base_;
  TruncatedSeries current_;
  std::size_t order_;
  unsigned exponent_ = 0;
};

}  // namespace edm
