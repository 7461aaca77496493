#include "edm/series.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "edm/errors.hpp"

namespace edm {

TruncatedSeries::TruncatedSeries(std::size_t order) : coeffs_(order + 1, 0.0) {}

TruncatedSeries::TruncatedSeries(std::vector<double> coeffs)
    : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "series needs at least c_0");
  }
  if (!all_finite()) {
    throw Error(ErrorCode::InvalidArgument, "series coefficients must be finite");
  }
}

TruncatedSeries::TruncatedSeries(std::initializer_list<double> coeffs)
    : TruncatedSeries(std::vector<double>(coeffs)) {}

TruncatedSeries TruncatedSeries::constant(double c, std::size_t order) {
  TruncatedSeries s(order);
  s[0] = c;
  return s;
}

TruncatedSeries TruncatedSeries::variable(std::size_t order) {
  TruncatedSeries s(std::max<std::size_t>(order, 1));
  s[1] = 1.0;
  return s;
}

TruncatedSeries TruncatedSeries::with_order(std::size_t order) const {
  TruncatedSeries s(order);
  std::copy_n(coeffs_.begin(), std::min(coeffs_.size(), order + 1),
              s.coeffs_.begin());
  return s;
}

bool TruncatedSeries::all_finite() const noexcept {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](double c) { return std::isfinite(c); });
}

namespace {

double at(const TruncatedSeries& a, std::size_t k) {
  return k <= a.order() ? a[k] : 0.0;
}

}  // namespace

TruncatedSeries ps_mul(const TruncatedSeries& a, const TruncatedSeries& b,
                       std::size_t n) {
  TruncatedSeries c(n);
  const std::size_t na = std::min(a.order(), n);
  for (std::size_t i = 0; i <= na; ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    const std::size_t nb = std::min(b.order(), n - i);
    for (std::size_t j = 0; j <= nb; ++j) c[i + j] += ai * b[j];
  }
  return c;
}

TruncatedSeries ps_exp(const TruncatedSeries& a, std::size_t n) {
  // c = exp(a) solves c' = a' c.
  TruncatedSeries c(n);
  c[0] = std::exp(a[0]);
  const std::size_t na = a.order();
  for (std::size_t k = 1; k <= n; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j <= std::min(k, na); ++j) {
      s += static_cast<double>(j) * a[j] * c[k - j];
    }
    c[k] = s / static_cast<double>(k);
  }
  return c;
}

TruncatedSeries ps_log(const TruncatedSeries& a, std::size_t n) {
  if (!(a[0] > 0.0)) {
    throw Error(ErrorCode::NonPositiveConstantTerm,
                "log needs a positive constant term, got " + std::to_string(a[0]));
  }
  // b = log(a) solves a b' = a'.
  TruncatedSeries b(n);
  b[0] = std::log(a[0]);
  for (std::size_t k = 1; k <= n; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j < k; ++j) {
      s += static_cast<double>(j) * b[j] * at(a, k - j);
    }
    b[k] = (at(a, k) - s / static_cast<double>(k)) / a[0];
  }
  return b;
}

TruncatedSeries ps_pow(const TruncatedSeries& a, unsigned k, std::size_t n) {
  if (k == 0) return TruncatedSeries::constant(1.0, n);

  // Factor out the valuation: a = m^v * b with b_0 != 0.
  std::size_t v = 0;
  while (v <= a.order() && a[v] == 0.0) ++v;
  if (v > a.order() || v * k > n) return TruncatedSeries(n);

  const std::size_t shift = v * k;
  const std::size_t nb = n - shift;
  const auto b = [&](std::size_t i) { return at(a, i + v); };

  // J.C.P. Miller recurrence for c = b^k: b c' = k b' c.
  std::vector<double> c(nb + 1, 0.0);
  c[0] = std::pow(b(0), static_cast<double>(k));
  const double kk = static_cast<double>(k);
  for (std::size_t j = 1; j <= nb; ++j) {
    double s = 0.0;
    for (std::size_t i = 1; i <= j; ++i) {
      const double bi = b(i);
      if (bi == 0.0) continue;
      s += ((kk + 1.0) * static_cast<double>(i) - static_cast<double>(j)) * bi *
           c[j - i];
    }
    c[j] = s / (static_cast<double>(j) * b(0));
  }

  TruncatedSeries out(n);
  for (std::size_t j = 0; j <= nb; ++j) out[j + shift] = c[j];
  return out;
}

TruncatedSeries ps_binomial(double alpha, std::size_t n) {
  TruncatedSeries c(n);
  c[0] = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    c[k] = c[k - 1] * (alpha - static_cast<double>(k - 1)) / static_cast<double>(k);
  }
  return c;
}

double ps_coeff(const TruncatedSeries& a, std::size_t k) {
  if (k > a.order()) {
    throw Error(ErrorCode::IndexBeyondOrder,
                "coefficient " + std::to_string(k) + " of a series of order " +
                    std::to_string(a.order()));
  }
  return a[k];
}

TruncatedSeries ps_add(const TruncatedSeries& a, const TruncatedSeries& b) {
  TruncatedSeries c(std::max(a.order(), b.order()));
  for (std::size_t k = 0; k <= c.order(); ++k) c[k] = at(a, k) + at(b, k);
  return c;
}

TruncatedSeries ps_scale(const TruncatedSeries& a, double factor) {
  TruncatedSeries c(a.order());
  for (std::size_t k = 0; k <= a.order(); ++k) c[k] = a[k] * factor;
  return c;
}

TruncatedSeries ps_scale_arg(const TruncatedSeries& a, double beta) {
  TruncatedSeries c(a.order());
  double w = 1.0;
  for (std::size_t k = 0; k <= a.order(); ++k) {
    c[k] = a[k] * w;
    w *= beta;
  }
  return c;
}

TruncatedSeries ps_derivative(const TruncatedSeries& a) {
  if (a.order() == 0) return TruncatedSeries(0);
  TruncatedSeries d(a.order() - 1);
  for (std::size_t k = 1; k <= a.order(); ++k) {
    d[k - 1] = static_cast<double>(k) * a[k];
  }
  return d;
}

double ps_eval(const TruncatedSeries& a, double m) {
  double v = 0.0;
  for (std::size_t k = a.order() + 1; k-- > 0;) v = v * m + a[k];
  return v;
}

SeriesPowers::SeriesPowers(TruncatedSeries base, std::size_t order)
    : base_(base.with_order(order)),
      current_(TruncatedSeries::constant(1.0, order)),
      order_(order) {}

const TruncatedSeries& SeriesPowers::next() {
  current_ = ps_mul(current_, base_, order_);
  ++exponent_;
  return current_;
}

}  // namespace edm
