#include "edm/lagrange.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edm/errors.hpp"

namespace edm {

TruncatedSeries p_series(int r, std::size_t n) {
  if (r < 1) throw Error(ErrorCode::InvalidArgument, "P(m) needs r >= 1");
  // coefficient k: -(-r)_k / (k! k), with the Pochhammer ratio (-r)_k / k!
  // built up factor by factor.
  TruncatedSeries s(n);
  double ratio = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    ratio *= (-r + static_cast<double>(k) - 1.0) / static_cast<double>(k);
    s[k] = -ratio / static_cast<double>(k);
  }
  return s;
}

NuMeasure nu_measure(int r, std::size_t n_max) {
  if (r < 1) throw Error(ErrorCode::InvalidArgument, "nu needs r >= 1");
  n_max = std::min(n_max, kLagrangeMaxN);
  NuMeasure nu{r, std::vector<double>(n_max + 1, 0.0)};
  if (n_max == 0) return nu;
  const TruncatedSeries p = p_series(r, n_max - 1);
  for (std::size_t n = 1; n <= n_max; ++n) {
    // (n-1)!/(n! n) [m^{n-1}] e^{nP} = [m^{n-1}] e^{nP} / n^2
    const TruncatedSeries e = ps_exp(ps_scale(p, static_cast<double>(n)), n - 1);
    nu.values[n] = ps_coeff(e, n - 1) / static_cast<double>(n * n);
  }
  return nu;
}

double hermite(int k, double x) {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "Hermite degree must be >= 0");
  double prev = 1.0;
  if (k == 0) return prev;
  double cur = 2.0 * x;
  for (int j = 1; j < k; ++j) {
    const double next = 2.0 * x * cur - 2.0 * j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite_nu(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "hermite_nu needs n >= 1");
  const double nn = static_cast<double>(n);
  const double h = hermite(n - 1, std::sqrt(2.0 * nn));
  return h * std::pow(nn / 2.0, (nn - 1.0) / 2.0) / (std::tgamma(nn + 1.0) * nn);
}

std::vector<double> conv_exponential(const NuMeasure& nu, double p, std::size_t n_max) {
  if (!(p > 0.0)) throw Error(ErrorCode::InvalidParameters, "p must be positive");
  if (n_max > nu.n_max()) {
    throw Error(ErrorCode::InvalidArgument,
                "nu is known up to " + std::to_string(nu.n_max()) + " only");
  }
  // nu as a series in the counting variable; its k-th power is nu^{*k}.
  const TruncatedSeries base = TruncatedSeries(nu.values).with_order(n_max);
  std::vector<double> mu(n_max + 1, 0.0);
  mu[0] = 1.0;
  SeriesPowers powers(base, n_max);
  double weight = 1.0;
  for (std::size_t k = 1; k <= n_max; ++k) {
    weight *= p / static_cast<double>(k);
    const TruncatedSeries& conv = powers.next();
    for (std::size_t n = k; n <= n_max; ++n) mu[n] += weight * conv[n];
  }
  return mu;
}

}  // namespace edm
