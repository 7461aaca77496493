#pragma once

// Second construction of the LM generating measure through a Levy-type
// measure nu on the positive integers:
//
//   mu = e^{p nu} = delta_0 + sum_k p^k/k! nu^{*k},
//   nu(n) = 1/(n! n) [(d/dm)^{n-1} e^{n P(m)}]_{m=0},
//   P(m) = -sum_k (-r)_k / (k! k) m^k.
//
// Used to cross-check the coefficient-extraction measure of the LM class.

#include <cstddef>
#include <vector>

#include "edm/series.hpp"

namespace edm {

inline constexpr std::size_t kLagrangeMaxN = 64;

struct NuMeasure {
  int r;
  std::vector<double> values;  // values[n] = nu(n); values[0] = 0

  std::size_t n_max() const noexcept { return values.size() - 1; }
  double operator()(std::size_t n) const { return values.at(n); }
};

/// P(m) truncated at order n (r >= 1).
TruncatedSeries p_series(int r, std::size_t n);

/// nu(1)..nu(n_max); n_max is capped at kLagrangeMaxN.
NuMeasure nu_measure(int r, std::size_t n_max);

/// Physicists' Hermite polynomial H_k(x) by the three-term recurrence.
double hermite(int k, double x);

/// Closed form of nu(n) for r = 2:
/// H_{n-1}(sqrt(2n)) (n/2)^{(n-1)/2} / (n! n).
double hermite_nu(int n);

/// Entries 0..n_max of e^{p nu}.
std::vector<double> conv_exponential(const NuMeasure& nu, double p, std::size_t n_max);

}  // namespace edm
