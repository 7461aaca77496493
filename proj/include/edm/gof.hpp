#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edm/data.hpp"

namespace edm {

struct DescriptiveStats {
  std::int64_t n_obs;
  double mean;
  double variance;  // N-1 denominator
  double skewness;  // m3 / m2^{3/2}, population central moments
  double kurtosis;  // m4 / m2^2, not excess
  double fraction_zeros;
  double dispersion_index;  // variance / mean
};

DescriptiveStats descriptive(const FrequencyTable& data);

struct PooledCell {
  std::int64_t first;
  std::int64_t last;  // equal to first for a single value
  bool open_ended;    // covers every value >= first
  double observed;
  double expected;

  std::string label() const;
};

/// Cells 0..max observed value plus an open right tail, merged from the
/// right until the model expects at least `min_expected` observations at
/// the observed-range values of every cell. The tail beyond the largest
/// observed value is folded into the rightmost such cell.
/// `probs` must cover the largest observed value. Cells with zero observed
/// and zero expected count are dropped. Throws DegeneratePooling when fewer
/// than three cells remain.
std::vector<PooledCell> pool_cells(const FrequencyTable& observed,
                                   const std::vector<double>& probs,
                                   double min_expected);

struct ChiSquareResult {
  double chi2;
  int df;
  double p_value;
  std::vector<PooledCell> cells;
};

ChiSquareResult chi_square_test(const FrequencyTable& observed,
                                const std::vector<double>& probs,
                                std::size_t n_params, double min_expected);

/// Regularized upper incomplete gamma function Q(s, x).
double gamma_q(double s, double x);

/// Root mean squared difference between observed counts and N p_k over the
/// raw cells 0..max observed value.
double rmse(const FrequencyTable& observed, const std::vector<double>& probs);
/// Kullback-Leibler divergence of the model from the empirical
/// distribution, natural log.
double kl_divergence(const FrequencyTable& observed, const std::vector<double>& probs);

struct GofReport {
  double chi2;
  int df;
  double p_value;
  double rmse;
  double kl;
  std::vector<PooledCell> pooled_cells;
};

GofReport evaluate_gof(const FrequencyTable& observed, const std::vector<double>& probs,
                       std::size_t n_params, double min_expected = 1.0);

}  // namespace edm
