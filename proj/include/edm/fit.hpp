#pragma once

#include <variant>
#include <vector>

#include "edm/baselines.hpp"
#include "edm/data.hpp"
#include "edm/model.hpp"

namespace edm {

enum class FitMethod { MLE, Moments };

struct FitResult {
  std::variant<ModelSpec, BaselineSpec> spec;
  double m_hat;           // fitted mean
  double log_likelihood;  // at the fitted parameters
  FitMethod method;
  int iterations;
  std::size_t n_params;  // parameters estimated from the data

  std::string label() const;
  /// Model probabilities over 0..n_max.
  std::vector<double> probabilities(std::size_t n_max) const;
};

/// sum over cells of count * log P(X = value).
double log_likelihood(const ModelSpec& spec, double m, const FrequencyTable& data);
double log_likelihood(const BaselineSpec& spec, const FrequencyTable& data);

struct ProfileOptions {
  double log_p_tolerance = 1e-8;
  int max_doublings = 40;
};

/// m is profiled out at the sample mean; p maximizes the profile
/// likelihood on the log scale.
FitResult fit_mle(Family family, int r, const FrequencyTable& data,
                  const ProfileOptions& options = {});

/// Inverts V_p(mean) = variance for p. Throws Underdispersed when the
/// sample variance does not exceed the sample mean.
FitResult fit_moments(Family family, int r, const FrequencyTable& data);

struct BaselineFitOptions {
  /// Fixed parameter values by position; NaN means free.
  std::vector<double> fixed;
  double simplex_tolerance = 1e-9;
  int max_iterations = 10000;
};

/// Maximum likelihood for a baseline model by Nelder-Mead on an
/// unconstrained reparameterization.
FitResult fit_baseline(BaselineModel model, const FrequencyTable& data,
                       const BaselineFitOptions& options = {});

}  // namespace edm
