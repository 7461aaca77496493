#pragma once

// Competitor count distributions used as benchmarks.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace edm {

enum class BaselineModel { Poisson, NB, PIG, DLD, NLD, PLB, GDP, BTD };

std::string_view to_token(BaselineModel model);  // "poisson", "nb", ...
/// Throws InvalidArgument for unknown tokens.
BaselineModel parse_baseline(std::string_view token);
std::size_t parameter_count(BaselineModel model);
/// Parameter names in order, e.g. {"beta", "mu"} for PIG.
std::vector<std::string_view> parameter_names(BaselineModel model);

///   Poisson lambda>0 | NB size>0, prob in (0,1) | PIG beta>0, mu>0 |
///   DLD lambda in (0,1) | NLD alpha<1 (!=0), theta in (0,1) |
///   PLB alpha>0, beta>0 | GDP q in (0,1], alpha>=0 | BTD alpha>0, theta>0
class BaselineSpec {
 public:
  /// Throws InvalidParameters on a wrong count or out-of-range value.
  BaselineSpec(BaselineModel model, std::vector<double> params);

  BaselineModel model() const noexcept { return model_; }
  const std::vector<double>& params() const noexcept { return params_; }
  double param(std::size_t i) const { return params_.at(i); }

  std::string label() const;

  friend bool operator==(const BaselineSpec&, const BaselineSpec&) = default;

 private:
  BaselineModel model_;
  std::vector<double> params_;
};

/// True when `params` lie in the model's parameter space.
bool valid_parameters(BaselineModel model, const std::vector<double>& params);

/// Probabilities p_0..p_{n_max}.
std::vector<double> baseline_pmf(const BaselineSpec& spec, std::size_t n_max);

/// Touchard polynomials T_0(theta)..T_n(theta) from the Bell recurrence
/// T_{k+1} = theta sum_j C(k,j) T_j.
std::vector<double> touchard_sequence(std::size_t n, double theta);
double touchard(std::size_t n, double theta);

double log_gamma(double x);

}  // namespace edm
