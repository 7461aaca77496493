#include "edm/baselines.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "edm/errors.hpp"

namespace edm {

namespace {

struct ModelInfo {
  BaselineModel model;
  std::string_view token;
  std::vector<std::string_view> params;
};

const std::vector<ModelInfo>& registry() {
  static const std::vector<ModelInfo> models = {
      {BaselineModel::Poisson, "poisson", {"lambda"}},
      {BaselineModel::NB, "nb", {"size", "prob"}},
      {BaselineModel::PIG, "pig", {"beta", "mu"}},
      {BaselineModel::DLD, "dld", {"lambda"}},
      {BaselineModel::NLD, "nld", {"alpha", "theta"}},
      {BaselineModel::PLB, "plb", {"alpha", "beta"}},
      {BaselineModel::GDP, "gdp", {"q", "alpha"}},
      {BaselineModel::BTD, "btd", {"alpha", "theta"}},
  };
  return models;
}

const ModelInfo& info(BaselineModel model) {
  for (const auto& m : registry()) {
    if (m.model == model) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown baseline model");
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }
bool in_unit_open(double x) { return std::isfinite(x) && x > 0.0 && x < 1.0; }

double log_factorial(std::size_t n) {
  return boost::math::lgamma(static_cast<double>(n) + 1.0);
}

std::vector<double> poisson_pmf(double lambda, std::size_t n_max) {
  std::vector<double> out(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) {
    out[n] = std::exp(static_cast<double>(n) * std::log(lambda) - lambda - log_factorial(n));
  }
  return out;
}

std::vector<double> nb_pmf(double size, double prob, std::size_t n_max) {
  std::vector<double> out(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double k = static_cast<double>(n);
    out[n] = std::exp(log_gamma(size + k) - log_gamma(size) - log_factorial(n) +
                      size * std::log(prob) + k * std::log1p(-prob));
  }
  return out;
}

// Poisson mixed over an inverse Gaussian with mean mu and shape mu^2/beta.
// Each term is integrated in s = log x, centred at the integrand's mode and
// scaled by its curvature there.
std::vector<double> pig_pmf(double beta, double mu, std::size_t n_max) {
  using boost::math::quadrature::gauss_kronrod;
  std::vector<double> out(n_max + 1);
  const double log_norm = std::log(mu) - 0.5 * std::log(2.0 * std::numbers::pi * beta);
  const double a = 1.0 + 0.5 / beta;
  const double c = 0.5 * mu * mu / beta;
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double b = static_cast<double>(n) - 0.5;
    // log integrand in s: -x + b s - (x - mu)^2 / (2 beta x) with x = e^s
    auto log_f = [&](double s) {
      const double x = std::exp(s);
      return -a * x + b * s - c / x + mu / beta;
    };
    const double x_mode = (b + std::sqrt(b * b + 4.0 * a * c)) / (2.0 * a);
    const double s_mode = std::log(x_mode);
    const double width = 1.0 / std::sqrt(a * x_mode + c / x_mode);
    const double peak = log_f(s_mode);
    auto integrand = [&](double u) {
      const double v = log_f(s_mode + width * u) - peak;
      return std::isnan(v) ? 0.0 : std::exp(v);
    };
    double error = 0.0;
    const double integral = gauss_kronrod<double, 61>::integrate(
        integrand, -std::numeric_limits<double>::infinity(),
        std::numeric_limits<double>::infinity(), 30, 1e-12, &error);
    out[n] = std::exp(std::log(integral * width) + peak + log_norm - log_factorial(n));
  }
  return out;
}

std::vector<double> dld_pmf(double lambda, std::size_t n_max) {
  std::vector<double> out(n_max + 1);
  const double ll = std::log(lambda);
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double k = static_cast<double>(n);
    out[n] = std::pow(lambda, k) / (1.0 - ll) *
             (lambda * ll + (1.0 - lambda) * (1.0 - (k + 1.0) * ll));
  }
  return out;
}

std::vector<double> nld_pmf(double alpha, double theta, std::size_t n_max) {
  std::vector<double> out(n_max + 1);
  const double denom = std::log1p(-alpha);
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double k = static_cast<double>(n);
    out[n] = (std::log1p(-alpha * std::pow(theta, k)) -
              std::log1p(-alpha * std::pow(theta, k + 1.0))) /
             denom;
  }
  return out;
}

std::vector<double> plb_pmf(double alpha, double beta, std::size_t n_max) {
  std::vector<double> out(n_max + 1);
  const double head = std::log(alpha) + std::log1p(alpha) + log_gamma(alpha + beta) -
                      log_gamma(beta);
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double k = static_cast<double>(n);
    out[n] = std::exp(head + log_gamma(beta + k) - log_gamma(alpha + beta + k + 3.0)) *
             ((beta + k) * (2.0 + k) + alpha + 2.0);
  }
  return out;
}

std::vector<double> gdp_pmf(double q, double alpha, std::size_t n_max) {
  std::vector<double> out(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double k = static_cast<double>(n);
    out[n] = std::pow(q, k) / std::pow(k + 1.0, alpha) -
             std::pow(q, k + 1.0) / std::pow(k + 2.0, alpha);
  }
  return out;
}

std::vector<double> btd_pmf(double alpha, double theta, std::size_t n_max) {
  const std::vector<double> t = touchard_sequence(n_max, theta);
  std::vector<double> out(n_max + 1);
  const double head = -theta * std::expm1(alpha);
  for (std::size_t n = 0; n <= n_max; ++n) {
    out[n] = std::exp(head + static_cast<double>(n) * std::log(alpha) + std::log(t[n]) -
                      log_factorial(n));
  }
  return out;
}

}  // namespace

std::string_view to_token(BaselineModel model) { return info(model).token; }

BaselineModel parse_baseline(std::string_view token) {
  std::string t(token);
  for (auto& ch : t) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  for (const auto& m : registry()) {
    if (m.token == t) return m.model;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown baseline model '" + std::string(token) +
                                              "' (expected poisson|nb|pig|dld|nld|plb|gdp|btd)");
}

std::size_t parameter_count(BaselineModel model) { return info(model).params.size(); }

std::vector<std::string_view> parameter_names(BaselineModel model) {
  return info(model).params;
}

bool valid_parameters(BaselineModel model, const std::vector<double>& v) {
  if (v.size() != parameter_count(model)) return false;
  switch (model) {
    case BaselineModel::Poisson: return positive(v[0]);
    case BaselineModel::NB: return positive(v[0]) && in_unit_open(v[1]);
    case BaselineModel::PIG: return positive(v[0]) && positive(v[1]);
    case BaselineModel::DLD: return in_unit_open(v[0]);
    case BaselineModel::NLD:
      return std::isfinite(v[0]) && v[0] < 1.0 && v[0] != 0.0 && in_unit_open(v[1]);
    case BaselineModel::PLB: return positive(v[0]) && positive(v[1]);
    case BaselineModel::GDP:
      return std::isfinite(v[0]) && v[0] > 0.0 && v[0] <= 1.0 && std::isfinite(v[1]) &&
             v[1] >= 0.0;
    case BaselineModel::BTD: return positive(v[0]) && positive(v[1]);
  }
  return false;
}

BaselineSpec::BaselineSpec(BaselineModel model, std::vector<double> params)
    : model_(model), params_(std::move(params)) {
  if (!valid_parameters(model_, params_)) {
    std::ostringstream os;
    os << "invalid parameters for " << to_token(model_) << ":";
    for (double v : params_) os << ' ' << v;
    throw Error(ErrorCode::InvalidParameters, os.str());
  }
}

std::string BaselineSpec::label() const {
  std::string s(to_token(model_));
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (model_ == BaselineModel::Poisson) return "Poisson";
  return s;
}

std::vector<double> baseline_pmf(const BaselineSpec& spec, std::size_t n_max) {
  const auto& v = spec.params();
  switch (spec.model()) {
    case BaselineModel::Poisson: return poisson_pmf(v[0], n_max);
    case BaselineModel::NB: return nb_pmf(v[0], v[1], n_max);
    case BaselineModel::PIG: return pig_pmf(v[0], v[1], n_max);
    case BaselineModel::DLD: return dld_pmf(v[0], n_max);
    case BaselineModel::NLD: return nld_pmf(v[0], v[1], n_max);
    case BaselineModel::PLB: return plb_pmf(v[0], v[1], n_max);
    case BaselineModel::GDP: return gdp_pmf(v[0], v[1], n_max);
    case BaselineModel::BTD: return btd_pmf(v[0], v[1], n_max);
  }
  return {};
}

std::vector<double> touchard_sequence(std::size_t n, double theta) {
  std::vector<double> t(n + 1, 0.0);
  t[0] = 1.0;
  std::vector<double> row{1.0};  // binomial coefficients C(k, .)
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j <= k; ++j) s += row[j] * t[j];
    t[k + 1] = theta * s;
    std::vector<double> next(k + 2, 1.0);
    for (std::size_t j = 1; j <= k; ++j) next[j] = row[j - 1] + row[j];
    row = std::move(next);
  }
  return t;
}

double touchard(std::size_t n, double theta) { return touchard_sequence(n, theta)[n]; }

double log_gamma(double x) { return boost::math::lgamma(x); }

}  // namespace edm
