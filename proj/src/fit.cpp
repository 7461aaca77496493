#include "edm/fit.hpp"

#include <algorithm>
#include <array>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "edm/errors.hpp"

namespace edm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t distinct_observed(const FrequencyTable& data) {
  return static_cast<std::size_t>(std::count_if(
      data.cells().begin(), data.cells().end(), [](const auto& c) { return c.count > 0; }));
}

double pmf_mean(const std::vector<double>& probs) {
  double s = 0.0;
  for (std::size_t n = 0; n < probs.size(); ++n) s += static_cast<double>(n) * probs[n];
  return s;
}

}  // namespace

std::string FitResult::label() const {
  return std::visit([](const auto& s) { return s.label(); }, spec);
}

std::vector<double> FitResult::probabilities(std::size_t n_max) const {
  if (const auto* model = std::get_if<ModelSpec>(&spec)) {
    return pmf(*model, m_hat, n_max).probabilities();
  }
  return baseline_pmf(std::get<BaselineSpec>(spec), n_max);
}

double log_likelihood(const ModelSpec& spec, double m, const FrequencyTable& data) {
  const CountDistribution dist =
      pmf(spec, m, static_cast<std::size_t>(data.max_value()));
  double ll = 0.0;
  for (const auto& c : data.cells()) {
    if (c.count > 0) ll += static_cast<double>(c.count) * dist.log_pmf[static_cast<std::size_t>(c.value)];
  }
  return ll;
}

double log_likelihood(const BaselineSpec& spec, const FrequencyTable& data) {
  const std::vector<double> probs =
      baseline_pmf(spec, static_cast<std::size_t>(data.max_value()));
  double ll = 0.0;
  for (const auto& c : data.cells()) {
    if (c.count == 0) continue;
    const double pr = probs[static_cast<std::size_t>(c.value)];
    if (!(pr > 0.0)) return -kInf;
    ll += static_cast<double>(c.count) * std::log(pr);
  }
  return ll;
}

FitResult fit_moments(Family family, int r, const FrequencyTable& data) {
  if (r < 1) {
    throw Error(ErrorCode::InvalidArgument, "method of moments needs r >= 1");
  }
  const double mean = sample_mean(data);
  const double var = sample_variance(data);
  if (!(var > mean)) {
    throw Error(ErrorCode::Underdispersed,
                "sample variance does not exceed the sample mean");
  }
  const double p = family == Family::ABM
                       ? mean / (std::pow(var / mean, 1.0 / r) - 1.0)
                       : mean / (1.0 - std::pow(mean / var, 1.0 / r));
  const ModelSpec spec(family, r, p);
  return {spec, mean, log_likelihood(spec, mean, data), FitMethod::Moments, 0, 2};
}

FitResult fit_mle(Family family, int r, const FrequencyTable& data,
                  const ProfileOptions& options) {
  if (distinct_observed(data) < 2) {
    throw Error(ErrorCode::EmptyData, "fitting needs at least two distinct observed values");
  }
  const double mean = sample_mean(data);
  if (r == 0) {
    const ModelSpec spec(family, 0, 1.0);
    return {spec, mean, log_likelihood(spec, mean, data), FitMethod::MLE, 0, 1};
  }

  // The LM mean domain requires p > mean.
  const double lower = family == Family::LM ? std::log(mean * (1.0 + 1e-6)) : -kInf;
  int evaluations = 0;
  auto objective = [&](double log_p) {
    ++evaluations;
    return -log_likelihood(ModelSpec(family, r, std::exp(log_p)), mean, data);
  };

  double start = 0.0;
  try {
    start = std::log(std::get<ModelSpec>(fit_moments(family, r, data).spec).p());
  } catch (const Error&) {
    start = family == Family::LM ? std::log(std::max(1.0, 2.0 * mean)) : 0.0;
  }
  if (start <= lower) start = lower + 1.0;

  // Bracket a minimum of the negative profile log-likelihood.
  auto toward_lower = [&](double from, double step) {
    const double x = from - step;
    return (std::isfinite(lower) && x <= lower) ? lower + 0.5 * (from - lower) : x;
  };
  double step = 0.25;
  double b = start, fb = objective(b);
  double a = toward_lower(b, step), fa = objective(a);
  double c = b + step, fc = objective(c);
  int doublings = 0;
  while (!(fb <= fa && fb <= fc)) {
    if (++doublings > options.max_doublings) {
      throw Error(ErrorCode::NoInteriorMaximum,
                  "profile likelihood of " + ModelSpec(family, r, 1.0).label() +
                      " is monotone in p");
    }
    step *= 2.0;
    if (fc < fb) {
      a = b, fa = fb;
      b = c, fb = fc;
      c = b + step, fc = objective(c);
    } else {
      c = b, fc = fb;
      b = a, fb = fa;
      a = toward_lower(b, step), fa = objective(a);
    }
  }

  const int bits = static_cast<int>(std::ceil(-std::log2(options.log_p_tolerance))) + 3;
  std::uintmax_t max_iter = 500;
  const auto [log_p, f_min] =
      boost::math::tools::brent_find_minima(objective, a, c, bits, max_iter);
  // Both families tend to Poisson as p grows; a bracket that only closes on
  // that rounding plateau is a boundary maximum, not an interior one.
  const double poisson_ll = log_likelihood(ModelSpec(Family::ABM, 0, 1.0), mean, data);
  if (-f_min <= poisson_ll + 1e-9 * std::max(1.0, std::abs(poisson_ll))) {
    throw Error(ErrorCode::NoInteriorMaximum,
                "profile likelihood of " + ModelSpec(family, r, 1.0).label() +
                    " increases toward the Poisson limit");
  }
  const ModelSpec spec(family, r, std::exp(log_p));
  return {spec, mean, -f_min, FitMethod::MLE, evaluations, 2};
}

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double x) { return std::log(x / (1.0 - x)); }

// Map between model parameters and an unconstrained coordinate.
struct Transform {
  double (*to_param)(double);
  double (*to_free)(double);
};

constexpr Transform kLog{[](double z) { return std::exp(z); },
                         [](double x) { return std::log(x); }};
constexpr Transform kUnit{logistic, logit};
constexpr Transform kBelowOne{[](double z) { return 1.0 - std::exp(z); },
                              [](double x) { return std::log(1.0 - x); }};

std::vector<Transform> transforms(BaselineModel model) {
  switch (model) {
    case BaselineModel::Poisson: return {kLog};
    case BaselineModel::NB: return {kLog, kUnit};
    case BaselineModel::PIG: return {kLog, kLog};
    case BaselineModel::DLD: return {kUnit};
    case BaselineModel::NLD: return {kBelowOne, kUnit};
    case BaselineModel::PLB: return {kLog, kLog};
    case BaselineModel::GDP: return {kUnit, kLog};
    case BaselineModel::BTD: return {kLog, kLog};
  }
  return {};
}

std::vector<double> heuristic_start(BaselineModel model, double mean, double var) {
  const double excess = std::max(var / mean - 1.0, 0.1);
  switch (model) {
    case BaselineModel::Poisson: return {mean};
    case BaselineModel::NB: {
      const double size = mean / excess;
      return {size, size / (size + mean)};
    }
    case BaselineModel::PIG: return {excess, mean};
    case BaselineModel::DLD: return {std::clamp(mean / (1.0 + mean), 0.05, 0.95)};
    case BaselineModel::NLD: return {0.5, 0.3};
    case BaselineModel::PLB: return {2.0, 1.0};
    case BaselineModel::GDP: return {std::clamp(mean / (1.0 + mean), 0.05, 0.95), 1.0};
    case BaselineModel::BTD: {
      const double alpha = std::clamp(excess / 2.0, 0.05, 2.0);
      return {alpha, mean / (alpha * std::exp(alpha))};
    }
  }
  return {};
}

struct SimplexResult {
  std::vector<double> x;
  double f;
  int iterations;
  bool converged;
};

// Nelder-Mead with standard coefficients; converged when every vertex lies
// within `tolerance` of the best one.
template <typename F>
SimplexResult nelder_mead(F&& f, std::vector<double> x0, double initial_step,
                          double tolerance, int max_iterations) {
  const std::size_t dim = x0.size();
  std::vector<std::vector<double>> pts(dim + 1, x0);
  for (std::size_t i = 0; i < dim; ++i) pts[i + 1][i] += initial_step;
  std::vector<double> vals(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) vals[i] = f(pts[i]);

  std::vector<std::size_t> idx(dim + 1);
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i <= dim; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = pts[idx[i]][k] - pts[idx[0]][k];
        s += diff * diff;
      }
      d = std::max(d, std::sqrt(s));
    }
    return d;
  };
  auto along = [&](const std::vector<double>& centroid, const std::vector<double>& worst,
                   double t) {
    std::vector<double> out(dim);
    for (std::size_t k = 0; k < dim; ++k) out[k] = centroid[k] + t * (worst[k] - centroid[k]);
    return out;
  };

  for (int it = 0; it < max_iterations; ++it) {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    if (std::isfinite(vals[idx[0]]) && diameter() < tolerance) {
      return {pts[idx[0]], vals[idx[0]], it, true};
    }
    const std::size_t worst = idx[dim];
    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += pts[idx[i]][k] / static_cast<double>(dim);
    }
    const auto xr = along(centroid, pts[worst], -1.0);
    const double fr = f(xr);
    if (fr < vals[idx[0]]) {
      const auto xe = along(centroid, pts[worst], -2.0);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe, vals[worst] = fe;
      } else {
        pts[worst] = xr, vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[idx[dim - 1]]) {
      pts[worst] = xr, vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const auto xc = along(centroid, pts[worst], outside ? -0.5 : 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc, vals[worst] = fc;
      continue;
    }
    const auto& best = pts[idx[0]];
    for (std::size_t i = 1; i <= dim; ++i) {
      auto& v = pts[idx[i]];
      for (std::size_t k = 0; k < dim; ++k) v[k] = best[k] + 0.5 * (v[k] - best[k]);
      vals[idx[i]] = f(v);
    }
  }
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  return {pts[idx[0]], vals[idx[0]], max_iterations, false};
}

}  // namespace

FitResult fit_baseline(BaselineModel model, const FrequencyTable& data,
                       const BaselineFitOptions& options) {
  const std::size_t n = parameter_count(model);
  if (n > 2) {
    throw Error(ErrorCode::InvalidArgument, "baseline fits support at most two parameters");
  }
  std::vector<double> fixed = options.fixed;
  fixed.resize(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::size_t> free_idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(fixed[i])) free_idx.push_back(i);
  }

  const double mean = sample_mean(data);
  const double var = data.total() > 1 ? sample_variance(data) : mean;
  const auto tr = transforms(model);
  const auto start = heuristic_start(model, mean, var);

  auto params_of = [&](const std::vector<double>& z) {
    std::vector<double> v = fixed;
    for (std::size_t k = 0; k < free_idx.size(); ++k) {
      v[free_idx[k]] = tr[free_idx[k]].to_param(z[k]);
    }
    return v;
  };
  auto objective = [&](const std::vector<double>& z) {
    const auto v = params_of(z);
    if (!valid_parameters(model, v)) return kInf;
    const double ll = log_likelihood(BaselineSpec(model, v), data);
    return std::isfinite(ll) ? -ll : kInf;
  };

  if (free_idx.empty()) {
    const BaselineSpec spec(model, fixed);
    return {spec, pmf_mean(baseline_pmf(spec, 200)), log_likelihood(spec, data),
            FitMethod::MLE, 0, 0};
  }

  std::vector<double> center(free_idx.size());
  for (std::size_t k = 0; k < free_idx.size(); ++k) {
    center[k] = tr[free_idx[k]].to_free(start[free_idx[k]]);
  }
  // Deterministic multi-start: the heuristic point and a +-1.5 grid around it.
  std::vector<std::vector<double>> starts;
  const std::array<double, 3> offsets{0.0, -1.5, 1.5};
  if (center.size() == 1) {
    for (double o : offsets) starts.push_back({center[0] + o});
  } else {
    for (double o0 : offsets) {
      for (double o1 : offsets) starts.push_back({center[0] + o0, center[1] + o1});
    }
  }

  SimplexResult best{{}, kInf, 0, false};
  int total_iterations = 0;
  for (const auto& s0 : starts) {
    if (!std::isfinite(objective(s0))) continue;
    SimplexResult res = nelder_mead(objective, s0, 0.5, options.simplex_tolerance,
                                    options.max_iterations);
    total_iterations += res.iterations;
    if (res.converged) {
      // Restart from the optimum to guard against a collapsed simplex.
      SimplexResult again = nelder_mead(objective, res.x, 0.1, options.simplex_tolerance,
                                        options.max_iterations);
      total_iterations += again.iterations;
      if (again.converged && again.f <= res.f) res = again;
    }
    if (res.converged && res.f < best.f) best = res;
  }
  if (!best.converged) {
    throw Error(ErrorCode::NonConvergence,
                "Nelder-Mead did not converge for " + std::string(to_token(model)));
  }

  const BaselineSpec spec(model, params_of(best.x));
  return {spec, pmf_mean(baseline_pmf(spec, 200)), -best.f, FitMethod::MLE,
          total_iterations, free_idx.size()};
}

}  // namespace edm
