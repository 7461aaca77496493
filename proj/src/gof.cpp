#include "edm/gof.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <optional>

#include "edm/errors.hpp"

namespace edm {

DescriptiveStats descriptive(const FrequencyTable& data) {
  if (data.total() < 2) throw Error(ErrorCode::EmptyData, "need at least two observations");
  const double n = static_cast<double>(data.total());
  const double mean = sample_mean(data);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (const auto& c : data.cells()) {
    const double d = static_cast<double>(c.value) - mean;
    const double w = static_cast<double>(c.count) / n;
    m2 += w * d * d;
    m3 += w * d * d * d;
    m4 += w * d * d * d * d;
  }
  const double variance = sample_variance(data);
  return {data.total(),
          mean,
          variance,
          m3 / std::pow(m2, 1.5),
          m4 / (m2 * m2),
          static_cast<double>(data.count_at(0)) / n,
          variance / mean};
}

std::string PooledCell::label() const {
  if (open_ended) return ">=" + std::to_string(first);
  if (first == last) return std::to_string(first);
  return std::to_string(first) + "-" + std::to_string(last);
}

namespace {

void require_coverage(const FrequencyTable& observed, const std::vector<double>& probs) {
  if (probs.size() <= static_cast<std::size_t>(observed.max_value())) {
    throw Error(ErrorCode::InvalidArgument,
                "model probabilities must cover every observed value");
  }
}

}  // namespace

std::vector<PooledCell> pool_cells(const FrequencyTable& observed,
                                   const std::vector<double>& probs,
                                   double min_expected) {
  require_coverage(observed, probs);
  const double n = static_cast<double>(observed.total());
  const auto k_max = observed.max_value();

  std::vector<PooledCell> raw;
  double captured = 0.0;
  for (std::int64_t k = 0; k <= k_max; ++k) {
    const double pk = probs[static_cast<std::size_t>(k)];
    captured += pk;
    raw.push_back({k, k, false, static_cast<double>(observed.count_at(k)), n * pk});
  }
  raw.push_back({k_max + 1, k_max + 1, true, 0.0, n * std::max(0.0, 1.0 - captured)});

  auto merge = [](PooledCell left, const PooledCell& right) {
    left.last = right.last;
    left.open_ended = right.open_ended;
    left.observed += right.observed;
    left.expected += right.expected;
    return left;
  };

  // Scan from the right, closing a group once the model expects enough
  // observations at its observed-range values. The unobserved tail counts
  // for nothing here, so it joins the last group that closes.
  std::vector<PooledCell> groups;
  std::optional<PooledCell> pending;
  double weight = 0.0;
  for (auto it = raw.rbegin(); it != raw.rend(); ++it) {
    pending = pending ? merge(*it, *pending) : *it;
    if (!it->open_ended) weight += it->expected;
    if (weight >= min_expected) {
      groups.push_back(*pending);
      pending.reset();
      weight = 0.0;
    }
  }
  if (pending) {
    if (groups.empty()) {
      groups.push_back(*pending);
    } else {
      groups.back() = merge(*pending, groups.back());
    }
  }
  std::reverse(groups.begin(), groups.end());
  std::erase_if(groups, [](const PooledCell& c) { return c.observed == 0.0 && c.expected == 0.0; });

  if (groups.size() < 3) {
    throw Error(ErrorCode::DegeneratePooling,
                "only " + std::to_string(groups.size()) + " cells left after pooling");
  }
  return groups;
}

double gamma_q(double s, double x) {
  if (!(s > 0.0) || !(x >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "gamma_q needs s > 0 and x >= 0");
  }
  return boost::math::gamma_q(s, x);
}

ChiSquareResult chi_square_test(const FrequencyTable& observed,
                                const std::vector<double>& probs,
                                std::size_t n_params, double min_expected) {
  std::vector<PooledCell> cells = pool_cells(observed, probs, min_expected);
  double chi2 = 0.0;
  for (const auto& c : cells) {
    if (!(c.expected > 0.0)) {
      throw Error(ErrorCode::ModelZeroOnSupport,
                  "cell " + c.label() + " has observations but zero expected count");
    }
    const double d = c.observed - c.expected;
    chi2 += d * d / c.expected;
  }
  const int df = static_cast<int>(cells.size()) - 1 - static_cast<int>(n_params);
  if (df < 1) {
    throw Error(ErrorCode::DegeneratePooling,
                std::to_string(cells.size()) + " cells leave no degrees of freedom for " +
                    std::to_string(n_params) + " parameters");
  }
  return {chi2, df, gamma_q(0.5 * df, 0.5 * chi2), std::move(cells)};
}

double rmse(const FrequencyTable& observed, const std::vector<double>& probs) {
  require_coverage(observed, probs);
  const double n = static_cast<double>(observed.total());
  const auto counts = observed.dense_counts();
  double s = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double d = counts[k] - n * probs[k];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(counts.size()));
}

double kl_divergence(const FrequencyTable& observed, const std::vector<double>& probs) {
  require_coverage(observed, probs);
  const double n = static_cast<double>(observed.total());
  double kl = 0.0;
  for (const auto& c : observed.cells()) {
    if (c.count == 0) continue;
    const double model = probs[static_cast<std::size_t>(c.value)];
    if (!(model > 0.0)) {
      throw Error(ErrorCode::ModelZeroOnSupport,
                  "model assigns zero probability to observed value " + std::to_string(c.value));
    }
    const double emp = static_cast<double>(c.count) / n;
    kl += emp * std::log(emp / model);
  }
  return kl;
}

GofReport evaluate_gof(const FrequencyTable& observed, const std::vector<double>& probs,
                       std::size_t n_params, double min_expected) {
  ChiSquareResult chi = chi_square_test(observed, probs, n_params, min_expected);
  return {chi.chi2, chi.df, chi.p_value, rmse(observed, probs), kl_divergence(observed, probs),
          std::move(chi.cells)};
}

}  // namespace edm
