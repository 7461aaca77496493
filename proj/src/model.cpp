#include "edm/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "edm/errors.hpp"
#include "edm/series.hpp"

namespace edm {

std::string_view to_string(Family family) {
  return family == Family::ABM ? "ABM" : "LM";
}

Family parse_family(std::string_view token) {
  std::string t(token);
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "abm") return Family::ABM;
  if (t == "lm") return Family::LM;
  throw Error(ErrorCode::InvalidArgument,
              "unknown family '" + std::string(token) + "' (expected abm|lm)");
}

ModelSpec::ModelSpec(Family family, int r, double p, int max_power)
    : family_(family), r_(r), p_(p) {
  if (r < 0 || r > max_power) {
    throw Error(ErrorCode::InvalidParameters,
                "power r must lie in [0, " + std::to_string(max_power) +
                    "], got " + std::to_string(r));
  }
  if (!std::isfinite(p) || !(p > 0.0)) {
    throw Error(ErrorCode::InvalidParameters,
                "dispersion p must be positive, got " + std::to_string(p));
  }
}

std::string ModelSpec::label() const {
  std::ostringstream os;
  os << to_string(family_) << "(r=" << r_ << ")";
  return os.str();
}

namespace {

double binomial_coefficient(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

double harmonic(int n) {
  double h = 0.0;
  for (int j = 1; j <= n; ++j) h += 1.0 / j;
  return h;
}

// r = 0 is the Poisson model whichever family is named.
bool is_lm_like(const ModelSpec& spec) {
  return spec.family() == Family::LM || spec.r() == 0;
}

void require_in_domain(const ModelSpec& spec, double m) {
  if (!std::isfinite(m) || !mean_domain(spec).contains(m)) {
    std::ostringstream os;
    os << "mean " << m << " outside the mean domain of " << spec.label()
       << " with p=" << spec.p();
    throw Error(ErrorCode::MeanOutOfDomain, os.str());
  }
}

// ABM: sum_{j=1}^{r-1} (1/j) ((p/(m+p))^j - 1)
double abm_sum(int r, double p, double m) {
  const double y = p / (m + p);
  double s = 0.0;
  double yj = 1.0;
  for (int j = 1; j <= r - 1; ++j) {
    yj *= y;
    s += (yj - 1.0) / j;
  }
  return s;
}

// LM: sum_{i=1}^{r} (-1)^i (1/i) C(r,i) (m/p)^i
double lm_sum(int r, double p, double m) {
  const double x = m / p;
  double s = 0.0;
  double xi = 1.0;
  for (int i = 1; i <= r; ++i) {
    xi *= -x;
    s += binomial_coefficient(r, i) * xi / i;
  }
  return s;
}

// Series for the Lagrange extraction in a unit variable t:
//   mu*_n = (1/n) [t^{n-1}] B(t) K(t)^n.
// LM uses t = m/p; ABM uses t = m/(m+p), where every factor is the
// exponential of a polynomial and the extraction is well conditioned.
// Both are stored with t replaced by beta*t, beta = e^{-H}, which keeps
// the coefficients of K^n of order one.
struct LagrangeKernel {
  TruncatedSeries base;   // B(beta t)
  TruncatedSeries log_k;  // log K(beta t), polynomial
  double log_beta;
};

LagrangeKernel make_kernel(const ModelSpec& spec, std::size_t order) {
  const int r = spec.r();
  const double p = spec.p();

  TruncatedSeries log_k(std::max(r, 1));
  TruncatedSeries base(order);
  double h = 0.0;

  if (is_lm_like(spec)) {
    // log K(t) = -sum_{i=1}^r (-1)^i C(r,i)/i t^i
    for (int i = 1; i <= r; ++i) {
      log_k[i] = -(i % 2 == 0 ? 1.0 : -1.0) * binomial_coefficient(r, i) / i;
    }
    // p phi(t) = p/(r+1) (1 - (1-t)^{r+1});  B = p (1-t)^r e^{p phi}
    TruncatedSeries p_phi(std::min<std::size_t>(r + 1, std::max<std::size_t>(order, 1)));
    for (std::size_t k = 1; k <= p_phi.order(); ++k) {
      const double sign = (k % 2 == 0) ? -1.0 : 1.0;
      p_phi[k] = sign * p * binomial_coefficient(r + 1, static_cast<int>(k)) / (r + 1);
    }
    const TruncatedSeries one_minus_t_r = ps_scale_arg(ps_binomial(r, order), -1.0);
    base = ps_scale(ps_mul(one_minus_t_r, ps_exp(p_phi, order), order), p);
    h = harmonic(r);
  } else if (r == 1) {
    // B = p (1-u)^{-p-1}, K = 1
    base = ps_scale(ps_scale_arg(ps_binomial(-p - 1.0, order), -1.0), p);
  } else {
    // log K(u) = sum_{j=1}^{r-1} (1/j)(1 - (1-u)^j)
    for (int j = 1; j <= r - 1; ++j) {
      for (int k = 1; k <= j; ++k) {
        const double sign = (k % 2 == 0) ? -1.0 : 1.0;
        log_k[k] += sign * binomial_coefficient(j, k) / j;
      }
    }
    // p phi(u) = p/(r-1) (1 - (1-u)^{r-1});  B = p (1-u)^{r-2} e^{p phi}
    TruncatedSeries p_phi(std::min<std::size_t>(r - 1, std::max<std::size_t>(order, 1)));
    for (std::size_t k = 1; k <= p_phi.order(); ++k) {
      const double sign = (k % 2 == 0) ? -1.0 : 1.0;
      p_phi[k] = sign * p * binomial_coefficient(r - 1, static_cast<int>(k)) / (r - 1);
    }
    const TruncatedSeries poly = ps_scale_arg(ps_binomial(r - 2, order), -1.0);
    base = ps_scale(ps_mul(poly, ps_exp(p_phi, order), order), p);
    h = harmonic(r - 1);
  }

  const double beta = std::exp(-h);
  return {ps_scale_arg(base, beta), ps_scale_arg(log_k, beta), -h};
}

void check_term(double value, std::size_t n) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::MeasureOverflow,
                "generating measure term " + std::to_string(n) + " is not representable");
  }
}

// log(mu*_n / p^n) for n >= 1.
double log_scaled_term(const LagrangeKernel& kernel, double log_p, std::size_t n) {
  const std::size_t order = n - 1;
  const TruncatedSeries k_pow =
      ps_exp(ps_scale(kernel.log_k, static_cast<double>(n)), order);
  double c = 0.0;
  for (std::size_t i = 0; i <= order; ++i) c += kernel.base[i] * k_pow[order - i];

  const double value = std::log(c) - std::log(static_cast<double>(n)) -
                       static_cast<double>(order) * kernel.log_beta -
                       static_cast<double>(n) * log_p;
  check_term(c > 0.0 ? value : std::numeric_limits<double>::quiet_NaN(), n);
  return value;
}

}  // namespace

Interval mean_domain(const ModelSpec& spec) {
  if (spec.family() == Family::LM) return {0.0, spec.p()};
  return {0.0, std::numeric_limits<double>::infinity()};
}

double variance(const ModelSpec& spec, double m) {
  require_in_domain(spec, m);
  const double x = m / spec.p();
  if (spec.family() == Family::ABM) return m * std::pow(1.0 + x, spec.r());
  return m / std::pow(1.0 - x, spec.r());
}

double psi(const ModelSpec& spec, double m) {
  require_in_domain(spec, m);
  const double p = spec.p();
  if (is_lm_like(spec)) return std::log(m / p) + lm_sum(spec.r(), p, m);
  return std::log(m / (m + p)) + abm_sum(spec.r(), p, m);
}

double phi(const ModelSpec& spec, double m) {
  require_in_domain(spec, m);
  const int r = spec.r();
  const double p = spec.p();
  if (r == 0) return m;
  if (spec.family() == Family::ABM) {
    if (r == 1) return p * std::log1p(m / p);
    // (p/(r-1)) (1 - (p/(m+p))^{r-1})
    return -p / (r - 1) * std::expm1(-(r - 1) * std::log1p(m / p));
  }
  return -p / (r + 1) * std::expm1((r + 1) * std::log1p(-m / p));
}

double g_func(const ModelSpec& spec, double m) {
  const double p = spec.p();
  if (m == 0.0) return p;
  require_in_domain(spec, m);
  if (is_lm_like(spec)) return p * std::exp(-lm_sum(spec.r(), p, m));
  return (m + p) * std::exp(-abm_sum(spec.r(), p, m));
}

double GeneratingMeasure::mu_star(std::size_t n) const {
  return std::exp(log_scaled.at(n) + static_cast<double>(n) * std::log(g0));
}

namespace {

// log(H) where H = e^{-sup Theta}: the radius of convergence of M(z).
double measure_log_radius(const ModelSpec& spec) {
  if (spec.r() == 0) return 0.0;
  return spec.family() == Family::LM ? -harmonic(spec.r()) : -harmonic(spec.r() - 1);
}

void extend_by_recurrence(GeneratingMeasure& measure, std::size_t n_max) {
  const int r = measure.spec.r();
  const bool lm = measure.spec.family() == Family::LM;
  const double log_p = std::log(measure.spec.p());
  const double h = -measure_log_radius(measure.spec);
  auto& st = measure.state;
  if (st.log_nu.empty()) {
    st.x.assign(1, 0.0);
    st.log_x.assign(1, -std::numeric_limits<double>::infinity());
    st.w_pow.assign(static_cast<std::size_t>(r), std::vector<double>(1, 1.0));
    st.log_nu.assign(1, 0.0);
  }
  const std::vector<double> empty;
  for (std::size_t n = st.log_nu.size(); n <= n_max; ++n) {
    // (n-1) x_n = sum_{j<n} x_j [w^r]_{n-j}
    double xn = 0.0;
    if (n == 1) {
      xn = std::exp(-h);
    } else if (r > 0) {
      const auto& wr = st.w_pow[static_cast<std::size_t>(r - 1)];
      for (std::size_t j = 1; j < n; ++j) xn += st.x[j] * wr[n - j];
      xn /= static_cast<double>(n - 1);
    }
    st.x.push_back(xn);
    st.log_x.push_back(xn > 0.0 ? std::log(xn) : -std::numeric_limits<double>::infinity());

    if (r > 0) {
      auto& w = st.w_pow[0];
      double wn = xn;
      if (lm) {
        wn = 0.0;
        for (std::size_t j = 1; j <= n; ++j) wn += st.x[j] * w[n - j];
      }
      w.push_back(wn);
      for (std::size_t k = 1; k < st.w_pow.size(); ++k) {
        const auto& prev = st.w_pow[k - 1];
        double s = 0.0;
        for (std::size_t j = 0; j <= n; ++j) s += w[j] * prev[n - j];
        st.w_pow[k].push_back(s);
      }
    }

    // n nu_n = p sum_{k=1}^n x_k nu_{n-k}, summed in log space
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= n; ++k) top = std::max(top, st.log_x[k] + st.log_nu[n - k]);
    double s = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      const double v = st.log_x[k] + st.log_nu[n - k];
      if (v > -std::numeric_limits<double>::infinity()) s += std::exp(v - top);
    }
    const double log_nu = log_p - std::log(static_cast<double>(n)) + top + std::log(s);
    const double value = log_nu + static_cast<double>(n) * (h - log_p);
    check_term(value, n);
    st.log_nu.push_back(log_nu);
    measure.log_scaled.push_back(value);
  }
}

void extend_by_lagrange(GeneratingMeasure& measure, std::size_t n_max) {
  const std::size_t have = measure.n_max();
  const LagrangeKernel kernel = make_kernel(measure.spec, n_max - 1);
  const double log_p = std::log(measure.spec.p());
  measure.log_scaled.reserve(n_max + 1);
  for (std::size_t n = have + 1; n <= n_max; ++n) {
    measure.log_scaled.push_back(log_scaled_term(kernel, log_p, n));
  }
}

}  // namespace

GeneratingMeasure generating_measure(const ModelSpec& spec, std::size_t n_max,
                                     MeasureAlgorithm algorithm) {
  GeneratingMeasure measure{spec, {0.0}, spec.p(), algorithm, {}};
  extend_measure(measure, n_max);
  return measure;
}

void extend_measure(GeneratingMeasure& measure, std::size_t n_max) {
  if (n_max <= measure.n_max()) return;
  if (measure.algorithm == MeasureAlgorithm::Lagrange) {
    extend_by_lagrange(measure, n_max);
  } else {
    extend_by_recurrence(measure, n_max);
  }
}

std::vector<double> CountDistribution::probabilities() const {
  std::vector<double> out(log_pmf.size());
  std::transform(log_pmf.begin(), log_pmf.end(), out.begin(),
                 [](double v) { return std::exp(v); });
  return out;
}

namespace {

void fill_log_pmf(const GeneratingMeasure& measure, double m,
                  std::size_t from, std::vector<double>& log_pmf) {
  const ModelSpec& spec = measure.spec;
  const double slope = std::log(spec.p()) + psi(spec, m);
  const double offset = phi(spec, m);
  for (std::size_t n = from; n <= measure.n_max(); ++n) {
    log_pmf.push_back(measure.log_scaled[n] + static_cast<double>(n) * slope - offset);
  }
}

double captured_mass(const std::vector<double>& log_pmf) {
  double s = 0.0;
  for (double v : log_pmf) s += std::exp(v);
  return s;
}

}  // namespace

CountDistribution pmf_from_measure(const GeneratingMeasure& measure, double m) {
  require_in_domain(measure.spec, m);
  CountDistribution dist{measure.spec, m, {}, 0.0};
  dist.log_pmf.reserve(measure.n_max() + 1);
  fill_log_pmf(measure, m, 0, dist.log_pmf);
  dist.tail_tolerance = std::max(0.0, 1.0 - captured_mass(dist.log_pmf));
  return dist;
}

CountDistribution pmf(const ModelSpec& spec, double m, std::size_t n_max) {
  require_in_domain(spec, m);
  return pmf_from_measure(generating_measure(spec, n_max), m);
}

CountDistribution pmf_adaptive(const ModelSpec& spec, double m,
                               const PmfOptions& options) {
  require_in_domain(spec, m);
  const std::size_t cap = std::max<std::size_t>(options.hard_cap, 1);
  std::size_t n_max = std::clamp<std::size_t>(options.initial_n_max, 1, cap);
  GeneratingMeasure measure = generating_measure(spec, n_max);

  CountDistribution dist{spec, m, {}, 0.0};
  double cumulative = 0.0;
  while (true) {
    const std::size_t from = dist.log_pmf.size();
    fill_log_pmf(measure, m, from, dist.log_pmf);
    for (std::size_t n = from; n < dist.log_pmf.size(); ++n) {
      const double term = std::exp(dist.log_pmf[n]);
      cumulative += term;
      if (term < options.term_tolerance &&
          cumulative >= 1.0 - options.mass_tolerance) {
        dist.log_pmf.resize(n + 1);
        dist.tail_tolerance = std::max(0.0, 1.0 - cumulative);
        return dist;
      }
    }
    if (n_max >= cap) break;
    n_max = std::min(cap, 2 * n_max);
    extend_measure(measure, n_max);
  }
  dist.tail_tolerance = std::max(0.0, 1.0 - cumulative);
  return dist;
}

double zero_prob(const ModelSpec& spec, double m) {
  return std::exp(-phi(spec, m));
}

double cumulant(const ModelSpec& spec, double m, int j) {
  if (j < 1) {
    throw Error(ErrorCode::InvalidArgument, "cumulant order must be >= 1");
  }
  require_in_domain(spec, m);
  if (j == 1) return m;

  // Taylor expansion of V around m in the offset h.
  const std::size_t order = static_cast<std::size_t>(j - 2);
  const double p = spec.p();
  const int r = spec.r();
  TruncatedSeries factor(order);
  if (spec.family() == Family::ABM) {
    factor = ps_scale(ps_scale_arg(ps_binomial(r, order), 1.0 / (m + p)),
                      std::pow(1.0 + m / p, r));
  } else {
    factor = ps_scale(ps_scale_arg(ps_binomial(-r, order), -1.0 / (p - m)),
                      std::pow(1.0 - m / p, -r));
  }
  TruncatedSeries linear(std::max<std::size_t>(order, 1));
  linear[0] = m;
  linear[1] = 1.0;
  const TruncatedSeries v = ps_mul(linear, factor, order);

  TruncatedSeries w = v;
  for (int step = 0; step < j - 2; ++step) {
    w = ps_mul(v, ps_derivative(w), w.order() - 1);
  }
  return w[0];
}

double skewness(const ModelSpec& spec, double m) {
  return cumulant(spec, m, 3) / std::pow(cumulant(spec, m, 2), 1.5);
}

double excess_kurtosis(const ModelSpec& spec, double m) {
  const double k2 = cumulant(spec, m, 2);
  return cumulant(spec, m, 4) / (k2 * k2);
}

namespace {

void require_bounded(const ModelSpec& spec) {
  if (spec.family() != Family::ABM || spec.r() < 2) {
    throw Error(ErrorCode::UnboundedMeasure,
                "total mass is finite only for the ABM class with r >= 2, got " +
                    spec.label());
  }
}

std::vector<double> shifted_partial_sums(const GeneratingMeasure& measure) {
  const double shift = std::log(measure.spec.p()) - harmonic(measure.spec.r() - 1);
  std::vector<double> sums(measure.n_max() + 1);
  double s = 0.0;
  for (std::size_t n = 0; n <= measure.n_max(); ++n) {
    s += std::exp(measure.log_scaled[n] + static_cast<double>(n) * shift);
    sums[n] = s;
  }
  return sums;
}

// Solves the small dense system a x = b by Gaussian elimination with
// partial pivoting.
template <std::size_t K>
std::array<double, K> solve(std::array<std::array<double, K>, K> a,
                            std::array<double, K> b) {
  for (std::size_t col = 0; col < K; ++col) {
    std::size_t piv = col;
    for (std::size_t row = col + 1; row < K; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
    }
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t row = col + 1; row < K; ++row) {
      const double f = a[row][col] / a[col][col];
      for (std::size_t c = col; c < K; ++c) a[row][c] -= f * a[col][c];
      b[row] -= f * b[col];
    }
  }
  std::array<double, K> x{};
  for (std::size_t i = K; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < K; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

// The measure behaves like n^{-1-(r-1)/r} near the boundary, so partial
// sums approach the limit as sum_j a_j N^{-j/r} over non-integer j/r.
double extrapolate(const std::vector<double>& sums, std::size_t n, int r) {
  constexpr std::size_t kPoints = 4;
  std::array<double, kPoints - 1> exponents{};
  for (int j = r - 1, filled = 0; filled < static_cast<int>(kPoints) - 1; ++j) {
    if (j % r != 0) exponents[filled++] = static_cast<double>(j) / r;
  }
  std::array<std::array<double, kPoints>, kPoints> a{};
  std::array<double, kPoints> b{};
  for (std::size_t i = 0; i < kPoints; ++i) {
    const std::size_t ni = n >> i;
    a[i][0] = 1.0;
    for (std::size_t e = 0; e + 1 < kPoints; ++e) {
      a[i][e + 1] = std::pow(static_cast<double>(ni), -exponents[e]);
    }
    b[i] = sums[ni];
  }
  return solve(a, b)[0];
}

}  // namespace

double total_mass(const ModelSpec& spec, std::size_t n_max) {
  require_bounded(spec);
  return shifted_partial_sums(generating_measure(spec, n_max)).back();
}

TotalMassEstimate estimate_total_mass(const ModelSpec& spec, double tolerance,
                                      std::size_t max_n) {
  require_bounded(spec);
  std::size_t n = 64;
  GeneratingMeasure measure = generating_measure(spec, n);
  double previous = extrapolate(shifted_partial_sums(measure), n, spec.r());
  while (2 * n <= max_n) {
    n *= 2;
    extend_measure(measure, n);
    const std::vector<double> sums = shifted_partial_sums(measure);
    const double current = extrapolate(sums, n, spec.r());
    const bool converged = std::abs(current - previous) < tolerance;
    previous = current;
    if (converged) return {sums[n], current, n};
  }
  const std::vector<double> sums = shifted_partial_sums(measure);
  return {sums[n], previous, n};
}

}  // namespace edm
