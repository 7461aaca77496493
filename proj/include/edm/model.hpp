#pragma once

// ABM and LM exponential dispersion models for counts.
//
//   ABM: V_p(m) = m (1 + m/p)^r,    mean domain (0, inf)
//   LM:  V_p(m) = m / (1 - m/p)^r,  mean domain (0, p)
//
// Both are parameterized by their mean m. The probabilities are
//   P(X = n) = mu*_n exp(n psi_p(m) - phi_p(m)),
// where psi_p and phi_p are primitives of 1/V_p and m/V_p normalized by
// phi_p(0) = 0 and G_p(0) = p with G_p(m) = m exp(-psi_p(m)), and mu* is
// the generating measure obtained by Lagrange coefficient extraction.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace edm {

enum class Family { ABM, LM };

std::string_view to_string(Family family);
/// Accepts "abm" / "lm" (case-insensitive); throws InvalidArgument.
Family parse_family(std::string_view token);

inline constexpr int kDefaultMaxPower = 16;

/// One member of the ABM or LM class: family, integer power r and
/// dispersion p > 0. r = 0 is the Poisson model for both families.
class ModelSpec {
 public:
  /// Throws InvalidParameters unless 0 <= r <= max_power and p is finite
  /// and positive.
  ModelSpec(Family family, int r, double p, int max_power = kDefaultMaxPower);

  Family family() const noexcept { return family_; }
  int r() const noexcept { return r_; }
  double p() const noexcept { return p_; }

  std::string label() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

 private:
  Family family_;
  int r_;
  double p_;
};

/// Open interval (lower, upper).
struct Interval {
  double lower;
  double upper;

  bool contains(double x) const noexcept { return x > lower && x < upper; }
};

Interval mean_domain(const ModelSpec& spec);

double variance(const ModelSpec& spec, double m);
double psi(const ModelSpec& spec, double m);
double phi(const ModelSpec& spec, double m);
/// G_p(m) = m exp(-psi_p(m)); defined on the closure of the mean domain's
/// lower end, with G_p(0) = p.
double g_func(const ModelSpec& spec, double m);

/// How the terms of the generating measure are computed. Both give the
/// same measure; they agree to about 1e-11 relative wherever both apply.
enum class MeasureAlgorithm {
  /// With z = e^theta, x(z) = m/p solves z x' = x w(x)^r where
  /// w = 1 + x (ABM) or 1/(1 - x) (LM), and M(z) = sum mu*_n z^n solves
  /// z M' = p x M. Every step adds positive terms; O(r n_max^2).
  Recurrence,
  /// Coefficient extraction mu*_n = (1/n) [t^{n-1}] B(t) K(t)^n.
  /// Intermediate coefficients outgrow double range near n = 1500 for
  /// large r, and near n = 140 for r = 0 with small p.
  Lagrange,
};

/// Running state of MeasureAlgorithm::Recurrence, all in the rescaled
/// variable beta z.
struct MeasureRecurrenceState {
  std::vector<double> x;                   // coefficients of x
  std::vector<double> log_x;               // log of positive x entries
  std::vector<std::vector<double>> w_pow;  // w^1 .. w^r
  std::vector<double> log_nu;              // log(mu*_n beta^n)
};

/// Generating measure in scaled form: entry n is log(mu*_n / p^n).
struct GeneratingMeasure {
  ModelSpec spec;
  std::vector<double> log_scaled;
  double g0;  // G_p(0) = p
  MeasureAlgorithm algorithm = MeasureAlgorithm::Recurrence;
  MeasureRecurrenceState state{};

  std::size_t n_max() const noexcept { return log_scaled.size() - 1; }
  /// mu*_n itself (may overflow for large n; prefer log_scaled).
  double mu_star(std::size_t n) const;
};

/// Throws MeasureOverflow if any term is not representable.
GeneratingMeasure generating_measure(const ModelSpec& spec, std::size_t n_max,
                                     MeasureAlgorithm algorithm = MeasureAlgorithm::Recurrence);
/// Extends a measure in place to a larger n_max, computing only new terms.
void extend_measure(GeneratingMeasure& measure, std::size_t n_max);

struct PmfOptions {
  double term_tolerance = 1e-12;  // stop once a term falls below this ...
  double mass_tolerance = 1e-10;  // ... and the captured mass is >= 1 - this
  std::size_t hard_cap = 10000;
  std::size_t initial_n_max = 32;
};

struct CountDistribution {
  ModelSpec spec;
  double mean;
  std::vector<double> log_pmf;
  double tail_tolerance;  // bound on the uncaptured mass beyond n_max

  std::size_t n_max() const noexcept { return log_pmf.size() - 1; }
  std::vector<double> probabilities() const;
};

/// Probabilities over 0..n_max.
CountDistribution pmf(const ModelSpec& spec, double m, std::size_t n_max);
/// Extends n_max until the tail criterion of `options` holds.
CountDistribution pmf_adaptive(const ModelSpec& spec, double m,
                               const PmfOptions& options = {});
/// pmf values from an already computed measure (n_max of the measure).
CountDistribution pmf_from_measure(const GeneratingMeasure& measure, double m);

double zero_prob(const ModelSpec& spec, double m);

/// j-th cumulant (j >= 1) via the operator k^(j+1) = V d/dm k^(j).
double cumulant(const ModelSpec& spec, double m, int j);
double skewness(const ModelSpec& spec, double m);
double excess_kurtosis(const ModelSpec& spec, double m);

/// Partial sum of the measure normalized so that the natural parameter
/// space is (-inf, 0): sum_{n <= n_max} mu*_n e^{n q} with q = -H_{r-1}.
/// ABM with r >= 2 only (otherwise UnboundedMeasure).
double total_mass(const ModelSpec& spec, std::size_t n_max);

struct TotalMassEstimate {
  double partial_sum;    // at n_used
  double extrapolated;   // partial sums plus the fitted algebraic tail
  std::size_t n_used;
};

/// Doubles n_max from 64 until successive extrapolations agree to
/// `tolerance` (or `max_n` is reached).
TotalMassEstimate estimate_total_mass(const ModelSpec& spec,
                                      double tolerance = 1e-7,
                                      std::size_t max_n = 512);

}  // namespace edm
