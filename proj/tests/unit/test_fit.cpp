#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "edm/fit.hpp"
#include "test_helpers.hpp"

namespace edm {
namespace {

using testing::rel_err;
using testing::throws_code;

const ModelSpec& model_of(const FitResult& f) { return std::get<ModelSpec>(f.spec); }
const BaselineSpec& baseline_of(const FitResult& f) { return std::get<BaselineSpec>(f.spec); }

TEST(LogLikelihood, PoissonZeroCell) {
  const FrequencyTable data({{0, 50}});
  EXPECT_NEAR(log_likelihood(ModelSpec(Family::ABM, 0, 1.0), 0.3, data), -50 * 0.3, 1e-12);
}

TEST(LogLikelihood, ZeroCountCellsDoNotMatter) {
  const FrequencyTable a({{0, 10}, {2, 3}});
  const FrequencyTable b({{0, 10}, {1, 0}, {2, 3}, {9, 0}});
  const ModelSpec s(Family::LM, 3, 1.2);
  EXPECT_DOUBLE_EQ(log_likelihood(s, 0.4, a), log_likelihood(s, 0.4, b));
}

TEST(LogLikelihood, AbmOneEqualsNegativeBinomial) {
  const auto data = testing::zaire();
  const double p = 0.2166, m = 0.0865;
  const double ll = log_likelihood(ModelSpec(Family::ABM, 1, p), m, data);
  const double nb = log_likelihood(BaselineSpec(BaselineModel::NB, {p, p / (m + p)}), data);
  EXPECT_NEAR(ll, nb, 1e-8);
}

struct Table3Row {
  Family family;
  int r;
  double p;
};

// p-hat for r = 1..10 on the Zaire data.
const std::vector<Table3Row> kTable3{
    {Family::ABM, 1, 0.216600},  {Family::ABM, 2, 0.459964},  {Family::ABM, 3, 0.704121},
    {Family::ABM, 4, 0.948471},  {Family::ABM, 5, 1.192898},  {Family::ABM, 6, 1.437364},
    {Family::ABM, 7, 1.681852},  {Family::ABM, 8, 1.926354},  {Family::ABM, 9, 2.170866},
    {Family::ABM, 10, 2.415385}, {Family::LM, 1, 0.277098},   {Family::LM, 2, 0.520502},
    {Family::LM, 3, 0.764666},   {Family::LM, 4, 1.009018},   {Family::LM, 5, 1.253448},
    {Family::LM, 6, 1.497914},   {Family::LM, 7, 1.742403},   {Family::LM, 8, 1.986905},
    {Family::LM, 9, 2.231417},   {Family::LM, 10, 2.475934},
};

TEST(FitMle, ReproducesPublishedEstimates) {
  const auto data = testing::zaire();
  for (const auto& row : kTable3) {
    const auto f = fit_mle(row.family, row.r, data);
    EXPECT_EQ(f.m_hat, 0.0865);
    EXPECT_LE(rel_err(model_of(f).p(), row.p), 1e-5) << model_of(f).label();
    EXPECT_EQ(f.method, FitMethod::MLE);
    EXPECT_EQ(f.n_params, 2u);
    EXPECT_TRUE(std::isfinite(f.log_likelihood));
  }
}

TEST(FitMle, ProfileIsStationary) {
  const auto data = testing::zaire();
  for (auto family : {Family::ABM, Family::LM}) {
    for (int r : {1, 4, 10}) {
      const auto f = fit_mle(family, r, data);
      const auto& s = model_of(f);
      for (double eps : {1e-4, -1e-4}) {
        const ModelSpec moved(family, r, s.p() * (1 + eps));
        EXPECT_LE(log_likelihood(moved, f.m_hat, data), f.log_likelihood) << s.label();
      }
    }
  }
}

TEST(FitMle, FittedMeanMatchesPmfMean) {
  const auto data = testing::zaire();
  const auto f = fit_mle(Family::LM, 4, data);
  const auto pr = pmf_adaptive(model_of(f), f.m_hat, PmfOptions{1e-16, 1e-14, 20000, 32}).probabilities();
  double m = 0.0;
  for (std::size_t n = 0; n < pr.size(); ++n) m += n * pr[n];
  EXPECT_NEAR(m, f.m_hat, 1e-6);
}

TEST(FitMle, Deterministic) {
  const auto data = testing::zaire();
  const auto a = fit_mle(Family::ABM, 6, data), b = fit_mle(Family::ABM, 6, data);
  EXPECT_EQ(model_of(a).p(), model_of(b).p());
  EXPECT_EQ(a.log_likelihood, b.log_likelihood);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(FitMle, PoissonHasNoDispersion) {
  const auto f = fit_mle(Family::ABM, 0, testing::zaire());
  EXPECT_EQ(f.n_params, 1u);
  EXPECT_EQ(f.m_hat, 0.0865);
}

TEST(FitMle, Errors) {
  EXPECT_TRUE(throws_code([] { fit_mle(Family::ABM, 2, FrequencyTable({{3, 10}})); },
                          ErrorCode::EmptyData));
  // Underdispersed data: the likelihood increases toward the Poisson limit.
  const FrequencyTable under({{0, 10}, {1, 80}, {2, 10}});
  EXPECT_TRUE(throws_code([&] { fit_mle(Family::ABM, 2, under); }, ErrorCode::NoInteriorMaximum));
}

TEST(FitMoments, Examples) {
  const auto data = testing::zaire();
  const double xbar = 0.0865, s2 = sample_variance(data);
  const auto abm = fit_moments(Family::ABM, 1, data);
  EXPECT_NEAR(model_of(abm).p(), xbar * xbar / (s2 - xbar), 1e-12);
  EXPECT_NEAR(model_of(abm).p(), 0.20756, 5e-6);
  const auto lm = fit_moments(Family::LM, 1, data);
  EXPECT_NEAR(model_of(lm).p(), xbar / (1 - xbar / s2), 1e-12);
  EXPECT_NEAR(model_of(lm).p(), 0.29406, 5e-6);
  EXPECT_EQ(abm.method, FitMethod::Moments);
  for (auto family : {Family::ABM, Family::LM}) {
    for (int r = 1; r <= 10; ++r) {
      const auto f = fit_moments(family, r, data);
      EXPECT_LE(rel_err(variance(model_of(f), xbar), s2), 1e-10);
    }
  }
}

TEST(FitMoments, VarianceTwiceMean) {
  // mean 1, variance 2
  const FrequencyTable data({{0, 1}, {2, 1}});
  EXPECT_NEAR(model_of(fit_moments(Family::ABM, 1, data)).p(), 1.0, 1e-14);
}

TEST(FitMoments, Errors) {
  const FrequencyTable under({{0, 10}, {1, 80}, {2, 10}});
  EXPECT_TRUE(throws_code([&] { fit_moments(Family::LM, 2, under); }, ErrorCode::Underdispersed));
}

TEST(FitBaseline, PoissonMeanIsMle) {
  const auto f = fit_baseline(BaselineModel::Poisson, testing::zaire());
  EXPECT_NEAR(baseline_of(f).param(0), 0.0865, 1e-7);
  EXPECT_EQ(f.n_params, 1u);
}

TEST(FitBaseline, GeometricWithFixedParetoExponent) {
  const auto data = testing::zaire();
  BaselineFitOptions opt;
  opt.fixed = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  const auto f = fit_baseline(BaselineModel::GDP, data, opt);
  EXPECT_NEAR(baseline_of(f).param(0), 0.0865 / 1.0865, 1e-7);
  EXPECT_EQ(baseline_of(f).param(1), 0.0);
  EXPECT_EQ(f.n_params, 1u);
}

TEST(FitBaseline, NegativeBinomialBeatsPoisson) {
  const auto data = testing::zaire();
  EXPECT_GE(fit_baseline(BaselineModel::NB, data).log_likelihood,
            fit_baseline(BaselineModel::Poisson, data).log_likelihood);
}

TEST(FitBaseline, NegativeBinomialEqualsAbmOne) {
  const auto data = testing::zaire();
  EXPECT_NEAR(fit_baseline(BaselineModel::NB, data).log_likelihood,
              fit_mle(Family::ABM, 1, data).log_likelihood, 1e-6);
}

TEST(FitBaseline, StationaryAtOptimum) {
  const auto data = testing::zaire();
  for (auto m : {BaselineModel::PIG, BaselineModel::NLD, BaselineModel::PLB, BaselineModel::GDP,
                 BaselineModel::BTD}) {
    const auto f = fit_baseline(m, data);
    const auto& v = baseline_of(f).params();
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (double eps : {1e-4, -1e-4}) {
        auto w = v;
        w[i] *= 1 + eps;
        if (!valid_parameters(m, w)) continue;
        EXPECT_LE(log_likelihood(BaselineSpec(m, w), data), f.log_likelihood + 1e-9)
            << to_token(m) << " param " << i;
      }
    }
  }
}

TEST(FitResult, LabelsAndProbabilities) {
  const auto data = testing::zaire();
  const auto f = fit_mle(Family::ABM, 10, data);
  EXPECT_EQ(f.label(), "ABM(r=10)");
  EXPECT_EQ(f.probabilities(7).size(), 8u);
  const auto g = fit_baseline(BaselineModel::BTD, data);
  EXPECT_EQ(g.label(), "BTD");
  EXPECT_EQ(g.probabilities(4).size(), 5u);
}

}  // namespace
}  // namespace edm
