#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rwre::stats {

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> x);

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double var = 0.0;  // unbiased
  double skew = 0.0;
  double exKurt = 0.0;
  double seMean = 0.0;
  double seVar = 0.0;  // from the fourth central moment
  double seSkew = 0.0;
  double seKurt = 0.0;
};

Moments moments(std::span<const double> x);

/// Unbiased sample covariance.
double covariance(std::span<const double> x, std::span<const double> y);

/// Delta-method standard error of the sample covariance.
double covariance_se(std::span<const double> x, std::span<const double> y);

struct Interval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap over replica indices: `stat` receives resampled
/// indices into 0..M-1, so paired samples stay paired.
Interval bootstrap(std::size_t M, const std::function<double(std::span<const std::size_t>)>& stat,
                   std::size_t B, std::uint64_t seed, double level = 0.95);

struct TestResult {
  double statistic = 0.0;
  double dof = 0.0;
  double pValue = 1.0;
};

/// Chi-square homogeneity test of two integer samples; bins are merged from
/// the upper tail until every expected count is at least 5.
TestResult chi_square_two_sample(std::span<const std::int64_t> a, std::span<const std::int64_t> b);

/// One-sample Kolmogorov-Smirnov test against N(mean, sd^2).
TestResult ks_normal(std::span<const double> x, double mean, double sd);

/// Asymptotic Kolmogorov survival function P(K > lambda).
double kolmogorov_survival(double lambda);

struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
  double seSlope = 0.0;
  double lo = 0.0;  // confidence interval for the slope
  double hi = 0.0;
};

/// Weighted least squares (weights 1/se^2 when given), CI from Student t
/// with n-2 degrees of freedom.
Regression regression(std::span<const double> x, std::span<const double> y,
                      std::span<const double> se = {}, double level = 0.95);

struct Autocorrelation {
  double r = 0.0;
  double se = 0.0;
};

Autocorrelation lag1_autocorrelation(std::span<const double> x);

}  // namespace rwre::stats
