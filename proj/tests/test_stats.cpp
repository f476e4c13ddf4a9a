#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rwre/rng.hpp"
#include "rwre/stats.hpp"

using namespace rwre;

TEST_CASE("compensated sum") {
  std::vector<double> x{1e16, 1.0, -1e16, 1.0};
  CHECK(stats::compensated_sum(x) == 2.0);
}

TEST_CASE("moments of a small sample") {
  const std::vector<double> x{1, 2, 3, 4, 10};
  const auto m = stats::moments(x);
  CHECK(m.n == 5);
  CHECK(m.mean == doctest::Approx(4.0));
  CHECK(m.var == doctest::Approx(12.5));
  CHECK(m.seMean == doctest::Approx(std::sqrt(12.5 / 5)));
  CHECK(m.skew > 0.0);
}

TEST_CASE("Gaussian sample has small skew and excess kurtosis") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(0.0, 2.0);
  std::vector<double> x(200000);
  for (double& v : x) v = n(gen);
  const auto m = stats::moments(x);
  CHECK(std::abs(m.skew) <= 4 * m.seSkew);
  CHECK(std::abs(m.exKurt) <= 4 * m.seKurt);
  CHECK(std::abs(m.var - 4.0) <= 4 * m.seVar);
}

TEST_CASE("covariance") {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{2, 4, 6, 8.5};
  CHECK(stats::covariance(x, y) == doctest::Approx(10.75 / 3.0).epsilon(1e-14));
  CHECK(stats::covariance(x, x) == doctest::Approx(stats::moments(x).var));
  CHECK(stats::covariance_se(x, y) > 0.0);
}

TEST_CASE("Kolmogorov survival matches reference values") {
  CHECK(stats::kolmogorov_survival(1.0) == doctest::Approx(0.26999967167735456).epsilon(1e-9));
  CHECK(stats::kolmogorov_survival(0.5) == doctest::Approx(0.9639452436648751).epsilon(1e-9));
  CHECK(stats::kolmogorov_survival(1.36) == doctest::Approx(0.049485876755377876).epsilon(1e-9));
}

TEST_CASE("KS statistic") {
  const std::vector<double> x{-1.2, 0.3, 0.8, -0.1, 2.1, -0.7, 0.05, 1.4, -1.9, 0.6};
  const auto r = stats::ks_normal(x, 0.1, 1.2);
  CHECK(r.statistic == doctest::Approx(0.13381616738909635).epsilon(1e-12));
  CHECK(r.pValue > 0.9);
}

TEST_CASE("two-sample chi-square against a contingency-table reference") {
  std::vector<std::int64_t> a, b;
  auto fill = [](std::vector<std::int64_t>& v, std::vector<int> counts) {
    for (std::size_t k = 0; k < counts.size(); ++k)
      for (int i = 0; i < counts[k]; ++i) v.push_back(static_cast<std::int64_t>(k + 1));
  };
  fill(a, {40, 30, 20, 10});
  fill(b, {50, 25, 15, 10});
  const auto r = stats::chi_square_two_sample(a, b);
  CHECK(r.statistic == doctest::Approx(2.27994227994228).epsilon(1e-12));
  CHECK(r.dof == 3);
  CHECK(r.pValue == doctest::Approx(0.5163743203877207).epsilon(1e-9));
}

TEST_CASE("chi-square merges sparse upper bins") {
  std::vector<std::int64_t> a(100, 1), b(100, 1);
  a.push_back(9);
  const auto r = stats::chi_square_two_sample(a, b);
  CHECK(r.dof == 0);
  CHECK(r.pValue == 1.0);
}

TEST_CASE("regression against a least-squares reference") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2.1, 3.9, 6.2, 7.8, 10.1};
  const auto r = stats::regression(x, y);
  CHECK(r.slope == doctest::Approx(1.99).epsilon(1e-12));
  CHECK(r.intercept == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(r.seSlope == doctest::Approx(0.059721576223897795).epsilon(1e-9));
  CHECK(r.hi - r.slope == doctest::Approx(3.182446305284263 * 0.059721576223897795).epsilon(1e-9));
}

TEST_CASE("bootstrap interval covers the mean") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> n(5.0, 1.0);
  std::vector<double> x(2000);
  for (double& v : x) v = n(gen);
  const auto iv = stats::bootstrap(
      x.size(),
      [&](std::span<const std::size_t> idx) {
        double s = 0.0;
        for (auto i : idx) s += x[i];
        return s / double(idx.size());
      },
      1000, 7);
  CHECK(iv.lo < iv.estimate);
  CHECK(iv.estimate < iv.hi);
  CHECK(iv.hi - iv.lo == doctest::Approx(2 * 1.96 / std::sqrt(2000.0)).epsilon(0.15));
  // Same seed, same interval.
  const auto again = stats::bootstrap(
      x.size(),
      [&](std::span<const std::size_t> idx) {
        double s = 0.0;
        for (auto i : idx) s += x[i];
        return s / double(idx.size());
      },
      1000, 7);
  CHECK(again.lo == iv.lo);
  CHECK(again.hi == iv.hi);
}

TEST_CASE("lag-1 autocorrelation") {
  std::vector<double> iid, ar;
  CounterRng rng(5);
  double prev = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform() - 0.5;
    iid.push_back(u);
    prev = 0.8 * prev + u;
    ar.push_back(prev);
  }
  const auto a = stats::lag1_autocorrelation(iid);
  CHECK(std::abs(a.r) <= 4 * a.se);
  const auto b = stats::lag1_autocorrelation(ar);
  CHECK(b.r == doctest::Approx(0.8).epsilon(0.03));
}
