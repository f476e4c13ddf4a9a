#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "rwre/error.hpp"
#include "rwre/kernels.hpp"
#include "rwre/limit.hpp"

using namespace rwre;

namespace {

// Independent quadrature of kappa in the original variable v.
double kappa_oracle(double beta, double s2, double c1, double s, double dr) {
  boost::math::quadrature::tanh_sinh<double> q;
  const double I = q.integrate(
      [&](double v) {
        return std::exp(-dr * dr / (2.0 * s * v)) / std::sqrt(2.0 * std::numbers::pi * v);
      },
      0.0, s2 / c1);
  return std::sqrt(s) / (beta * s2) * I;
}

}  // namespace

TEST_CASE("kappa against an independent quadrature") {
  const LimitFunction lim(0.75, 4.0 / 3.0, 1.0, 1.0 / 6.0);
  for (double s : {0.01, 0.3, 1.0})
    for (double dr : {0.0, 0.1, 0.5, 2.0})
      CHECK(lim.kappa(s, dr) == doctest::Approx(kappa_oracle(0.75, 4.0 / 3.0, 1.0, s, dr)).epsilon(1e-9));
  const LimitFunction lim2(0.97, 5.3, 2.1, 0.18);
  CHECK(lim2.kappa(0.7, 0.4) == doctest::Approx(kappa_oracle(0.97, 5.3, 2.1, 0.7, 0.4)).epsilon(1e-9));
}

TEST_CASE("g closed form and kappa(s, 0) = g(s)") {
  const double beta = 0.75, s2 = 4.0 / 3.0, c1 = 1.0;
  const LimitFunction lim(beta, s2, c1, 1.0 / 6.0);
  for (double s : {0.1, 0.5, 1.0}) {
    const double closed = 2.0 * std::sqrt(s) / (beta * std::sqrt(s2) * std::sqrt(c1) * std::sqrt(2.0 * std::numbers::pi));
    CHECK(lim.g(s) == doctest::Approx(closed).epsilon(1e-12));
    CHECK(std::abs(lim.kappa(s, 0.0) - lim.g(s)) <= 1e-9);
  }
}

TEST_CASE("REF1 frozen values") {
  const LimitFunction lim(constants(reference_law_k1()));
  CHECK(lim.beta() == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(lim.g(1.0) == doctest::Approx(0.921318).epsilon(1e-6));
  CHECK(lim.covariance(1.0, 1.0, 0.0, 0.0) == doctest::Approx(0.921318 / 6.0).epsilon(1e-6));
}

TEST_CASE("h properties") {
  const LimitFunction lim(0.75, 4.0 / 3.0, 1.0, 1.0 / 6.0);
  const std::vector<double> r{0.0, 0.5};
  for (const std::vector<double>& th : {std::vector<double>{1, 1}, std::vector<double>{1, -1},
                                        std::vector<double>{2, 0.3}}) {
    CHECK(lim.h(0.0, r, th) == 0.0);
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
      const double cur = lim.h(i / 100.0, r, th);
      CHECK(cur >= prev);
      prev = cur;
    }
  }
  const std::vector<double> far{0.0, 1e6};
  const std::vector<double> opp{1.0, -1.0};
  CHECK(std::abs(lim.h(1.0, far, opp) - 2.0 * lim.kappa(1.0, 0.0)) <= 1e-6);
}

TEST_CASE("covariance uses the earlier time") {
  const LimitFunction lim(0.75, 4.0 / 3.0, 1.0, 1.0 / 6.0);
  CHECK(lim.covariance(0.5, 1.0, 0.0, 0.5) == lim.covariance(1.0, 0.5, 0.0, 0.5));
  CHECK(lim.covariance(0.5, 1.0, 0.0, 0.5) == doctest::Approx(lim.kappa(0.5, 0.5) / 6.0));
  CHECK(lim.covariance(0.0, 1.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(LimitFunction(0.0, 1.0, 1.0, 1.0), DegenerateLaw);
  CHECK_THROWS_AS(LimitFunction(1.0, 0.0, 1.0, 1.0), DegenerateLaw);
  CHECK_THROWS_AS(LimitFunction(1.0, 1.0, 0.0, 1.0), DegenerateLaw);
}
