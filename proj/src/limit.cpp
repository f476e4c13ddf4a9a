#include "rwre/limit.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "rwre/error.hpp"
#include "rwre/kernels.hpp"

namespace rwre {

LimitFunction::LimitFunction(double beta, double sigmaBar2, double c1, double gammaQF)
    : beta_(beta), sigmaBar2_(sigmaBar2), c1_(c1), gammaQF_(gammaQF) {
  if (!(beta > 0.0 && sigmaBar2 > 0.0 && c1 > 0.0))
    throw DegenerateLaw("limit functions need beta, sigmaBar2, c1 > 0", 0.0, c1, 0.0);
}

LimitFunction::LimitFunction(const TheoryConstants& c)
    : LimitFunction(c.beta, c.sigmaBar2, c.c1, c.gammaQF) {}

double LimitFunction::kappa(double s, double dr) const {
  if (s < 0.0) throw Error("kappa needs s >= 0");
  if (s == 0.0) return 0.0;
  const double top = std::sqrt(sigmaBar2_ / c1_);
  const double pref = std::sqrt(s) / (beta_ * sigmaBar2_) * std::sqrt(2.0 / std::numbers::pi);
  if (dr == 0.0) return pref * top;
  // v = t^2 removes the v^{-1/2} endpoint singularity.
  const double a = dr * dr / (2.0 * s);
  auto f = [a](double t) { return t > 0.0 ? std::exp(-a / (t * t)) : 0.0; };
  double err = 0.0;
  const double I = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, 0.0, top, 15, kQuadratureTol, &err);
  return pref * I;
}

double LimitFunction::g(double s) const {
  if (s <= 0.0) return 0.0;
  return 2.0 * std::sqrt(s) /
         (beta_ * std::sqrt(sigmaBar2_) * std::sqrt(c1_) * std::sqrt(2.0 * std::numbers::pi));
}

double LimitFunction::h(double s, std::span<const double> r, std::span<const double> theta) const {
  if (r.size() != theta.size()) throw Error("r and theta differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < r.size(); ++j) sum += theta[i] * theta[j] * kappa(s, r[i] - r[j]);
  return sum;
}

double LimitFunction::covariance(double s, double t, double ri, double rj) const {
  return kappa(std::min(s, t), ri - rj) * gammaQF_;
}

}  // namespace rwre
