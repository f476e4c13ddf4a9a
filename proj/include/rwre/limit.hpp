#pragma once

// Limit variance kernel of the centered quenched means:
//   kappa(s, dr) = sqrt(s)/(beta sigmaBar2) int_0^{sigmaBar2/c1} (2 pi v)^{-1/2} exp(-dr^2/(2 s v)) dv
//   h(s) = sum_{i,j} theta_i theta_j kappa(s, r_i - r_j),   g(s) = kappa(s, 0).

#include <span>

namespace rwre {

struct TheoryConstants;

inline constexpr double kQuadratureTol = 1e-10;

class LimitFunction {
 public:
  LimitFunction(double beta, double sigmaBar2, double c1, double gammaQF);
  explicit LimitFunction(const TheoryConstants& c);

  double kappa(double s, double dr) const;
  double g(double s) const;
  double h(double s, std::span<const double> r, std::span<const double> theta) const;
  /// Limit of Cov(xi_n(s, ri), xi_n(t, rj)) / sqrt(n).
  double covariance(double s, double t, double ri, double rj) const;

  double beta() const noexcept { return beta_; }
  double sigmaBar2() const noexcept { return sigmaBar2_; }
  double c1() const noexcept { return c1_; }
  double gammaQF() const noexcept { return gammaQF_; }

 private:
  double beta_;
  double sigmaBar2_;
  double c1_;
  double gammaQF_;
};

}  // namespace rwre
