#pragma once

// Annealed laws of the difference walk Y observed at common levels: the
// segment laws (Delta Y, L_1), the kernels q and qBar, the constants derived
// from them, the potential kernel aBar, Green functions, and beta.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "rwre/environment.hpp"

namespace rwre {

/// Probability vector on the integers lo, lo+1, ...
struct Pmf1D {
  std::int64_t lo = 0;
  std::vector<double> p;

  std::int64_t hi() const noexcept { return lo + static_cast<std::int64_t>(p.size()) - 1; }
  double at(std::int64_t x) const noexcept {
    return (x < lo || x > hi()) ? 0.0 : p[static_cast<std::size_t>(x - lo)];
  }
  double mass() const noexcept;
  double mean() const noexcept;
  /// E X^k.
  double moment(int k) const noexcept;
  double variance() const noexcept;
  /// P(X > k).
  double tail(std::int64_t k) const noexcept;
};

enum class SegmentMode { SharedMeeting, SharedNonMeeting, IndependentEnvironments };

const char* to_string(SegmentMode mode);

/// Joint law of (Y_1 - Y_0, L_1) started from a common level.
struct SegmentLaw {
  SegmentMode mode = SegmentMode::IndependentEnvironments;
  std::map<std::pair<std::int64_t, std::int64_t>, double> joint;  // (dY, l) -> prob
  double truncatedMass = 0.0;

  Pmf1D dy_marginal() const;
  Pmf1D l_marginal() const;
};

inline constexpr double kSegmentTol = 1e-12;
inline constexpr double kPotentialTol = 1e-8;

/// Exact race dynamic programme: one joint first step (J for SharedMeeting,
/// m x m otherwise), then the strictly lower walk steps with m until the two
/// heights coincide. Throws ConvergenceError if the residual mass is still
/// above tol after maxLevels levels.
SegmentLaw segment_law(const EnvironmentLaw& law, SegmentMode mode, double tol = kSegmentTol,
                       std::int64_t maxLevels = 100000);

/// aBar on 0..window (symmetric, aBar(0) = 0).
struct PotentialKernel {
  std::vector<double> a;
  double sigma2 = 0.0;
  double residual = 0.0;

  std::int64_t window() const noexcept { return static_cast<std::int64_t>(a.size()) - 1; }
  /// aBar(x); beyond the window the linear asymptote with slope 1/sigma2.
  double operator()(std::int64_t x) const noexcept;
};

/// Solves  qBar aBar = aBar off 0,  (qBar aBar)(0) = 1,  aBar(0) = 0  on
/// |x| <= solveWindow with the linear asymptote outside. The result is
/// truncated to |x| <= window. Requires qBar symmetric with mean 0.
PotentialKernel potential_kernel(const Pmf1D& qBar, std::int64_t window,
                                 std::int64_t solveWindow = 0, double tol = kPotentialTol);

/// aBar(x) from its defining limit Gbar_n(0,0) - Gbar_n(x,0). Partial sums at
/// n = 256 * 4^j <= nMax are pair-averaged and Richardson-extrapolated in
/// powers n^{-1/2}, n^{-3/2}, ...; throws ConvergenceError when the last two
/// extrapolants differ by more than tol. Needs n >> x^2, so keep window small.
PotentialKernel potential_kernel_limit(const Pmf1D& qBar, std::int64_t window, std::int64_t nMax,
                                       double tol = kPotentialTol);

/// Values on the columns -w..w.
struct Table1D {
  std::int64_t w = 0;
  std::vector<double> v;
  double at(std::int64_t x) const noexcept {
    return (x < -w || x > w) ? 0.0 : v[static_cast<std::size_t>(x + w)];
  }
};

/// G_n(x,0) = sum_{k<=n} P_x(Y_k = 0) for |x| <= xWindow. The chain steps by
/// qBar off 0 and by q0 (when given) from 0; without q0 this is Gbar_n.
Table1D green(const Pmf1D& qBar, const std::optional<Pmf1D>& q0, std::int64_t n,
              std::int64_t xWindow);

/// Law of Y_n for the q chain started at y0, together with P(Y_k = 0) and,
/// when f is given, E f(Y_k) for k = 0..n.
struct QChainLaw {
  Pmf1D yn;
  std::vector<double> atZero;
  std::vector<double> expect;
};
QChainLaw q_chain_pushforward(const Pmf1D& qBar, const Pmf1D& q0, std::int64_t y0,
                              std::int64_t n, double truncEps = 1e-16,
                              const std::function<double(std::int64_t)>& f = {});

struct BetaResult {
  double value = 0.0;
  double truncationBound = 0.0;
  bool degenerate = false;
};

/// beta = sum_x q0(x) aBar(x). Throws CoverageError when q0 carries more than
/// tol mass outside the aBar window.
BetaResult beta_constant(const Pmf1D& q0, const PotentialKernel& aBar, double tol = kSegmentTol);

struct TheoryConstants {
  double c0 = 0.0;
  double c1 = 0.0;
  double sigmaBar2 = 0.0;
  double u0 = 0.0;
  double beta = 0.0;
  double betaTruncationBound = 0.0;
  double gammaQF = 0.0;
  double truncatedMass = 0.0;
  double segmentTol = kSegmentTol;
  double potentialTol = kPotentialTol;
  Pmf1D q0;    // Delta Y under the meeting start
  Pmf1D qBar;  // Delta Y in independent environments
  PotentialKernel aBar;
};

/// Throws DegenerateLaw when sigmaBar2 == 0.
TheoryConstants constants(const EnvironmentLaw& law, double tol = kSegmentTol,
                          std::int64_t window = 200);

/// Exact annealed P(both walks hit level k at one site), k = 0..levels, for
/// walks started at (0,0) and (dx0, dh0). Tracks (X~ - X, overshoots) level by
/// level; rows are fresh except when both walks leave one site.
std::vector<double> meeting_probabilities(const EnvironmentLaw& law, std::int64_t dx0,
                                          std::int64_t dh0, std::int64_t levels,
                                          double truncEps = 1e-15);

}  // namespace rwre
