#include "rwre/kernels.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <string>

#include "rwre/error.hpp"

namespace rwre {

namespace {

std::int64_t reach(const Pmf1D& q) { return std::max(std::abs(q.lo), std::abs(q.hi())); }

void check_symmetric(const Pmf1D& q, double tol) {
  for (std::int64_t d = q.lo; d <= q.hi(); ++d)
    if (std::abs(q.at(d) - q.at(-d)) > tol) throw Error("qBar is not symmetric");
  if (std::abs(q.mean()) > tol) throw Error("qBar does not have mean 0");
  if (!(q.variance() > 0.0)) throw DegenerateLaw("qBar has zero variance", 0.0, 0.0, 0.0);
}

}  // namespace

double PotentialKernel::operator()(std::int64_t x) const noexcept {
  const std::int64_t ax = std::abs(x);
  const std::int64_t w = window();
  if (ax <= w) return a[static_cast<std::size_t>(ax)];
  return a.back() + static_cast<double>(ax - w) / sigma2;
}

PotentialKernel potential_kernel(const Pmf1D& qBar, std::int64_t window, std::int64_t solveWindow,
                                 double tol) {
  check_symmetric(qBar, tol);
  const double s2 = qBar.variance();
  const std::int64_t W = std::max({window, solveWindow, 4 * window, std::int64_t{400},
                                   64 * reach(qBar)});
  const std::size_t N = static_cast<std::size_t>(W);

  // Unknown i <-> aBar(i + 1); row x <-> the equation at x = 0..W-1.
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
  for (std::int64_t x = 0; x < W; ++x) {
    const auto row = static_cast<int>(x);
    for (std::int64_t d = qBar.lo; d <= qBar.hi(); ++d) {
      const double c = qBar.at(d);
      if (c == 0.0) continue;
      const std::int64_t y = std::abs(x + d);
      if (y == 0) continue;
      if (y <= W) {
        trip.emplace_back(row, static_cast<int>(y - 1), c);
      } else {
        trip.emplace_back(row, static_cast<int>(W - 1), c);
        rhs[row] -= c * static_cast<double>(y - W) / s2;
      }
    }
    if (x > 0)
      trip.emplace_back(row, static_cast<int>(x - 1), -1.0);
    else
      rhs[row] += 1.0;
  }
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw ConvergenceError("potential kernel system is singular", 1.0);
  const Eigen::VectorXd sol = lu.solve(rhs);
  const double residual = (A * sol - rhs).cwiseAbs().maxCoeff();
  if (!(residual <= tol)) throw ConvergenceError("potential kernel solve", residual);

  PotentialKernel out;
  out.sigma2 = s2;
  out.residual = residual;
  out.a.assign(static_cast<std::size_t>(window + 1), 0.0);
  for (std::int64_t x = 1; x <= window; ++x) out.a[static_cast<std::size_t>(x)] = sol[x - 1];
  return out;
}

PotentialKernel potential_kernel_limit(const Pmf1D& qBar, std::int64_t window, std::int64_t nMax,
                                       double tol) {
  check_symmetric(qBar, tol);
  const double s2 = qBar.variance();
  const std::int64_t R = reach(qBar);
  const std::size_t nw = static_cast<std::size_t>(window + 1);

  // Pair-averaged partial sums S_n(x) = sum_{k<=n} p_k(0) - p_k(x) at n0 * 4^j.
  std::vector<std::int64_t> checkpoints;
  for (std::int64_t n = 256; n + 1 <= nMax; n *= 4) checkpoints.push_back(n);
  if (checkpoints.size() < 3) throw Error("nMax too small for the defining-limit route");
  std::vector<std::vector<double>> S;

  Pmf1D p{0, {1.0}};
  std::vector<double> acc(nw, 0.0);
  std::vector<double> prev(nw, 0.0);
  std::size_t next = 0;
  const double cut = 1e-30;
  for (std::int64_t k = 0; next < checkpoints.size(); ++k) {
    for (std::size_t x = 0; x < nw; ++x) acc[x] += p.at(0) - p.at(static_cast<std::int64_t>(x));
    if (k == checkpoints[next]) prev = acc;
    if (k == checkpoints[next] + 1) {
      std::vector<double> avg(nw);
      for (std::size_t x = 0; x < nw; ++x) avg[x] = 0.5 * (prev[x] + acc[x]);
      S.push_back(std::move(avg));
      ++next;
    }
    Pmf1D q{p.lo - R, std::vector<double>(p.p.size() + 2 * static_cast<std::size_t>(R), 0.0)};
    for (std::size_t i = 0; i < p.p.size(); ++i)
      for (std::int64_t d = -R; d <= R; ++d)
        q.p[i + static_cast<std::size_t>(d + R)] += p.p[i] * qBar.at(d);
    std::size_t l = 0;
    while (l < q.p.size() && q.p[l] < cut) ++l;
    std::size_t r = q.p.size();
    while (r > l && q.p[r - 1] < cut) --r;
    p.lo = q.lo + static_cast<std::int64_t>(l);
    p.p.assign(q.p.begin() + static_cast<std::ptrdiff_t>(l), q.p.begin() + static_cast<std::ptrdiff_t>(r));
  }

  // Tableau over the checkpoints; column c removes the n^{-(2c-1)/2} term.
  std::vector<std::vector<double>> T = S;
  std::vector<double> prevCol;
  double err = 0.0;
  PotentialKernel out;
  out.sigma2 = s2;
  for (std::size_t c = 1; c < S.size(); ++c) {
    const double f = std::pow(4.0, static_cast<double>(c) - 0.5);
    std::vector<std::vector<double>> U;
    for (std::size_t j = 0; j + 1 < T.size(); ++j) {
      std::vector<double> row(nw);
      for (std::size_t x = 0; x < nw; ++x) row[x] = (f * T[j + 1][x] - T[j][x]) / (f - 1.0);
      U.push_back(std::move(row));
    }
    err = 0.0;
    for (std::size_t x = 0; x < nw; ++x) err = std::max(err, std::abs(U.back()[x] - T.back()[x]));
    T = std::move(U);
  }
  out.a = T.back();
  out.a[0] = 0.0;
  out.residual = err;
  if (err <= tol) return out;
  throw ConvergenceError("defining-limit potential kernel did not converge within nMax", err);
}

Table1D green(const Pmf1D& qBar, const std::optional<Pmf1D>& q0, std::int64_t n,
              std::int64_t xWindow) {
  if (n < 0) throw Error("n must be >= 0");
  const std::int64_t R = std::max(reach(qBar), q0 ? reach(*q0) : 0);
  const double sd = std::sqrt(std::max(qBar.variance(), q0 ? q0->moment(2) : 0.0));
  const std::int64_t margin = std::min<std::int64_t>(
      R * n, static_cast<std::int64_t>(std::ceil(14.0 * sd * std::sqrt(static_cast<double>(n)))) +
                 4 * R);
  const std::int64_t W = xWindow + margin;
  const std::size_t N = static_cast<std::size_t>(2 * W + 1);

  std::vector<double> f(N, 0.0);
  std::vector<double> g(N, 0.0);
  std::vector<double> G(N, 0.0);
  f[static_cast<std::size_t>(W)] = 1.0;
  G = f;
  // f is supported on [a, b]; entries below kTiny at the edges are dropped so
  // the far Gaussian tails never reach subnormal arithmetic.
  constexpr double kTiny = 1e-40;
  std::int64_t a = W;
  std::int64_t b = W;
  const std::int64_t last = static_cast<std::int64_t>(N) - 1;
  for (std::int64_t k = 1; k <= n; ++k) {
    const std::int64_t na = std::max<std::int64_t>(0, a - qBar.hi() - R);
    const std::int64_t nb = std::min<std::int64_t>(last, b - qBar.lo + R);
    for (std::int64_t i = na; i <= nb; ++i) {
      const std::int64_t x = i - W;
      const Pmf1D& q = (x == 0 && q0) ? *q0 : qBar;
      const std::int64_t jlo = std::max(i + q.lo, a);
      const std::int64_t jhi = std::min(i + q.hi(), b);
      double s = 0.0;
      for (std::int64_t j = jlo; j <= jhi; ++j)
        s += q.p[static_cast<std::size_t>(j - i - q.lo)] * f[static_cast<std::size_t>(j)];
      g[static_cast<std::size_t>(i)] = s;
    }
    for (std::int64_t i = a; i <= b; ++i) f[static_cast<std::size_t>(i)] = 0.0;
    std::swap(f, g);
    a = na;
    b = nb;
    while (a < b && f[static_cast<std::size_t>(a)] < kTiny) f[static_cast<std::size_t>(a++)] = 0.0;
    while (b > a && f[static_cast<std::size_t>(b)] < kTiny) f[static_cast<std::size_t>(b--)] = 0.0;
    for (std::int64_t i = a; i <= b; ++i) G[static_cast<std::size_t>(i)] += f[static_cast<std::size_t>(i)];
  }
  Table1D out;
  out.w = xWindow;
  out.v.assign(G.begin() + static_cast<std::ptrdiff_t>(W - xWindow),
               G.begin() + static_cast<std::ptrdiff_t>(W + xWindow + 1));
  return out;
}

QChainLaw q_chain_pushforward(const Pmf1D& qBar, const Pmf1D& q0, std::int64_t y0, std::int64_t n,
                              double truncEps, const std::function<double(std::int64_t)>& f) {
  const std::int64_t R = std::max(reach(qBar), reach(q0));
  QChainLaw out;
  Pmf1D p{y0, {1.0}};
  auto record = [&] {
    out.atZero.push_back(p.at(0));
    if (!f) return;
    double e = 0.0;
    for (std::size_t i = 0; i < p.p.size(); ++i)
      if (p.p[i] != 0.0) e += p.p[i] * f(p.lo + static_cast<std::int64_t>(i));
    out.expect.push_back(e);
  };
  record();
  for (std::int64_t k = 1; k <= n; ++k) {
    Pmf1D q{p.lo - R, std::vector<double>(p.p.size() + 2 * static_cast<std::size_t>(R), 0.0)};
    for (std::size_t i = 0; i < p.p.size(); ++i) {
      const double m = p.p[i];
      if (m == 0.0) continue;
      const std::int64_t x = p.lo + static_cast<std::int64_t>(i);
      const Pmf1D& kern = x == 0 ? q0 : qBar;
      for (std::int64_t d = kern.lo; d <= kern.hi(); ++d)
        q.p[static_cast<std::size_t>(x + d - q.lo)] += m * kern.at(d);
    }
    std::size_t l = 0;
    double drop = 0.0;
    while (l + 1 < q.p.size() && drop + q.p[l] <= 0.5 * truncEps) drop += q.p[l++];
    std::size_t r = q.p.size();
    drop = 0.0;
    while (r > l + 1 && drop + q.p[r - 1] <= 0.5 * truncEps) drop += q.p[--r];
    p.lo = q.lo + static_cast<std::int64_t>(l);
    p.p.assign(q.p.begin() + static_cast<std::ptrdiff_t>(l), q.p.begin() + static_cast<std::ptrdiff_t>(r));
    record();
  }
  out.yn = std::move(p);
  return out;
}

BetaResult beta_constant(const Pmf1D& q0, const PotentialKernel& aBar, double tol) {
  const std::int64_t w = aBar.window();
  double outside = 0.0;
  double value = 0.0;
  for (std::int64_t x = q0.lo; x <= q0.hi(); ++x) {
    if (std::abs(x) > w)
      outside += q0.at(x);
    else
      value += q0.at(x) * aBar(x);
  }
  if (outside > tol)
    throw CoverageError("aBar window " + std::to_string(w) + " leaves mass " +
                        std::to_string(outside) + " of q0 uncovered");
  BetaResult out;
  out.value = value;
  out.truncationBound = tol * *std::max_element(aBar.a.begin(), aBar.a.end());
  out.degenerate = !(value > 0.0);
  return out;
}

TheoryConstants constants(const EnvironmentLaw& law, double tol, std::int64_t window) {
  if (window < 50) throw Error("aBar window must be >= 50");
  const SegmentLaw meet = segment_law(law, SegmentMode::SharedMeeting, tol);
  const SegmentLaw nonMeet = segment_law(law, SegmentMode::SharedNonMeeting, tol);
  const SegmentLaw indep = segment_law(law, SegmentMode::IndependentEnvironments, tol);

  TheoryConstants c;
  c.segmentTol = tol;
  c.q0 = meet.dy_marginal();
  c.qBar = indep.dy_marginal();
  c.c0 = meet.l_marginal().mean();
  c.c1 = nonMeet.l_marginal().mean();
  c.sigmaBar2 = c.qBar.variance();
  c.u0 = c.q0.moment(2);
  c.truncatedMass = std::max({meet.truncatedMass, nonMeet.truncatedMass, indep.truncatedMass});
  c.gammaQF = compute_moments(law).gamma_quadratic_form();
  if (!(c.sigmaBar2 > 1e-14))
    throw DegenerateLaw("law is degenerate: sigmaBar2 = 0", c.c0, c.c1, c.u0);
  c.aBar = potential_kernel(c.qBar, window, 0, c.potentialTol);
  const BetaResult b = beta_constant(c.q0, c.aBar, tol);
  c.beta = b.value;
  c.betaTruncationBound = b.truncationBound;
  return c;
}

}  // namespace rwre
