// Acceptance battery: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every tolerance is pinned below; nothing is read from disk.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "rwre/cltlab.hpp"
#include "rwre/kernels.hpp"
#include "rwre/limit.hpp"
#include "rwre/rng.hpp"
#include "rwre/suites.hpp"

using namespace rwre;

namespace {

constexpr std::int64_t kReplicas = 2000;
constexpr double kVarianceRel = 0.15;
constexpr double kCovarianceRel = 0.15;
constexpr double kRatioLo = 1.8;
constexpr double kRatioHi = 2.2;
constexpr double kSkewMax = 0.15;
constexpr double kKurtMax = 0.3;
constexpr double kZMax = 4.0;
constexpr std::int64_t kCrossTraces = 1000000;
constexpr double kSpitzerRel = 0.02;
constexpr std::int64_t kBetaMaxN = 1000;
constexpr double kGreenRel = 0.05;
constexpr double kGreenUniform = 0.02;
constexpr std::int64_t kLevelTraces = 100000;
constexpr std::int64_t kLlnLevels = 100000;
constexpr std::int64_t kIntersectionReplicas = 10000;
constexpr double kSlopeLo = 0.45;
constexpr double kSlopeHi = 0.55;
constexpr std::int64_t kVanishingM = 200;
constexpr std::int64_t kRedraws = 10000;
constexpr std::uint64_t kSeed = 20240601;

int failures = 0;

struct Clock {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void line(int id, bool pass, const std::string& what, const std::string& detail, const Clock& c) {
  if (!pass) ++failures;
  std::printf("%s criterion %d: %s | %s [%.1fs]\n", pass ? "PASS" : "FAIL", id, what.c_str(),
              detail.c_str(), c.seconds());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double detail(const Report& r, const std::string& key) {
  for (const auto& [k, v] : r.details)
    if (k == key) return v;
  return NAN;
}

// Conjunction of reports with a compact summary of the failing ones.
bool all_pass(const std::vector<Report>& reps, std::string& out) {
  bool ok = true;
  for (const auto& r : reps) {
    if (!r.pass) {
      ok = false;
      out += " [failed " + r.test + fmt(": stat %.6g pred %.6g]", r.statistic, r.predicted);
    }
  }
  return ok;
}

Tolerances pinned() {
  Tolerances t;
  t.varianceRel = kVarianceRel;
  t.covarianceRel = kCovarianceRel;
  t.ratioLo = kRatioLo;
  t.ratioHi = kRatioHi;
  t.skewMax = kSkewMax;
  t.kurtMax = kKurtMax;
  t.zMax = kZMax;
  t.alpha = 0.01;
  return t;
}

}  // namespace

int main() {
  const Tolerances tol = pinned();
  const auto ref1 = reference_law_k1();
  const auto ref2 = reference_law_k2();
  const auto c1 = constants(ref1);
  const auto c2 = constants(ref2);
  const LimitFunction lim1(c1);
  const LimitFunction lim2(c2);

  // Criteria 1-4 share one ensemble of exact quenched means.
  ExperimentConfig cfg;
  cfg.law = ref1;
  cfg.nList = {256, 1024};
  cfg.sGrid = {0.5, 1.0};
  cfg.rList = {0.0, 0.5};
  cfg.replicas = kReplicas;
  cfg.masterSeed = kSeed;
  cfg.tol = tol;
  Clock ens;
  const auto res = run_ensemble(cfg);
  std::printf("ensemble: %lld replicas in %.1fs\n", static_cast<long long>(kReplicas), ens.seconds());

  {
    Clock c;
    const auto r = covariance_test(res, lim1, 1024, {{1.0, 0.0, 1.0, 0.0}}, tol)[0];
    const double rel = std::abs(r.statistic / r.predicted - 1.0);
    line(1, r.pass && rel <= kVarianceRel, "Var(xi_1024(1,0))/sqrt(n) vs g(1) wGw",
         fmt("estimate %.5f predicted %.5f rel %.4f", r.statistic, r.predicted, rel), c);
  }
  {
    Clock c;
    const auto reps = variance_scaling_test(res, 1.0, 0.0, tol, stream_key(kSeed, 2));
    const bool ok = reps.size() == 1 && reps[0].pass;
    line(2, ok, "Var(xi_1024)/Var(xi_256) in [1.8, 2.2]",
         reps.empty() ? "no pair" : fmt("ratio %.4f CI [%.4f, %.4f]", reps[0].statistic,
                                        detail(reps[0], "ci_lo"), detail(reps[0], "ci_hi")),
         c);
  }
  {
    Clock c;
    std::vector<CellPair> pairs;
    for (auto [s, t] : {std::pair{0.5, 1.0}, std::pair{1.0, 1.0}})
      for (auto [ri, rj] : {std::pair{0.0, 0.0}, std::pair{0.0, 0.5}}) pairs.push_back({s, ri, t, rj});
    const auto reps = covariance_test(res, lim1, 1024, pairs, tol);
    double worst = 0.0;
    for (const auto& r : reps) worst = std::max(worst, std::abs(r.statistic / r.predicted - 1.0));
    std::string d = fmt("worst relative error %.4f over %g pairs", worst, static_cast<double>(reps.size()));
    line(3, all_pass(reps, d), "covariance structure at n = 1024", d, c);
  }
  {
    Clock c;
    const auto r = normality_test(res, lim1, 1024, 1.0, 0.0, tol);
    const double skew = detail(r, "skewness");
    const double kurt = detail(r, "excess_kurtosis");
    const bool ok = std::abs(skew) <= kSkewMax && std::abs(kurt) <= kKurtMax;
    line(4, ok, "skewness and excess kurtosis of xi_1024(1,0)/n^{1/4}",
         fmt("skew %.4f exkurt %.4f KS p %.3f", skew, kurt, detail(r, "ks_p")), c);
  }
  {
    Clock c;
    std::string d;
    auto reps = kernel_crossvalidation(ref1, c1, kCrossTraces, stream_key(kSeed, 5, 1), tol);
    const auto reps2 = kernel_crossvalidation(ref2, c2, kCrossTraces, stream_key(kSeed, 5, 2), tol);
    reps.insert(reps.end(), reps2.begin(), reps2.end());
    reps.push_back(reference_constants_exact(c1));
    double worstZ = 0.0;
    for (const auto& r : reps)
      if (r.se > 0.0) worstZ = std::max(worstZ, std::abs(r.statistic - r.predicted) / r.se);
    d = fmt("REF1 and REF2, worst |z| %.3f; REF1 exact constants checked", worstZ);
    line(5, all_pass(reps, d), "Monte Carlo c1, c0, sigmaBar2, u0 vs exact", d, c);
  }
  {
    Clock c;
    const auto sp = spitzer_asymptote(c1.aBar, 50, kSpitzerRel);
    const auto srw = simple_walk_potential();
    line(6, sp.pass && srw.pass, "potential kernel asymptote and SRW case",
         fmt("REF1 aBar(50) sigmaBar2 / 50 = %.5f; SRW max error %.2e", sp.statistic, srw.statistic), c);
  }
  {
    Clock c;
    const auto a = beta_identity(c1, kBetaMaxN);
    const auto b = beta_identity(c2, kBetaMaxN);
    line(7, a.pass && b.pass, "beta identity for n <= 1000",
         fmt("max scaled error REF1 %.2e REF2 %.2e", a.statistic, b.statistic), c);
  }
  {
    Clock c;
    std::vector<Report> reps;
    for (double dr : {0.0, 0.5}) {
      reps.push_back(green_limit(c1, lim1, 10000, dr, kGreenRel));
      reps.push_back(green_limit(c2, lim2, 10000, dr, kGreenRel));
    }
    double worst = 0.0;
    for (const auto& r : reps) worst = std::max(worst, std::abs(r.statistic / r.predicted - 1.0));
    std::string d = fmt("n = 1e4, dr in {0, 0.5}, REF1 and REF2, worst relative error %.4f", worst);
    line(8, all_pass(reps, d), "Green function limit", d, c);
  }
  {
    Clock c;
    const auto a = green_uniform(c1, {100, 1000, 10000}, kGreenUniform);
    const auto b = green_uniform(c2, {100, 1000, 10000}, kGreenUniform);
    line(9, a.pass && b.pass, "uniform Green comparison at n = 1e4",
         fmt("sup / sqrt(n): REF1 %.5f REF2 %.5f", a.statistic, b.statistic), c);
  }
  {
    Clock c;
    auto reps = l_level_laws(ref1, c1, kLevelTraces, kLlnLevels, stream_key(kSeed, 10, 1), tol);
    const auto reps2 = l_level_laws(ref2, c2, kLevelTraces, kLlnLevels, stream_key(kSeed, 10, 2), tol);
    reps.insert(reps.end(), reps2.begin(), reps2.end());
    std::string d = "REF1 and REF2:";
    for (const auto& r : reps) d += " " + r.test + fmt("=%.4g", r.statistic);
    line(10, all_pass(reps, d), "L-level laws", d, c);
  }
  {
    Clock c;
    const auto r = intersection_growth(ref1, {100, 1000, 10000}, kIntersectionReplicas,
                                       stream_key(kSeed, 11), kSlopeLo, kSlopeHi);
    line(11, r.pass, "intersection growth slope in [0.45, 0.55]",
         fmt("slope %.4f se %.4f", r.statistic, r.se), c);
  }
  {
    Clock c;
    const auto v = quenched_averaged_vanishing_test(ref1, {64, 128, 256}, kVanishingM, stream_key(kSeed, 12), tol);
    line(12, v.report.pass, "Var(V_n) strictly decreasing, Var(V_256) <= 0.5 Var(V_64)",
         fmt("Var(V_n) = %.5f, %.5f, %.5f", v.varV[0], v.varV[1], v.varV[2]) +
             fmt("; ratio %.4f; tower max |z| %.2f", v.report.statistic, v.towerCheck.statistic),
         c);
  }
  {
    Clock c;
    const auto a = martingale_test(ref1, stream_key(kSeed, 13, 1), 64, kRedraws, tol);
    const auto b = martingale_test(ref2, stream_key(kSeed, 13, 2), 64, kRedraws, tol);
    line(13, a.pass && b.pass, "martingale increments have mean 0",
         fmt("max |z| REF1 %.3f REF2 %.3f", a.statistic, b.statistic), c);
  }
  {
    Clock c;
    const auto a = h_properties(lim1);
    const auto b = h_properties(lim2);
    line(14, a.pass && b.pass, "h monotone, h(0) = 0, bounded quotients, kappa(s,0) = g(s)",
         fmt("max difference quotient REF1 %.4g REF2 %.4g", detail(a, "max_difference_quotient"),
             detail(b, "max_difference_quotient")),
         c);
  }
  {
    Clock c;
    const auto r = degenerate_ladder();
    line(15, r.pass, "degenerate environment ladder", r.note, c);
  }

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
