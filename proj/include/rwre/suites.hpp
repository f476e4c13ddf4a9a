#pragma once

// Named verification checks shared by the CLI `verify` command and the
// acceptance binary. Each check returns Reports; thresholds come from
// Tolerances or from the arguments.

#include <optional>
#include <string>
#include <vector>

#include "rwre/cltlab.hpp"
#include "rwre/kernels.hpp"
#include "rwre/limit.hpp"

namespace rwre {

/// Monte Carlo c1, c0, sigmaBar2, u0 from `traces` first segments each,
/// within zMax standard errors of the exact values.
std::vector<Report> kernel_crossvalidation(const EnvironmentLaw& law, const TheoryConstants& c,
                                           std::int64_t traces, std::uint64_t seed,
                                           const Tolerances& tol);

/// c0 = c1 = 1, sigmaBar2 = 4/3, u0 = 1 within 1e-9 (K=1, Dirichlet(1,1,1)).
Report reference_constants_exact(const TheoryConstants& c);

/// |aBar(x) sigmaBar2 / |x| - 1| <= rel.
Report spitzer_asymptote(const PotentialKernel& a, std::int64_t x, double rel);

/// aBar(x) = |x| on |x| <= 200 within 1e-8 for the simple symmetric walk.
Report simple_walk_potential();

/// max_{n<=nMax} |beta G_{n-1}(0,0) - E_0 aBar(Y_n)| / sqrt(n) <= 1e-6.
Report beta_identity(const TheoryConstants& c, std::int64_t nMax);

/// G_{[n/c1]}(x_n, 0) / sqrt(n) within rel of kappa(1, dr).
Report green_limit(const TheoryConstants& c, const LimitFunction& lim, std::int64_t n, double dr,
                   double rel);

/// sup_x |beta G_n(x,0) - Gbar_n(x,0)| / sqrt(n) decreasing over nList and
/// below bound at the last n.
Report green_uniform(const TheoryConstants& c, const std::vector<std::int64_t>& nList, double bound);

/// Gbar_n(0,0)/sqrt(n) within rel of 2 / (sigmaBar sqrt(2 pi)).
Report green_local_limit(const TheoryConstants& c, std::int64_t n, double rel);

/// Var(Y_n)/n, Gaussian fourth moment and E|Y_n|/sqrt(n) of the q chain.
Report y_chain_clt(const TheoryConstants& c, std::int64_t n);

/// Non-meeting shared-environment segment law equals the independent one.
Report mode_consistency(const EnvironmentLaw& law, double tol);

/// h(0) = 0, h nondecreasing on a 100-point grid, bounded difference
/// quotients on (0.01, 1], kappa(s,0) = g(s), separated cross terms vanish.
Report h_properties(const LimitFunction& lim);

/// Pooled R samples vs direct L_1 samples, geometric tail bound, and
/// |L_n/n - c1| <= 0.01 at n = llnLevels.
std::vector<Report> l_level_laws(const EnvironmentLaw& law, const TheoryConstants& c,
                                 std::int64_t traces, std::int64_t llnLevels, std::uint64_t seed,
                                 const Tolerances& tol);

/// Log-log slope of E|X_[0,n] cap X~_[0,n]| over nList within [lo, hi].
Report intersection_growth(const EnvironmentLaw& law, const std::vector<std::int64_t>& nList,
                           std::int64_t replicas, std::uint64_t seed, double lo, double hi);

/// Degenerate law: xi == 0, Gamma == 0, statistical tests skip, constants
/// report degeneracy, V_n == 0.
Report degenerate_ladder();

struct SuiteOutput {
  std::vector<Report> reports;
  std::optional<EnsembleResult> ensemble;
  std::optional<TheoryConstants> constants;
};

/// suite in {all, kernels, averaged, quenched}.
SuiteOutput run_suite(const ExperimentConfig& cfg, const std::string& suite);

}  // namespace rwre
