#pragma once

// Ensembles of exact centered quenched means over random environments and
// the statistical tests run on them.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/error.hpp"
#include "rwre/kernels.hpp"
#include "rwre/level_sweep.hpp"
#include "rwre/limit.hpp"

namespace rwre {

struct Tolerances {
  double truncEps = kDefaultTruncEps;
  double segmentTol = kSegmentTol;
  double potentialTol = kPotentialTol;
  double quadratureTol = kQuadratureTol;
  double varianceRel = 0.15;
  double covarianceRel = 0.15;
  double ratioLo = 1.8;
  double ratioHi = 2.2;
  double skewMax = 0.15;
  double kurtMax = 0.3;
  double meetingSumRel = 0.10;
  double alpha = 0.01;
  double zMax = 4.0;
  std::int64_t minReplicas = 100;
  std::int64_t normalityMinReplicas = 500;
  std::int64_t bootstrapResamples = 2000;

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct ExperimentConfig {
  EnvironmentLaw law;
  std::vector<std::int64_t> nList{256, 1024};
  std::vector<double> sGrid{0.5, 1.0};
  std::vector<double> rList{0.0, 0.5};
  std::vector<double> theta{1.0, 1.0};
  std::int64_t replicas = 2000;
  std::uint64_t masterSeed = 1;
  Tolerances tol;

  /// Throws ConfigError.
  void validate() const;
};

/// One cell of the ensemble: the sample of xi_n(s, r) over all replicas.
struct EnsembleCell {
  std::int64_t n = 0;
  double s = 0.0;
  double r = 0.0;
  std::vector<double> xi;
};

struct EnsembleResult {
  std::int64_t replicas = 0;
  std::vector<EnsembleCell> cells;  // ordered by n, then s, then r

  const EnsembleCell& cell(std::int64_t n, double s, double r) const;
  bool degenerate() const;  // every sample exactly 0
};

class ReplicaFailure : public Error {
 public:
  ReplicaFailure(std::int64_t replica, const std::string& what)
      : Error("replica " + std::to_string(replica) + ": " + what), replica(replica) {}
  std::int64_t replica;
};

/// Worker count: RWRE_THREADS when set, otherwise the OpenMP default.
int worker_count();

/// Environment seed of one replica.
std::uint64_t replica_seed(std::uint64_t masterSeed, std::int64_t replica);

/// All (n, s, r) cells of one replica; every cell uses the same environment.
std::vector<double> replica_cells(const ExperimentConfig& cfg, std::int64_t replica);

/// OpenMP fan-out over replicas; bit-identical to run_ensemble_serial.
EnsembleResult run_ensemble(const ExperimentConfig& cfg, int threads = 0);
/// Single-threaded reference.
EnsembleResult run_ensemble_serial(const ExperimentConfig& cfg);

struct Report {
  std::string test;
  double statistic = 0.0;
  double predicted = 0.0;
  double se = 0.0;
  bool pass = false;
  bool skipped = false;
  bool underpowered = false;
  std::string note;
  std::vector<std::pair<std::string, double>> details;
};

/// Var(xi_{4n}(s, r)) / Var(xi_n(s, r)) for every (n, 4n) in the result, with a
/// paired bootstrap interval. One report per pair.
std::vector<Report> variance_scaling_test(const EnsembleResult& res, double s, double r,
                                          const Tolerances& tol, std::uint64_t seed = 7);

/// Cov(xi_n(s, ri), xi_n(t, rj)) / sqrt(n) against the kappa prediction for the
/// listed cell pairs. Relative tolerance when the prediction is not ~0, a
/// z-score bound otherwise.
struct CellPair {
  double s, ri, t, rj;
};
std::vector<Report> covariance_test(const EnsembleResult& res, const LimitFunction& lim,
                                    std::int64_t n, const std::vector<CellPair>& pairs,
                                    const Tolerances& tol);

/// Skewness / excess kurtosis of xi_n(s, r) / n^{1/4} and a KS test against the
/// predicted Gaussian.
Report normality_test(const EnsembleResult& res, const LimitFunction& lim, std::int64_t n,
                      double s, double r, const Tolerances& tol);

/// Sample mean of xi / n^{1/4} within zMax standard errors of 0 in every cell.
Report centering_test(const EnsembleResult& res, const Tolerances& tol);

/// P^omega(both walks hit level k at one site), k = 0..levels, from the
/// product of the two single-walk laws (the walks are independent given omega).
std::vector<double> quenched_meeting_probabilities(const Environment& env, Site a, Site b,
                                                   std::int64_t levels, double truncEps);

/// Same quantity from a joint dynamic programme over site pairs; exponential
/// care is not taken, keep levels small.
std::vector<double> quenched_meeting_joint_dp(const Environment& env, Site a, Site b,
                                              std::int64_t levels);

struct VanishingResult {
  std::vector<std::int64_t> nList;
  std::vector<double> varV;
  std::vector<double> meanV;
  Report report;
  Report towerCheck;
};

/// V_n(omega) = n^{-1/2} sum_{k<=n} [P^omega(meet at k-1) - P(meet at k-1)] for
/// walks started at (0,0), over M environments (nested: one environment serves
/// every n).
VanishingResult quenched_averaged_vanishing_test(const EnvironmentLaw& law,
                                                 std::vector<std::int64_t> nList, std::int64_t M,
                                                 std::uint64_t seed, const Tolerances& tol);

/// E_{0,u}(phi_n) - E_{0,u+y}(phi_n) by Monte Carlo for y in {e1, e2}, together
/// with the exact annealed values; passes if, for every (u, y), the weighted
/// slope of the difference (oriented to be positive at large n) on log n has
/// a confidence interval that contains 0 or lies below it.
Report phi_difference_test(const EnvironmentLaw& law, const std::vector<Site>& uList,
                           const std::vector<std::int64_t>& nList, std::int64_t M,
                           std::uint64_t seed, const Tolerances& tol);

/// Redraws row level k-1 of a fixed environment and averages the increment
/// E^w(X_{lambda_k}) - E^w(X_{lambda_{k-1}}) - E(D) P^w(level k-1 hit).
Report martingale_test(const EnvironmentLaw& law, std::uint64_t seed, std::int64_t k,
                       std::int64_t redraws, const Tolerances& tol);

/// n^{-1/2} sum_{k<=n} P(meet at level k-1) for starts [ri sqrt n], [rj sqrt n]:
/// exact annealed value and a Monte Carlo estimate, against kappa(1, ri - rj).
Report meeting_sum_test(const EnvironmentLaw& law, const LimitFunction& lim, std::int64_t n,
                        double ri, double rj, std::int64_t traces, std::uint64_t seed,
                        const Tolerances& tol);

}  // namespace rwre
