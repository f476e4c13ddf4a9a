#pragma once

// Single-walk machinery: sampled paths with level-crossing records, and the
// exact quenched / averaged laws of X_{lambda_k} from the level sweep.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/level_sweep.hpp"
#include "rwre/rng.hpp"

namespace rwre {

/// X_{lambda_n} for lambda_n = inf{k >= 1 : X_k . e2 >= n}.
struct CrossingRecord {
  std::int64_t level = 0;
  std::int64_t lambda = 0;
  Site position;
};

/// Samples one step from `row` (indexed like the law's StepSet).
std::size_t sample_step(std::span<const double> row, double u) noexcept;

/// Runs the walk under P^omega_start until it has crossed maxLevel and returns
/// one record per level 1..maxLevel. `path`, when given, receives X_0, X_1, ...
std::vector<CrossingRecord> simulate_walk(const Environment& env, Site start,
                                          std::int64_t maxLevel, CounterRng& rng,
                                          std::vector<Site>* path = nullptr);

/// Exact quenched law of X_{lambda_k} for k = start.y .. maxLevel. Entry k
/// (relative to start.y) is the measure at level start.y + k; level start.y is
/// the point mass at the start (X_{lambda_0} := X_0).
std::vector<QuenchedLevelMeasure> quenched_crossing_profile(const Environment& env, Site start,
                                                            std::int64_t maxLevel,
                                                            double truncEps = kDefaultTruncEps);

struct MeanSeriesPoint {
  double s = 0.0;
  std::int64_t level = 0;  // [n s]
  double e1 = 0.0;         // E(X_{lambda_level} . e1)
  double e2 = 0.0;         // E(X_{lambda_level} . e2)
  double U = 0.0;          // E(U_{level - 1}); U_{-1} := 0
};

struct QuenchedMeanSeries {
  double r = 0.0;
  std::int64_t n = 0;
  Site start;
  std::vector<MeanSeriesPoint> points;
  double droppedMass = 0.0;
};

/// floor(r sqrt(n)).
std::int64_t start_column(double r, std::int64_t n);
/// floor(n s) with a guard against representation error (s = 0.1 * 10 etc.).
std::int64_t level_index(double s, std::int64_t n);

/// Series for several starts at height 0, computed in one joint sweep of
/// `rows`. RowSource needs K(), row_size() and row_at(Site, span<double>).
template <class RowSource>
std::vector<QuenchedMeanSeries> mean_series(const RowSource& rows, std::span<const double> rList,
                                            std::int64_t n, std::span<const double> sGrid,
                                            double truncEps = kDefaultTruncEps) {
  if (n < 1) throw Error("n must be >= 1");
  std::vector<std::int64_t> levels;
  for (double s : sGrid) {
    if (!(s >= 0.0 && s <= 1.0)) throw Error("sGrid must lie in [0, 1]");
    levels.push_back(level_index(s, n));
  }
  std::vector<Site> starts;
  std::vector<QuenchedMeanSeries> out(rList.size());
  for (std::size_t i = 0; i < rList.size(); ++i) {
    starts.push_back({start_column(rList[i], n), 0});
    out[i].r = rList[i];
    out[i].n = n;
    out[i].start = starts.back();
    out[i].points.resize(sGrid.size());
  }
  if (starts.empty()) return out;

  const std::int64_t last = levels.empty() ? 0 : *std::max_element(levels.begin(), levels.end());
  LevelSweep<RowSource> sweep(rows, starts, truncEps);
  std::vector<double> visits(starts.size(), 0.0);  // sum of hitMass over levels < current
  for (std::int64_t k = 0;; ++k) {
    for (std::size_t j = 0; j < levels.size(); ++j) {
      if (levels[j] != k) continue;
      for (std::size_t i = 0; i < starts.size(); ++i) {
        const Vec2 mean = sweep.measure(i).mean();
        out[i].points[j] = {sGrid[j], k, mean[0], mean[1], visits[i]};
      }
    }
    if (k == last) break;
    for (std::size_t i = 0; i < starts.size(); ++i) visits[i] += sweep.measure(i).hitMass();
    sweep.advance();
  }
  for (std::size_t i = 0; i < starts.size(); ++i) out[i].droppedMass = sweep.dropped_mass(i);
  return out;
}

QuenchedMeanSeries quenched_mean_series(const Environment& env, double r, std::int64_t n,
                                        std::span<const double> sGrid,
                                        double truncEps = kDefaultTruncEps);

/// Same sweep with every row replaced by the mean row m.
QuenchedMeanSeries averaged_mean(const EnvironmentLaw& law, double r, std::int64_t n,
                                 std::span<const double> sGrid,
                                 double truncEps = kDefaultTruncEps);

/// xi_n(s, r): quenched minus averaged mean of X_{lambda_[ns]} . e1.
double xi(const Environment& env, const EnvironmentLaw& law, double s, double r, std::int64_t n,
          double truncEps = kDefaultTruncEps);

}  // namespace rwre
