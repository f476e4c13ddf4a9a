#include "rwre/walk.hpp"

#include <cmath>

namespace rwre {

double Band::mass() const noexcept {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

double Band::first_moment() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * static_cast<double>(lo + static_cast<std::int64_t>(i));
  return s;
}

void Band::cover(std::int64_t a, std::int64_t b) {
  if (empty()) {
    lo = a;
    p.assign(static_cast<std::size_t>(b - a + 1), 0.0);
    return;
  }
  if (a < lo) {
    p.insert(p.begin(), static_cast<std::size_t>(lo - a), 0.0);
    lo = a;
  }
  if (b > hi()) p.resize(static_cast<std::size_t>(b - lo + 1), 0.0);
}

double Band::trim(double eps) {
  const double half = 0.5 * eps;
  std::size_t left = 0;
  double dropLeft = 0.0;
  while (left < p.size() && dropLeft + p[left] <= half) dropLeft += p[left++];
  if (left == p.size()) {
    p.clear();
    return dropLeft;
  }
  std::size_t right = p.size();
  double dropRight = 0.0;
  while (right > left + 1 && dropRight + p[right - 1] <= half) dropRight += p[--right];
  p.erase(p.begin() + static_cast<std::ptrdiff_t>(right), p.end());
  p.erase(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(left));
  lo += static_cast<std::int64_t>(left);
  return dropLeft + dropRight;
}

double QuenchedLevelMeasure::total() const noexcept {
  double s = 0.0;
  for (const Band& b : bands) s += b.mass();
  return s;
}

Vec2 QuenchedLevelMeasure::mean() const noexcept {
  Vec2 m{0.0, 0.0};
  for (std::size_t j = 0; j < bands.size(); ++j) {
    m[0] += bands[j].first_moment();
    m[1] += bands[j].mass() * static_cast<double>(level + static_cast<std::int64_t>(j));
  }
  return m;
}

double QuenchedLevelMeasure::prob(Site s) const noexcept {
  const std::int64_t j = s.y - level;
  if (j < 0 || j >= static_cast<std::int64_t>(bands.size())) return 0.0;
  return bands[static_cast<std::size_t>(j)].at(s.x);
}

std::size_t sample_step(std::span<const double> row, double u) noexcept {
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] <= 0.0) continue;
    acc += row[i];
    last = i;
    if (u < acc) return i;
  }
  return last;  // u landed in rounding slack above the row sum
}

std::vector<CrossingRecord> simulate_walk(const Environment& env, Site start,
                                          std::int64_t maxLevel, CounterRng& rng,
                                          std::vector<Site>* path) {
  const auto& steps = env.law().stepset.steps();
  std::vector<double> row(env.row_size());
  std::vector<CrossingRecord> out;
  if (maxLevel > start.y) out.reserve(static_cast<std::size_t>(maxLevel - start.y));
  if (path) {
    path->clear();
    path->push_back(start);
  }
  Site pos = start;
  std::int64_t t = 0;
  std::int64_t next = start.y + 1;
  while (next <= maxLevel) {
    env.row_at(pos, row);
    const Step& z = steps[sample_step(row, rng.uniform())];
    pos.x += z.dx;
    pos.y += z.dy;
    ++t;
    if (path) path->push_back(pos);
    for (; next <= pos.y && next <= maxLevel; ++next) out.push_back({next, t, pos});
  }
  return out;
}

std::vector<QuenchedLevelMeasure> quenched_crossing_profile(const Environment& env, Site start,
                                                            std::int64_t maxLevel,
                                                            double truncEps) {
  const Site starts[1] = {start};
  LevelSweep<Environment> sweep(env, starts, truncEps);
  std::vector<QuenchedLevelMeasure> out;
  out.push_back(sweep.measure());
  while (sweep.level() < maxLevel) {
    sweep.advance();
    out.push_back(sweep.measure());
  }
  return out;
}

std::int64_t start_column(double r, std::int64_t n) {
  return static_cast<std::int64_t>(std::floor(r * std::sqrt(static_cast<double>(n)) + 1e-9));
}

std::int64_t level_index(double s, std::int64_t n) {
  return static_cast<std::int64_t>(std::floor(s * static_cast<double>(n) + 1e-9));
}

QuenchedMeanSeries quenched_mean_series(const Environment& env, double r, std::int64_t n,
                                        std::span<const double> sGrid, double truncEps) {
  const double rs[1] = {r};
  return mean_series(env, rs, n, sGrid, truncEps).front();
}

QuenchedMeanSeries averaged_mean(const EnvironmentLaw& law, double r, std::int64_t n,
                                 std::span<const double> sGrid, double truncEps) {
  const MeanRows rows(law);
  const double rs[1] = {r};
  return mean_series(rows, rs, n, sGrid, truncEps).front();
}

double xi(const Environment& env, const EnvironmentLaw& law, double s, double r, std::int64_t n,
          double truncEps) {
  const double ss[1] = {s};
  return quenched_mean_series(env, r, n, ss, truncEps).points[0].e1 -
         averaged_mean(law, r, n, ss, truncEps).points[0].e1;
}

}  // namespace rwre
