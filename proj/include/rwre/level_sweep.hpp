#pragma once

// Exact level-by-level propagation of the quenched law of X_{lambda_k}.
//
// At level k the measure lives on heights k..k+K-1. Mass at height k departs
// through the row of its site; mass above k was carried over a jump and waits.
// Several starts at the same height can be swept together so that every row
// is generated once per sweep regardless of how many starts consult it.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/error.hpp"

namespace rwre {

inline constexpr double kDefaultTruncEps = 1e-14;

/// Dense probability vector over the columns [lo, lo + p.size()).
struct Band {
  std::int64_t lo = 0;
  std::vector<double> p;

  bool empty() const noexcept { return p.empty(); }
  std::int64_t hi() const noexcept { return lo + static_cast<std::int64_t>(p.size()) - 1; }
  double at(std::int64_t x) const noexcept {
    return (x < lo || x > hi()) ? 0.0 : p[static_cast<std::size_t>(x - lo)];
  }
  double mass() const noexcept;
  double first_moment() const noexcept;

  /// Grows the band so it covers [a, b].
  void cover(std::int64_t a, std::int64_t b);
  /// Drops tail entries whose cumulative mass is <= eps/2 on each side.
  double trim(double eps);
};

struct QuenchedLevelMeasure {
  std::int64_t level = 0;
  std::vector<Band> bands;  // bands[j] holds the columns at height level + j

  /// P(X_{lambda_k} . e2 == k).
  double hitMass() const noexcept { return bands.empty() ? 0.0 : bands.front().mass(); }
  double total() const noexcept;
  Vec2 mean() const noexcept;
  double prob(Site s) const noexcept;
};

template <class RowSource>
class LevelSweep {
 public:
  LevelSweep(const RowSource& rows, std::span<const Site> starts, double truncEps)
      : rows_(&rows), K_(rows.K()), eps_(truncEps), dropped_(starts.size(), 0.0),
        steps_(StepSet(rows.K()).steps()) {
    if (starts.empty()) throw Error("LevelSweep needs at least one start");
    if (!(truncEps >= 0.0 && truncEps <= 1e-8)) throw Error("truncEps must lie in [0, 1e-8]");
    level_ = starts.front().y;
    for (const Site& s : starts) {
      if (s.y != level_) throw Error("all starts of a joint sweep must share one height");
      QuenchedLevelMeasure mu;
      mu.level = level_;
      mu.bands.resize(static_cast<std::size_t>(K_));
      mu.bands[0].lo = s.x;
      mu.bands[0].p = {1.0};
      measures_.push_back(std::move(mu));
    }
  }

  /// Resumes from measures that all sit at one level.
  LevelSweep(const RowSource& rows, std::vector<QuenchedLevelMeasure> measures, double truncEps)
      : rows_(&rows), K_(rows.K()), eps_(truncEps), measures_(std::move(measures)),
        dropped_(measures_.size(), 0.0), steps_(StepSet(rows.K()).steps()) {
    if (measures_.empty()) throw Error("LevelSweep needs at least one measure");
    level_ = measures_.front().level;
    for (const auto& mu : measures_)
      if (mu.level != level_ || mu.bands.size() != static_cast<std::size_t>(K_))
        throw Error("measures of a joint sweep must share one level and have K bands");
  }

  std::int64_t level() const noexcept { return level_; }
  std::size_t num_starts() const noexcept { return measures_.size(); }
  const QuenchedLevelMeasure& measure(std::size_t i = 0) const { return measures_[i]; }
  double dropped_mass(std::size_t i = 0) const { return dropped_[i]; }

  /// Moves every measure from level k to level k + 1.
  void advance() {
    const std::size_t S = rows_->row_size();
    for (std::size_t i = 0; i < measures_.size(); ++i)
      dropped_[i] += measures_[i].bands[0].trim(eps_);

    // Departure columns of all starts, merged into disjoint intervals.
    intervals_.clear();
    for (const auto& mu : measures_)
      if (!mu.bands[0].empty()) intervals_.push_back({mu.bands[0].lo, mu.bands[0].hi()});
    std::sort(intervals_.begin(), intervals_.end());
    std::size_t w = 0;
    for (std::size_t r = 0; r < intervals_.size(); ++r) {
      if (w > 0 && intervals_[r].first <= intervals_[w - 1].second + 1)
        intervals_[w - 1].second = std::max(intervals_[w - 1].second, intervals_[r].second);
      else
        intervals_[w++] = intervals_[r];
    }
    intervals_.resize(w);
    offsets_.assign(intervals_.size(), 0);
    std::size_t total = 0;
    for (std::size_t r = 0; r < intervals_.size(); ++r) {
      offsets_[r] = total;
      total += static_cast<std::size_t>(intervals_[r].second - intervals_[r].first + 1);
    }
    scratch_.resize(total * S);
    for (std::size_t r = 0; r < intervals_.size(); ++r)
      for (std::int64_t x = intervals_[r].first; x <= intervals_[r].second; ++x) {
        const std::size_t slot = offsets_[r] + static_cast<std::size_t>(x - intervals_[r].first);
        rows_->row_at(Site{x, level_}, std::span<double>(scratch_.data() + slot * S, S));
      }

    for (auto& mu : measures_) {
      mu.bands.emplace_back();  // receives jumps of exactly K
      Band& dep = mu.bands[0];
      if (!dep.empty()) {
        for (int dy = 1; dy <= K_; ++dy)
          mu.bands[static_cast<std::size_t>(dy)].cover(dep.lo - K_, dep.hi() + K_);
        const double* base = row_base(dep.lo);
        const auto& steps = steps_;
        for (std::size_t c = 0; c < dep.p.size(); ++c) {
          const double pc = dep.p[c];
          if (pc == 0.0) continue;
          const double* row = base + c * S;
          const std::int64_t x = dep.lo + static_cast<std::int64_t>(c);
          for (std::size_t s = 0; s < S; ++s) {
            Band& tgt = mu.bands[static_cast<std::size_t>(steps[s].dy)];
            tgt.p[static_cast<std::size_t>(x + steps[s].dx - tgt.lo)] += pc * row[s];
          }
        }
      }
      std::rotate(mu.bands.begin(), mu.bands.begin() + 1, mu.bands.end());
      mu.bands.pop_back();  // the retired departure band
      mu.level = level_ + 1;
    }
    ++level_;

    for (std::size_t i = 0; i < measures_.size(); ++i) {
      const double tot = measures_[i].total();
      const double floor = 1.0 - 10.0 * eps_ * static_cast<double>(level_) - 1e-12;
      if (tot < floor)
        throw MassLeak("level " + std::to_string(level_) + ": total mass " + std::to_string(tot));
    }
  }

 private:
  const double* row_base(std::int64_t x) const {
    const std::size_t S = rows_->row_size();
    for (std::size_t r = 0; r < intervals_.size(); ++r)
      if (x >= intervals_[r].first && x <= intervals_[r].second)
        return scratch_.data() + (offsets_[r] + static_cast<std::size_t>(x - intervals_[r].first)) * S;
    throw Error("internal: departure column outside fetched rows");
  }

  const RowSource* rows_;
  int K_;
  double eps_;
  std::int64_t level_ = 0;
  std::vector<QuenchedLevelMeasure> measures_;
  std::vector<double> dropped_;
  std::vector<Step> steps_;
  std::vector<std::pair<std::int64_t, std::int64_t>> intervals_;
  std::vector<std::size_t> offsets_;
  std::vector<double> scratch_;
};

}  // namespace rwre
