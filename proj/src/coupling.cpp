#include "rwre/coupling.hpp"

#include <algorithm>
#include <unordered_map>

#include "rwre/error.hpp"
#include "rwre/walk.hpp"

namespace rwre {

namespace {

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept {
    return static_cast<std::size_t>(
        mix64(static_cast<std::uint64_t>(s.x) ^ (static_cast<std::uint64_t>(s.y) << 32)));
  }
};

// One walk plus its level records from baseLevel up to maxLevel.
struct Runner {
  Site pos;
  std::vector<Site> rec;
  std::int64_t base;
  std::int64_t maxLevel;

  Runner(Site start, std::int64_t base, std::int64_t maxLevel)
      : pos(start), base(base), maxLevel(maxLevel) {
    rec.reserve(static_cast<std::size_t>(maxLevel - base + 1));
    for (std::int64_t l = base; l <= std::min(start.y, maxLevel); ++l) rec.push_back(start);
  }
  bool done() const { return pos.y >= maxLevel; }
  void move(const Step& z) {
    pos.x += z.dx;
    pos.y += z.dy;
    for (std::int64_t l = base + static_cast<std::int64_t>(rec.size()); l <= std::min(pos.y, maxLevel); ++l)
      rec.push_back(pos);
  }
};

}  // namespace

std::int64_t CouplingTrace::phi_at(std::int64_t level) const {
  if (level < baseLevel) return 0;
  const auto i = static_cast<std::size_t>(level - baseLevel);
  return i < phi.size() ? phi[i] : (phi.empty() ? 0 : phi.back());
}

CouplingTrace simulate_pair(const Environment& env, Site startA, Site startB,
                            std::int64_t maxLevel, CounterRng& rngA, CounterRng& rngB,
                            PairOptions opts) {
  const std::int64_t base = std::min(startA.y, startB.y);
  if (maxLevel < std::max(startA.y, startB.y))
    throw Error("maxLevel must be at least the higher start height");
  const auto& steps = env.law().stepset.steps();
  std::vector<double> row(env.row_size());
  Runner a(startA, base, maxLevel);
  Runner b(startB, base, maxLevel);
  std::unordered_map<Site, std::vector<double>, SiteHash> usedA;
  std::unordered_map<Site, std::vector<double>, SiteHash> usedB;

  CouplingTrace t;
  t.baseLevel = base;
  while (!a.done() || !b.done()) {
    const bool stepA = !a.done() && (b.done() || a.pos.y <= b.pos.y);
    Runner& w = stepA ? a : b;
    env.row_at(w.pos, row);
    if (opts.instrument) {
      auto& mine = stepA ? usedA : usedB;
      auto& other = stepA ? usedB : usedA;
      if (auto it = other.find(w.pos); it != other.end()) {
        ++t.sharedDepartures;
        if (it->second != row) ++t.sharedRowMismatches;
      }
      mine.emplace(w.pos, row);
    }
    CounterRng& rng = stepA ? rngA : rngB;
    w.move(steps[sample_step(row, rng.uniform())]);
  }

  const std::size_t levels = static_cast<std::size_t>(maxLevel - base + 1);
  t.phi.assign(levels, 0);
  if (opts.recordZ) t.zStates.resize(levels);
  std::int64_t meetings = 0;
  for (std::size_t i = 0; i < levels; ++i) {
    const std::int64_t l = base + static_cast<std::int64_t>(i);
    const Site& xa = a.rec[i];
    const Site& xb = b.rec[i];
    if (opts.recordZ)
      t.zStates[i] = {xb.x - xa.x, xb.y - xa.y, std::min(xa.y, xb.y) - l};
    if (xa.y == l && xb.y == l) {
      t.commonLevels.push_back(l);
      t.Y.push_back(xa.x - xb.x);
      const bool meet = xa.x == xb.x;
      t.meetFlags.push_back(meet ? 1 : 0);
      meetings += meet ? 1 : 0;
    }
    t.phi[i] = meetings;
  }
  std::tie(t.Q, t.R) = extract_QR(t);
  return t;
}

std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>> extract_QR(const CouplingTrace& t) {
  std::vector<std::int64_t> Q;
  std::vector<std::int64_t> R;
  for (std::size_t j = 0; j + 1 < t.commonLevels.size(); ++j) {
    const std::int64_t dL = t.commonLevels[j + 1] - t.commonLevels[j];
    (t.meetFlags[j] ? Q : R).push_back(dL);
  }
  return {std::move(Q), std::move(R)};
}

namespace {

std::vector<Site> sample_path(const Environment& env, Site start, std::int64_t steps,
                              CounterRng& rng) {
  const auto& set = env.law().stepset.steps();
  std::vector<double> row(env.row_size());
  std::vector<Site> path;
  path.reserve(static_cast<std::size_t>(steps + 1));
  path.push_back(start);
  for (std::int64_t k = 0; k < steps; ++k) {
    env.row_at(path.back(), row);
    const Step& z = set[sample_step(row, rng.uniform())];
    path.push_back({path.back().x + z.dx, path.back().y + z.dy});
  }
  return path;
}

}  // namespace

std::vector<std::int64_t> intersection_counts(const Environment& env, Site startA, Site startB,
                                              const std::vector<std::int64_t>& nList,
                                              CounterRng& rngA, CounterRng& rngB) {
  if (nList.empty()) return {};
  const std::int64_t nMax = *std::max_element(nList.begin(), nList.end());
  if (nList.front() < 1 || *std::min_element(nList.begin(), nList.end()) < 1)
    throw Error("step counts must be >= 1");
  const auto pa = sample_path(env, startA, nMax, rngA);
  const auto pb = sample_path(env, startB, nMax, rngB);
  std::vector<std::int64_t> out;
  for (std::int64_t n : nList) {
    // Heights strictly increase along each path, so a merge by height suffices.
    const std::size_t end = static_cast<std::size_t>(n) + 1;
    std::int64_t count = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < end && j < end) {
      if (pa[i].y < pb[j].y) {
        ++i;
      } else if (pb[j].y < pa[i].y) {
        ++j;
      } else {
        count += pa[i].x == pb[j].x ? 1 : 0;
        ++i;
        ++j;
      }
    }
    out.push_back(count);
  }
  return out;
}

std::int64_t intersection_count(const Environment& env, Site startA, Site startB,
                                std::int64_t maxSteps, CounterRng& rngA, CounterRng& rngB) {
  if (maxSteps < 1) throw Error("maxSteps must be >= 1");
  return intersection_counts(env, startA, startB, {maxSteps}, rngA, rngB).front();
}

SegmentSample first_segment(const Environment& envA, const Environment& envB, std::int64_t dx,
                            CounterRng& rngA, CounterRng& rngB, std::int64_t cap) {
  const auto& steps = envA.law().stepset.steps();
  std::vector<double> row(envA.row_size());
  Site a{0, 0};
  Site b{dx, 0};
  while (true) {
    const bool stepA = a.y <= b.y;
    Site& w = stepA ? a : b;
    (stepA ? envA : envB).row_at(w, row);
    const Step& z = steps[sample_step(row, (stepA ? rngA : rngB).uniform())];
    w.x += z.dx;
    w.y += z.dy;
    if (a.y == b.y) return {a.y, (a.x - b.x) + dx};
    if (std::min(a.y, b.y) > cap) throw ConvergenceError("no common level below cap", 0.0);
  }
}

}  // namespace rwre
