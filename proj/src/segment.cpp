#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "rwre/error.hpp"
#include "rwre/kernels.hpp"

namespace rwre {

double Pmf1D::mass() const noexcept {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

double Pmf1D::moment(int k) const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    s += p[i] * std::pow(static_cast<double>(lo + static_cast<std::int64_t>(i)), k);
  return s;
}

double Pmf1D::mean() const noexcept { return moment(1); }

double Pmf1D::variance() const noexcept {
  const double mu = mean();
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = static_cast<double>(lo + static_cast<std::int64_t>(i)) - mu;
    s += p[i] * d * d;
  }
  return s;
}

double Pmf1D::tail(std::int64_t k) const noexcept {
  double s = 0.0;
  for (std::int64_t x = std::max(k + 1, lo); x <= hi(); ++x) s += at(x);
  return s;
}

const char* to_string(SegmentMode mode) {
  switch (mode) {
    case SegmentMode::SharedMeeting:
      return "sharedEnvironmentMeeting";
    case SegmentMode::SharedNonMeeting:
      return "independentNonMeeting";
    case SegmentMode::IndependentEnvironments:
      return "independentEnvironments";
  }
  return "?";
}

namespace {

Pmf1D marginal(const std::map<std::pair<std::int64_t, std::int64_t>, double>& joint, bool first) {
  Pmf1D out;
  if (joint.empty()) return out;
  std::int64_t lo = INT64_MAX;
  std::int64_t hi = INT64_MIN;
  for (const auto& [key, p] : joint) {
    const std::int64_t v = first ? key.first : key.second;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  out.lo = lo;
  out.p.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (const auto& [key, p] : joint)
    out.p[static_cast<std::size_t>((first ? key.first : key.second) - lo)] += p;
  return out;
}

}  // namespace

Pmf1D SegmentLaw::dy_marginal() const { return marginal(joint, true); }
Pmf1D SegmentLaw::l_marginal() const { return marginal(joint, false); }

SegmentLaw segment_law(const EnvironmentLaw& law, SegmentMode mode, double tol,
                       std::int64_t maxLevels) {
  if (!(tol > 0.0 && tol <= 1e-8)) throw Error("segment tol must lie in (0, 1e-8]");
  const EnvMoments mo = compute_moments(law);
  const auto& steps = law.stepset.steps();
  const std::size_t S = steps.size();

  SegmentLaw out;
  out.mode = mode;
  // pending[h][(dx, d)]: lower walk at height h, d = hA - hB != 0.
  std::map<std::int64_t, std::map<std::pair<std::int64_t, std::int64_t>, double>> pending;

  for (std::size_t a = 0; a < S; ++a)
    for (std::size_t b = 0; b < S; ++b) {
      const double p = mode == SegmentMode::SharedMeeting ? mo.J_at(a, b) : mo.m[a] * mo.m[b];
      if (p == 0.0) continue;
      const std::int64_t dx = steps[a].dx - steps[b].dx;
      const std::int64_t d = steps[a].dy - steps[b].dy;
      if (d == 0)
        out.joint[{dx, steps[a].dy}] += p;
      else
        pending[std::min(steps[a].dy, steps[b].dy)][{dx, d}] += p;
    }

  double residual = 0.0;
  for (const auto& [h, states] : pending)
    for (const auto& [st, p] : states) residual += p;

  while (!pending.empty() && residual > 0.5 * tol) {
    auto node = pending.extract(pending.begin());
    const std::int64_t h = node.key();
    if (h > maxLevels)
      throw ConvergenceError("segment race did not absorb within " + std::to_string(maxLevels) +
                                 " levels",
                             residual);
    for (const auto& [st, p] : node.mapped()) {
      const auto [dx, d] = st;
      const std::int64_t ad = std::abs(d);
      residual -= p;
      for (std::size_t s = 0; s < S; ++s) {
        const double pm = p * mo.m[s];
        if (pm == 0.0) continue;
        const std::int64_t g = steps[s].dy - ad;
        const std::int64_t ndx = d < 0 ? dx + steps[s].dx : dx - steps[s].dx;
        const std::int64_t nd = d < 0 ? g : -g;
        if (g == 0) {
          out.joint[{ndx, h + ad}] += pm;
        } else {
          pending[h + std::min<std::int64_t>(steps[s].dy, ad)][{ndx, nd}] += pm;
          residual += pm;
        }
      }
    }
  }
  out.truncatedMass = std::max(0.0, residual);
  return out;
}

std::vector<double> meeting_probabilities(const EnvironmentLaw& law, std::int64_t dx0,
                                          std::int64_t dh0, std::int64_t levels,
                                          double truncEps) {
  if (dh0 < 0) return meeting_probabilities(law, -dx0, -dh0, levels, truncEps);
  const EnvMoments mo = compute_moments(law);
  const auto& steps = law.stepset.steps();
  const std::size_t S = steps.size();
  const int K = law.stepset.K();
  const std::size_t O = static_cast<std::size_t>(std::max<std::int64_t>(K - 1, dh0) + 1);
  const std::size_t cell = O * O;
  auto idx = [&](std::size_t col, std::size_t oA, std::size_t oB) {
    return col * cell + oA * O + oB;
  };

  std::int64_t lo = dx0;
  std::vector<double> cur(cell, 0.0);
  cur[idx(0, 0, static_cast<std::size_t>(dh0))] = 1.0;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(levels + 1));
  std::vector<double> next;

  for (std::int64_t k = 0;; ++k) {
    const std::size_t width = cur.size() / cell;
    out.push_back(0 >= lo && 0 < lo + static_cast<std::int64_t>(width)
                      ? cur[idx(static_cast<std::size_t>(-lo), 0, 0)]
                      : 0.0);
    if (k == levels) break;

    const std::int64_t nlo = lo - 2 * K;
    const std::size_t nwidth = width + 4 * static_cast<std::size_t>(K);
    next.assign(nwidth * cell, 0.0);
    auto put = [&](std::int64_t dx, std::size_t oA, std::size_t oB, double p) {
      next[idx(static_cast<std::size_t>(dx - nlo), oA, oB)] += p;
    };
    for (std::size_t c = 0; c < width; ++c) {
      const std::int64_t dx = lo + static_cast<std::int64_t>(c);
      for (std::size_t oA = 0; oA < O; ++oA)
        for (std::size_t oB = 0; oB < O; ++oB) {
          const double p = cur[idx(c, oA, oB)];
          if (p == 0.0) continue;
          if (oA > 0 && oB > 0) {
            put(dx, oA - 1, oB - 1, p);
          } else if (oA == 0 && oB > 0) {
            for (std::size_t s = 0; s < S; ++s)
              if (mo.m[s] != 0.0)
                put(dx - steps[s].dx, static_cast<std::size_t>(steps[s].dy - 1), oB - 1, p * mo.m[s]);
          } else if (oA > 0 && oB == 0) {
            for (std::size_t s = 0; s < S; ++s)
              if (mo.m[s] != 0.0)
                put(dx + steps[s].dx, oA - 1, static_cast<std::size_t>(steps[s].dy - 1), p * mo.m[s]);
          } else {
            for (std::size_t a = 0; a < S; ++a)
              for (std::size_t b = 0; b < S; ++b) {
                const double w = dx == 0 ? mo.J_at(a, b) : mo.m[a] * mo.m[b];
                if (w == 0.0) continue;
                put(dx + steps[b].dx - steps[a].dx, static_cast<std::size_t>(steps[a].dy - 1),
                    static_cast<std::size_t>(steps[b].dy - 1), p * w);
              }
          }
        }
    }

    // Trim columns whose cumulative mass from either edge stays below eps/2.
    std::vector<double> colMass(nwidth, 0.0);
    for (std::size_t c = 0; c < nwidth; ++c)
      for (std::size_t j = 0; j < cell; ++j) colMass[c] += next[c * cell + j];
    std::size_t left = 0;
    double drop = 0.0;
    while (left + 1 < nwidth && drop + colMass[left] <= 0.5 * truncEps) drop += colMass[left++];
    std::size_t right = nwidth;
    drop = 0.0;
    while (right > left + 1 && drop + colMass[right - 1] <= 0.5 * truncEps) drop += colMass[--right];
    cur.assign(next.begin() + static_cast<std::ptrdiff_t>(left * cell),
               next.begin() + static_cast<std::ptrdiff_t>(right * cell));
    lo = nlo + static_cast<std::int64_t>(left);
  }
  return out;
}

}  // namespace rwre
