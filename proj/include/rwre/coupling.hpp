#pragma once

// Two walks stepping independently in one environment, observed at the
// levels both of them hit exactly (common levels).

#include <cstdint>
#include <utility>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/rng.hpp"

namespace rwre {

/// (X~ - X at the k-th crossings, min overshoot).
struct ZState {
  std::int64_t dx = 0;
  std::int64_t dh = 0;       // in -(K-1)..K-1
  std::int64_t minOver = 0;  // in 0..K-1
  friend bool operator==(const ZState&, const ZState&) = default;
};

struct CouplingTrace {
  std::int64_t baseLevel = 0;  // min of the start heights; phi and zStates are indexed from here
  std::vector<std::int64_t> commonLevels;
  std::vector<std::int64_t> Y;  // X . e1 - X~ . e1 at each common level
  std::vector<std::uint8_t> meetFlags;
  std::vector<std::int64_t> Q;  // Delta L after meeting levels
  std::vector<std::int64_t> R;  // Delta L after non-meeting common levels
  std::vector<std::int64_t> phi;  // phi[l - baseLevel] = #meeting levels <= l
  std::vector<ZState> zStates;    // zStates[k - baseLevel], when requested

  // Shared-row instrumentation, when requested.
  std::int64_t sharedDepartures = 0;
  std::int64_t sharedRowMismatches = 0;

  std::int64_t phi_at(std::int64_t level) const;
};

struct PairOptions {
  bool recordZ = false;
  bool instrument = false;
};

/// Runs both walks until each has crossed maxLevel. The lower walk steps next,
/// ties go to walk A. Starts may sit at different heights (X_{lambda_l} := X_0
/// for levels at or below the start height).
CouplingTrace simulate_pair(const Environment& env, Site startA, Site startB,
                            std::int64_t maxLevel, CounterRng& rngA, CounterRng& rngB,
                            PairOptions opts = {});

/// (Q, R) recomputed from the common levels and meeting flags.
std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>> extract_QR(const CouplingTrace& t);

/// |X_[0,n] cap X~_[0,n]| for n = maxSteps steps of each walk.
std::int64_t intersection_count(const Environment& env, Site startA, Site startB,
                                std::int64_t maxSteps, CounterRng& rngA, CounterRng& rngB);

/// Same count for every n in nList, read off one pair of paths.
std::vector<std::int64_t> intersection_counts(const Environment& env, Site startA, Site startB,
                                              const std::vector<std::int64_t>& nList,
                                              CounterRng& rngA, CounterRng& rngB);

struct SegmentSample {
  std::int64_t L1 = 0;  // first common level above 0
  std::int64_t dY = 0;  // Y_1 - Y_0
};

/// First segment of two walks started at (0,0) in envA and (dx,0) in envB.
/// Pass the same environment twice for the shared-environment chain.
SegmentSample first_segment(const Environment& envA, const Environment& envB, std::int64_t dx,
                            CounterRng& rngA, CounterRng& rngB, std::int64_t cap = 1 << 20);

}  // namespace rwre
