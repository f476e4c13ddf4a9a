#include <doctest.h>

#include <cmath>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/error.hpp"
#include "rwre/rng.hpp"
#include "rwre/stats.hpp"
#include "rwre/walk.hpp"

using namespace rwre;

namespace {

// Monte Carlo mean of X_{lambda_k} over `walks` paths in one environment.
std::vector<stats::Moments> mc_crossings(const Environment& env, Site start, std::int64_t maxLevel,
                                         int walks, std::uint64_t seed) {
  std::vector<std::vector<double>> x(static_cast<std::size_t>(maxLevel) + 1);
  for (int w = 0; w < walks; ++w) {
    CounterRng rng(stream_key(seed, static_cast<std::uint64_t>(w)));
    const auto rec = simulate_walk(env, start, maxLevel, rng);
    x[0].push_back(static_cast<double>(start.x));
    for (const auto& r : rec) x[static_cast<std::size_t>(r.level)].push_back(static_cast<double>(r.position.x));
  }
  std::vector<stats::Moments> out;
  for (const auto& v : x) out.push_back(stats::moments(v));
  return out;
}

}  // namespace

TEST_CASE("degenerate law walks straight up") {
  const Environment env(point_mass_law(1, {0, 1}), 1);
  CounterRng rng(3);
  std::vector<Site> path;
  const auto rec = simulate_walk(env, {5, 0}, 10, rng, &path);
  REQUIRE(rec.size() == 10);
  for (std::size_t k = 0; k < rec.size(); ++k) {
    CHECK(rec[k].level == static_cast<std::int64_t>(k + 1));
    CHECK(rec[k].lambda == static_cast<std::int64_t>(k + 1));
    CHECK(rec[k].position == Site{5, static_cast<std::int64_t>(k + 1)});
  }
  CHECK(path.front() == Site{5, 0});
}

TEST_CASE("K = 1 hits every level") {
  const Environment env(reference_law_k1(), 8);
  CounterRng rng(9);
  const auto rec = simulate_walk(env, {0, 0}, 200, rng);
  for (const auto& r : rec) {
    CHECK(r.lambda == r.level);
    CHECK(r.position.y == r.level);
  }
}

TEST_CASE("overshoot bound and monotone crossing times") {
  for (int K : {2, 3}) {
    std::vector<double> alpha(static_cast<std::size_t>((2 * K + 1) * K), 1.0);
    const Environment env(dirichlet_law(K, alpha), 11);
    for (int w = 0; w < 50; ++w) {
      CounterRng rng(stream_key(12, static_cast<std::uint64_t>(w)));
      const auto rec = simulate_walk(env, {0, 0}, 300, rng);
      for (std::size_t i = 0; i < rec.size(); ++i) {
        const auto over = rec[i].position.y - rec[i].level;
        CHECK(over >= 0);
        CHECK(over <= K - 1);
        if (i > 0) CHECK(rec[i].lambda >= rec[i - 1].lambda);
      }
    }
  }
}

TEST_CASE("REF1 mean horizontal displacement is 0 over environments") {
  const auto law = reference_law_k1();
  std::vector<double> dx;
  for (int w = 0; w < 100000; ++w) {
    const Environment env(law, stream_key(77, static_cast<std::uint64_t>(w)));
    CounterRng rng(stream_key(78, static_cast<std::uint64_t>(w)));
    dx.push_back(static_cast<double>(simulate_walk(env, {3, 0}, 20, rng).back().position.x - 3));
  }
  const auto m = stats::moments(dx);
  CHECK(std::abs(m.mean) <= 4 * m.seMean);
}

TEST_CASE("profile of the degenerate law is a moving point mass") {
  const Environment env(point_mass_law(1, {0, 1}), 1);
  const auto prof = quenched_crossing_profile(env, {0, 0}, 20);
  REQUIRE(prof.size() == 21);
  for (std::size_t k = 0; k < prof.size(); ++k) {
    CHECK(prof[k].level == static_cast<std::int64_t>(k));
    CHECK(prof[k].prob({0, static_cast<std::int64_t>(k)}) == 1.0);
    CHECK(prof[k].hitMass() == 1.0);
  }
}

TEST_CASE("K = 1 profile lives on the level itself") {
  const Environment env(reference_law_k1(), 4);
  const auto prof = quenched_crossing_profile(env, {2, 0}, 60);
  for (const auto& mu : prof) {
    CHECK(mu.hitMass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mu.bands.size() == 1);
  }
}

TEST_CASE("profile mass conservation and support width") {
  std::vector<double> alpha(10, 0.7);
  const auto law = dirichlet_law(2, alpha);
  const Environment env(law, 5);
  const double eps = 1e-14;
  const auto prof = quenched_crossing_profile(env, {0, 0}, 200, eps);
  for (const auto& mu : prof) {
    const double tot = mu.total();
    CHECK(tot <= 1.0 + 1e-12);
    CHECK(tot >= 1.0 - 10 * eps * static_cast<double>(mu.level) - 1e-12);
    for (std::size_t j = 0; j < mu.bands.size(); ++j) {
      const auto& b = mu.bands[j];
      if (b.empty()) continue;
      CHECK(b.hi() - b.lo + 1 <= 2 * 2 * (mu.level + 1) + 1);
      for (double p : b.p) CHECK(p >= 0.0);
    }
  }
  CHECK_THROWS_AS(quenched_crossing_profile(env, {0, 0}, 10, 1e-6), Error);
}

TEST_CASE("exact profile matches Monte Carlo in a fixed environment") {
  struct Case {
    EnvironmentLaw law;
    std::uint64_t seed;
  };
  const std::vector<Case> cases = {{reference_law_k1(), 31}, {reference_law_k2(), 32},
                                   {dirichlet_law(2, std::vector<double>(10, 0.5)), 33}};
  for (const auto& c : cases) {
    const Environment env(c.law, c.seed);
    const std::int64_t L = 40;
    const auto prof = quenched_crossing_profile(env, {0, 0}, L);
    const auto mc = mc_crossings(env, {0, 0}, L, 200000, c.seed + 1000);
    for (std::int64_t k : {1, 10, 25, 40}) {
      const double exact = prof[static_cast<std::size_t>(k)].mean()[0];
      const auto& m = mc[static_cast<std::size_t>(k)];
      CHECK(std::abs(m.mean - exact) <= 4 * m.seMean);
    }
  }
}

TEST_CASE("exact mean matches Monte Carlo for 20 random (law, seed) pairs") {
  int failures = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    CounterRng pick(stream_key(500, i));
    const int K = 1 + static_cast<int>(pick() % 2);
    std::vector<double> alpha(static_cast<std::size_t>((2 * K + 1) * K));
    for (double& a : alpha) a = 0.3 + 2.0 * pick.uniform();
    const Environment env(dirichlet_law(K, alpha), stream_key(501, i));
    const std::int64_t L = 30;
    const auto series = quenched_crossing_profile(env, {0, 0}, L);
    const auto mc = mc_crossings(env, {0, 0}, L, 100000, stream_key(502, i));
    if (std::abs(mc[L].mean - series[L].mean()[0]) > 4 * mc[L].seMean) ++failures;
  }
  // 4 SE per case: a single miss among 20 is already a 1-in-800 event.
  CHECK(failures == 0);
}

TEST_CASE("level index and start column conventions") {
  CHECK(level_index(0.1, 10) == 1);
  CHECK(level_index(0.3, 10) == 3);
  CHECK(level_index(0.5, 1024) == 512);
  CHECK(level_index(1.0, 7) == 7);
  CHECK(start_column(0.5, 1024) == 16);
  CHECK(start_column(0.0, 1024) == 0);
  CHECK(start_column(-0.5, 1024) == -16);
  CHECK(start_column(0.3, 100) == 3);
}

TEST_CASE("mean series conventions") {
  const std::vector<double> s{0.0, 0.25, 0.5, 1.0};
  SUBCASE("degenerate law") {
    const auto law = point_mass_law(1, {0, 1});
    const Environment env(law, 1);
    const auto q = quenched_mean_series(env, 0.5, 64, s);
    const auto a = averaged_mean(law, 0.5, 64, s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(q.points[i].e1 == 4.0);
      CHECK(a.points[i].e1 == q.points[i].e1);
      CHECK(a.points[i].U == q.points[i].U);
      CHECK(xi(env, law, s[i], 0.5, 64) == 0.0);
    }
  }
  SUBCASE("K = 1 visits") {
    const Environment env(reference_law_k1(), 3);
    const auto q = quenched_mean_series(env, 0.0, 100, s);
    for (const auto& p : q.points) {
      // E U_{m} = m + 1 with m = level - 1.
      CHECK(p.U == doctest::Approx(static_cast<double>(p.level)).epsilon(1e-12));
      CHECK(p.e2 == doctest::Approx(static_cast<double>(p.level)).epsilon(1e-12));
    }
  }
  SUBCASE("s = 0 gives xi = 0") {
    const auto law = reference_law_k2();
    const Environment env(law, 6);
    CHECK(xi(env, law, 0.0, 0.3, 256) == 0.0);
  }
  SUBCASE("height bracket") {
    const auto law = reference_law_k2();
    const Environment env(law, 6);
    const auto q = quenched_mean_series(env, 0.0, 300, s);
    for (const auto& p : q.points) {
      CHECK(p.e2 >= static_cast<double>(p.level) - 1e-9);
      CHECK(p.e2 <= static_cast<double>(p.level + 2) + 1e-9);
    }
  }
}

TEST_CASE("averaged mean identity E X.e1 = start + E(D.e1) E U") {
  const std::vector<EnvironmentLaw> laws = {
      reference_law_k1(), reference_law_k2(),
      dirichlet_law(2, {3, 1, 0.5, 1, 2, 0.4, 0.4, 1, 2, 5}), dirichlet_law(1, {2.0, 1.0, 0.5})};
  const std::vector<double> s{0.1, 0.5, 1.0};
  for (const auto& law : laws) {
    const auto mo = compute_moments(law);
    for (double r : {0.0, 0.7}) {
      const auto a = averaged_mean(law, r, 400, s);
      for (const auto& p : a.points)
        CHECK(std::abs(p.e1 - static_cast<double>(a.start.x) - mo.meanDrift[0] * p.U) <= 1e-9);
    }
  }
  // REF1 has no drift.
  const auto a = averaged_mean(reference_law_k1(), 0.5, 256, s);
  for (const auto& p : a.points) CHECK(p.e1 == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("joint sweep equals separate sweeps") {
  const auto law = reference_law_k2();
  const Environment env(law, 40);
  const std::vector<double> r{0.0, 0.3, 0.8};
  const std::vector<double> s{0.25, 1.0};
  const auto joint = mean_series(env, r, 200, s);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto single = quenched_mean_series(env, r[i], 200, s);
    for (std::size_t j = 0; j < s.size(); ++j) {
      CHECK(joint[i].points[j].e1 == single.points[j].e1);
      CHECK(joint[i].points[j].U == single.points[j].U);
    }
  }
}

TEST_CASE("quenched mean series matches Monte Carlo for REF1") {
  const auto law = reference_law_k1();
  const Environment env(law, 2718);
  const std::int64_t n = 100;
  const std::vector<double> s{0.25, 0.5, 1.0};
  const auto q = quenched_mean_series(env, 0.0, n, s);
  const auto mc = mc_crossings(env, {0, 0}, n, 400000, 2719);
  for (const auto& p : q.points) {
    const auto& m = mc[static_cast<std::size_t>(p.level)];
    CHECK(std::abs(m.mean - p.e1) <= 4 * m.seMean);
  }
}

TEST_CASE("xi scale sanity for REF1 at n = 256") {
  const auto law = reference_law_k1();
  int within = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const Environment env(law, stream_key(9000, i));
    if (std::abs(xi(env, law, 1.0, 0.0, 256)) <= 10.0 * std::pow(256.0, 0.25)) ++within;
  }
  CHECK(within >= 990);
}
