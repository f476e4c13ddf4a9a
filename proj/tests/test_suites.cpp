#include <doctest.h>

#include "rwre/suites.hpp"

using namespace rwre;

namespace {

void check_all_pass(const std::vector<Report>& reps) {
  for (const auto& r : reps) {
    INFO(r.test << " statistic=" << r.statistic << " predicted=" << r.predicted << " " << r.note);
    CHECK(r.pass);
  }
}

}  // namespace

TEST_CASE("REF1 constants are exact") {
  const auto c = constants(reference_law_k1());
  CHECK(reference_constants_exact(c).pass);
  // A different law must fail the same check.
  CHECK(!reference_constants_exact(constants(reference_law_k2())).pass);
}

TEST_CASE("potential kernel checks") {
  CHECK(simple_walk_potential().pass);
  const auto c = constants(reference_law_k1());
  CHECK(spitzer_asymptote(c.aBar, 50, 0.02).pass);
  CHECK(!spitzer_asymptote(c.aBar, 1, 0.02).pass);
}

TEST_CASE("beta identity and Green checks on REF1") {
  const auto c = constants(reference_law_k1());
  const LimitFunction lim(c);
  CHECK(beta_identity(c, 300).pass);
  CHECK(green_local_limit(c, 4000, 0.03).pass);
  CHECK(green_limit(c, lim, 4000, 0.0, 0.05).pass);
  CHECK(green_limit(c, lim, 4000, 0.5, 0.05).pass);
  CHECK(green_uniform(c, {100, 1000}, 0.02).pass);
  CHECK(y_chain_clt(c, 2048).pass);
}

TEST_CASE("limit-function and mode checks") {
  const auto law = reference_law_k2();
  CHECK(mode_consistency(law, 1e-12).pass);
  CHECK(h_properties(LimitFunction(constants(law))).pass);
}

TEST_CASE("Monte Carlo constant cross-validation (small)") {
  const auto law = reference_law_k1();
  check_all_pass(kernel_crossvalidation(law, constants(law), 20000, 3, Tolerances{}));
}

TEST_CASE("L level laws (small)") {
  const auto law = reference_law_k2();
  check_all_pass(l_level_laws(law, constants(law), 3000, 100000, 5, Tolerances{}));
}

TEST_CASE("degenerate ladder") {
  const auto r = degenerate_ladder();
  INFO(r.note);
  CHECK(r.pass);
}

TEST_CASE("kernels suite on REF1") {
  ExperimentConfig cfg;
  cfg.law = reference_law_k1();
  const auto out = run_suite(cfg, "kernels");
  REQUIRE(out.constants.has_value());
  CHECK(!out.ensemble.has_value());
  CHECK(!out.reports.empty());
  check_all_pass(out.reports);
}

TEST_CASE("degenerate law skips the kernels suite") {
  ExperimentConfig cfg;
  cfg.law = point_mass_law(1, {1, 1});
  const auto out = run_suite(cfg, "kernels");
  CHECK(!out.constants.has_value());
  REQUIRE(out.reports.size() == 1);
  CHECK(out.reports[0].skipped);
}

TEST_CASE("unknown suite") {
  ExperimentConfig cfg;
  cfg.law = reference_law_k1();
  CHECK_THROWS_AS(run_suite(cfg, "everything"), ConfigError);
}
