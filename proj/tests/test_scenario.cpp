#include <cmath>

#include "doctest.h"
#include "ruleforge/counterfactual.hpp"
#include "ruleforge/grammar.hpp"
#include "ruleforge/scenario.hpp"

using namespace ruleforge;

TEST_CASE("oracle_label: worked points and domain guard") {
  const auto cfg = default_oracle_config();
  CHECK(oracle_label(cfg, {{"ego_speed", 8.0}, {"dist_front", 4.0}, {"lane_offset", 0.1}}) == Outcome::Pass);
  CHECK(oracle_label(cfg, {{"ego_speed", 8.0}, {"dist_front", 4.2}, {"lane_offset", 0.1}}) == Outcome::Fail);
  CHECK(oracle_label(cfg, {{"ego_speed", 0.0}, {"dist_front", 40}, {"lane_offset", 0}}) == Outcome::Pass);
  CHECK_THROWS_AS(oracle_label(cfg, {{"ego_speed", 31.0}, {"dist_front", 4.0}, {"lane_offset", 0.1}}), OutOfDomain);
  CHECK_THROWS_AS(oracle_label(cfg, {{"ego_speed", 1.0}, {"dist_front", 4.0}}), OutOfDomain);
}

TEST_CASE("oracle config must be vocabulary-clean") {
  auto cfg = default_oracle_config();
  cfg.safe_region = parse_rule("ARG9 > 1");
  CHECK_THROWS_AS(validate(cfg), RuleError);
  CHECK_THROWS_AS(SafetyOracle{cfg}, RuleError);
}

TEST_CASE("sample_dataset: determinism and labels") {
  const auto cfg = default_oracle_config();
  const auto a = sample_dataset(cfg, 198, 42);
  CHECK(a == sample_dataset(cfg, 198, 42));
  CHECK_FALSE(a == sample_dataset(cfg, 198, 43));
  for (const auto& run : a.runs) CHECK(run.y == oracle_label(cfg, run.x));
  const auto one = sample_dataset(cfg, 1, 7);
  REQUIRE(one.runs.size() == 1);
  CHECK(one.runs[0].y == oracle_label(cfg, one.runs[0].x));
  CHECK_THROWS_AS(sample_dataset(cfg, 0, 1), RuleError);
}

TEST_CASE("sample_dataset: pass frequency matches the safe-region grid fraction within 3 sigma") {
  const auto cfg = default_oracle_config();
  // Exact pass probability under uniform grid sampling, by enumerating the
  // (ego_speed, dist_front) grid; lane_offset does not affect the label.
  const auto& ego = *cfg.odd.find("ego_speed");
  const auto& dist = *cfg.odd.find("dist_front");
  std::size_t safe = 0, total = 0;
  for (std::int64_t i = 0; i < grid_count(ego); ++i) {
    for (std::int64_t j = 0; j < grid_count(dist); ++j) {
      const double e = grid_value(ego, i), d = grid_value(dist, j);
      safe += ((d < 4.05 && e > 0) || e == 0) ? 1 : 0;
      ++total;
    }
  }
  const double p = static_cast<double>(safe) / static_cast<double>(total);
  const std::size_t n = 10000;
  const auto ds = sample_dataset(cfg, n, 2024);
  std::size_t passes = 0;
  for (const auto& run : ds.runs) passes += run.y == Outcome::Pass ? 1 : 0;
  const double sigma = std::sqrt(static_cast<double>(n) * p * (1 - p));
  CHECK(std::fabs(static_cast<double>(passes) - static_cast<double>(n) * p) <= 3 * sigma);
}

TEST_CASE("make_reference_fixture: exact mismatch profile for many seeds") {
  for (std::uint64_t seed : {1ULL, 7ULL, 42ULL, 99ULL, 12345ULL}) {
    const Fixture fx = make_reference_fixture(seed);
    CHECK(fx.dataset.runs.size() == 198);
    const auto rep = decisiveness(fx.baseline_rule, fx.dataset.runs);
    CHECK(rep.n_mismatch == 27);
    for (const auto& run : fx.dataset.runs) CHECK(run.y == oracle_label(fx.config, run.x));
    for (const auto& h : fx.historical) CHECK(decisiveness(h, fx.dataset.runs).n_mismatch == 0);
  }
  CHECK(write_dataset_csv(make_reference_fixture(42).dataset) == write_dataset_csv(make_reference_fixture(42).dataset));
}

TEST_CASE("make_reference_fixture: every mismatch has a counterfactual within 20 steps") {
  const Fixture fx = make_reference_fixture(42);
  SafetyOracle oracle(fx.config);
  for (std::size_t i : decisiveness(fx.baseline_rule, fx.dataset.runs).mismatches) {
    const auto& run = fx.dataset.runs[i];
    auto result = search_counterfactual(run.x, run.y, oracle, fx.config.odd, {20, 1'000'000});
    CHECK(std::holds_alternative<CounterfactualPair>(result));
  }
}
