#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ruleforge/counterfactual.hpp"
#include "ruleforge/odd.hpp"
#include "ruleforge/semantics.hpp"

namespace ruleforge {

// Synthetic ground truth: a run passes iff `safe_region` holds on its input.
struct OracleConfig {
  OddSpec odd;
  RuleAst safe_region;
  std::uint64_t seed = 42;

  friend bool operator==(const OracleConfig&, const OracleConfig&) = default;
};

class OutOfDomain : public RuleError {
 public:
  using RuleError::RuleError;
};

class ConstructionFailure : public RuleError {
 public:
  using RuleError::RuleError;
};

// ego_speed [0,30] step 0.5, dist_front [0,50] step 0.2, lane_offset [-2,2] step 0.1.
OddSpec default_driving_odd();
// Safe region "(dist_front < 4.05) and (ego_speed > 0) or (ego_speed == 0)".
OracleConfig default_oracle_config();

// Throws RuleError if the safe region is not vocabulary-clean for the ODD.
void validate(const OracleConfig& config);

// Throws OutOfDomain when x misses an ODD variable or leaves its range.
Outcome oracle_label(const OracleConfig& config, const Binding& x);

class SafetyOracle final : public Oracle {
 public:
  explicit SafetyOracle(OracleConfig config);
  Outcome query(const Binding& x) override;
  bool shareable() const override { return true; }
  const OracleConfig& config() const { return config_; }

 private:
  OracleConfig config_;
};

// Grid points drawn uniformly per feature (uniform over the snapped ODD box),
// labeled by the oracle.
Dataset sample_dataset(const OracleConfig& config, std::size_t n, std::uint64_t seed);

struct Fixture {
  Dataset dataset;
  PolarizedRule baseline_rule;
  std::vector<PolarizedRule> historical;  // consistent rules kept alongside the baseline
  std::size_t expected_mismatches = 27;
  OracleConfig config;

  std::vector<PolarizedRule> ruleset() const;
};

inline constexpr std::size_t kFixtureRuns = 198;
inline constexpr std::size_t kFixtureMismatches = 27;

// 198 runs against the pass rule "(dist_front < 5.0) and (ego_speed > 0)":
// exactly 27 drawn where the rule holds but the oracle says Fail, the rest
// where it is consistent or inconclusive, shuffled by seed.
Fixture make_reference_fixture(std::uint64_t seed);

}  // namespace ruleforge
