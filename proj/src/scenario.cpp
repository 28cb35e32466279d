#include "ruleforge/scenario.hpp"

#include "ruleforge/grammar.hpp"
#include "ruleforge/rng.hpp"
#include "ruleforge/vocabulary.hpp"

namespace ruleforge {

OddSpec default_driving_odd() {
  return OddSpec({{"ego_speed", 0.0, 30.0, 0.5}, {"dist_front", 0.0, 50.0, 0.2}, {"lane_offset", -2.0, 2.0, 0.1}});
}

OracleConfig default_oracle_config() {
  return {default_driving_odd(), parse_rule("(dist_front < 4.05) and (ego_speed > 0) or (ego_speed == 0)"), 42};
}

void validate(const OracleConfig& config) {
  validate(config.safe_region);
  auto violations = check_vocabulary(config.safe_region, config.odd);
  if (!violations.empty()) throw RuleError("safe region is not vocabulary-clean: " + summarize(violations));
}

Outcome oracle_label(const OracleConfig& config, const Binding& x) {
  for (const auto& var : config.odd.variables()) {
    auto it = x.find(var.name);
    if (it == x.end()) throw OutOfDomain("input misses ODD variable '" + var.name + "'");
    if (it->second < var.min || it->second > var.max)
      throw OutOfDomain("input " + var.name + "=" + format_number(it->second) + " outside [" +
                        format_number(var.min) + ", " + format_number(var.max) + "]");
  }
  return evaluate(config.safe_region, x) ? Outcome::Pass : Outcome::Fail;
}

SafetyOracle::SafetyOracle(OracleConfig config) : config_(std::move(config)) { validate(config_); }

Outcome SafetyOracle::query(const Binding& x) { return oracle_label(config_, x); }

namespace {

std::vector<std::string> feature_names(const OddSpec& odd) {
  std::vector<std::string> out;
  for (const auto& v : odd.variables()) out.push_back(v.name);
  return out;
}

// Uniform grid point whose per-feature index lies in [lo[i], hi[i]].
Binding draw_point(Rng& rng, const OddSpec& odd, const std::vector<std::int64_t>& lo,
                   const std::vector<std::int64_t>& hi) {
  Binding x;
  for (std::size_t i = 0; i < odd.size(); ++i) {
    const auto& var = odd.variables()[i];
    x[var.name] = grid_value(var, rng.between(lo[i], hi[i]));
  }
  return x;
}

void full_ranges(const OddSpec& odd, std::vector<std::int64_t>& lo, std::vector<std::int64_t>& hi) {
  lo.assign(odd.size(), 0);
  hi.clear();
  for (const auto& var : odd.variables()) hi.push_back(grid_count(var) - 1);
}

}  // namespace

Dataset sample_dataset(const OracleConfig& config, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw RuleError("sample_dataset needs n >= 1");
  validate(config);
  Rng rng(seed);
  std::vector<std::int64_t> lo, hi;
  full_ranges(config.odd, lo, hi);
  Dataset ds;
  ds.features = feature_names(config.odd);
  ds.runs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Binding x = draw_point(rng, config.odd, lo, hi);
    const Outcome y = oracle_label(config, x);
    ds.runs.push_back({std::move(x), y});
  }
  return ds;
}

std::vector<PolarizedRule> Fixture::ruleset() const {
  std::vector<PolarizedRule> out{baseline_rule};
  out.insert(out.end(), historical.begin(), historical.end());
  return out;
}

Fixture make_reference_fixture(std::uint64_t seed) {
  Fixture fx;
  fx.config = default_oracle_config();
  fx.config.seed = seed;
  fx.baseline_rule = {"r1", Polarity::PassRule, parse_rule("(dist_front < 5.0) and (ego_speed > 0)")};
  fx.historical = {
      {"h_pass_close", Polarity::PassRule, parse_rule("(dist_front < 2) and (ego_speed > 0)")},
      {"h_fail_far", Polarity::FailRule, parse_rule("(dist_front > 10) and (ego_speed > 0)")},
      {"h_fail_mid", Polarity::FailRule, parse_rule("(dist_front > 6) and (ego_speed >= 1)")},
  };
  fx.expected_mismatches = kFixtureMismatches;

  const OddSpec& odd = fx.config.odd;
  Rng rng(seed);
  auto is_mismatch = [&](const Binding& x) {
    return evaluate(fx.baseline_rule.ast, x) && oracle_label(fx.config, x) == Outcome::Fail;
  };

  std::vector<std::int64_t> lo, hi;
  full_ranges(odd, lo, hi);
  // Mismatch stratum: dist_front in [4.05, 5.0), where the baseline admits
  // inputs the oracle fails.
  std::vector<std::int64_t> mlo = lo, mhi = hi;
  const auto dist = *odd.index_of("dist_front");
  const OddVariable& dist_var = odd.variables()[dist];
  mlo[dist] = -1;
  for (std::int64_t i = 0; i < grid_count(dist_var); ++i) {
    const double v = grid_value(dist_var, i);
    if (v >= 4.05 && v < 5.0) {
      if (mlo[dist] < 0) mlo[dist] = i;
      mhi[dist] = i;
    }
  }
  if (mlo[dist] < 0) throw ConstructionFailure("ODD grid has no dist_front point in [4.05, 5.0)");

  constexpr int kMaxAttempts = 1'000'000;
  std::vector<LabeledRun> runs;
  int attempts = 0;
  while (runs.size() < kFixtureMismatches) {
    if (++attempts > kMaxAttempts) throw ConstructionFailure("cannot fill the mismatch stratum");
    Binding x = draw_point(rng, odd, mlo, mhi);
    if (!is_mismatch(x)) continue;
    runs.push_back({std::move(x), Outcome::Fail});
  }
  attempts = 0;
  while (runs.size() < kFixtureRuns) {
    if (++attempts > kMaxAttempts) throw ConstructionFailure("cannot fill the consistent/inconclusive stratum");
    Binding x = draw_point(rng, odd, lo, hi);
    if (is_mismatch(x)) continue;
    const Outcome y = oracle_label(fx.config, x);
    runs.push_back({std::move(x), y});
  }
  for (std::size_t i = runs.size(); i > 1; --i) {
    std::swap(runs[i - 1], runs[rng.below(i)]);
  }

  fx.dataset.features = feature_names(odd);
  fx.dataset.runs = std::move(runs);
  const auto report = decisiveness(fx.baseline_rule, fx.dataset.runs);
  if (report.n != kFixtureRuns || report.n_mismatch != kFixtureMismatches)
    throw ConstructionFailure("fixture invariant violated: " + std::to_string(report.n_mismatch) + " mismatches");
  return fx;
}

}  // namespace ruleforge
