#include <filesystem>

#include "doctest.h"
#include "ruleforge/grammar.hpp"
#include "ruleforge/io.hpp"
#include "ruleforge/random_rule.hpp"

using namespace ruleforge;

namespace {

std::string format_error(auto&& fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("rules json") {
  const auto bare = parse_rules_json(R"j([{"id": "r1", "polarity": "pass", "text": "(dist_front < 5.0) and (ego_speed > 0)"},
                                         {"id": "f1", "polarity": "fail", "text": "dist_front > 10"}])j");
  REQUIRE(bare.size() == 2);
  CHECK(bare[0].polarity == Polarity::PassRule);
  CHECK(bare[1].polarity == Polarity::FailRule);
  CHECK(print_rule(bare[0].ast) == "(dist_front < 5) and (ego_speed > 0)");

  const std::string canonical = write_rules_json(bare);
  CHECK(parse_rules_json(canonical) == bare);
  CHECK(write_rules_json(parse_rules_json(canonical)) == canonical);

  const auto warn = format_error([] { parse_rules_json(R"([{"id": "r1", "polarity": "warn", "text": "a > 1"}])"); });
  CHECK(warn.find("rules[0].polarity") != std::string::npos);
  CHECK(warn.find("warn") != std::string::npos);

  CHECK(format_error([] { parse_rules_json(R"([{"id": "r1", "polarity": "pass"}])"); }).find("rules[0].text") !=
        std::string::npos);
  CHECK(format_error([] { parse_rules_json(R"([{"id": "r1", "polarity": "pass", "text": "a >"}])"); })
            .find("rules[0].text") != std::string::npos);
  CHECK(format_error([] {
          parse_rules_json(R"({"schema_version": 1, "rules": [{"id": "a", "polarity": "pass", "text": "x > 1"},
                                                              {"id": "a", "polarity": "fail", "text": "x < 1"}]})");
        }).find("duplicate") != std::string::npos);
  CHECK(format_error([] { parse_rules_json(R"({"schema_version": 7, "rules": []})"); }).find("schema_version") !=
        std::string::npos);
  CHECK(format_error([] { parse_rules_json("[\n{\"id\": }"); }).find("line 2") != std::string::npos);
}

TEST_CASE("ast interchange json round trip") {
  const RuleAst ast = parse_rule("(0 < ARG2 < 5) and (ARG1 / (ARG2 - 1) > 0.5) or (ARG1 != 3)");
  const std::string j = rule_ast_to_json(ast);
  CHECK(j.find("\"bin\"") != std::string::npos);
  CHECK(rule_ast_from_json(j) == ast);
  CHECK(format_error([] { rule_ast_from_json(R"({"or": []})"); }) != "");
  CHECK(format_error([] { rule_ast_from_json(R"({"or": [{"and": [{"lhs": {"var": "a"}, "op": "=~", "rhs": {"const": 1}}]}]})"); })
            .find("or[0].and[0].op") != std::string::npos);

  const OddSpec odd = default_driving_odd();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const RuleAst r = random_rule(seed, odd, 3, 3);
    CHECK(rule_ast_from_json(rule_ast_to_json(r)) == r);
  }
}

TEST_CASE("odd and oracle config json") {
  const OracleConfig c = default_oracle_config();
  const std::string text = write_oracle_config_json(c);
  CHECK(parse_oracle_config_json(text) == c);
  CHECK(write_oracle_config_json(parse_oracle_config_json(text)) == text);
  CHECK(parse_odd_json(write_odd_json(c.odd)) == c.odd);
  CHECK(parse_odd_json(R"([{"name": "a", "min": 0, "max": 1, "step": 0.5}])").size() == 1);
  CHECK(format_error([] { parse_odd_json(R"([{"name": "a", "min": 0, "max": 1, "step": 0}])"); }) != "");
  CHECK(format_error([] { parse_odd_json(R"([{"name": "a", "min": "x", "max": 1, "step": 1}])"); })
            .find("odd[0].min") != std::string::npos);
  CHECK(format_error([] {
          parse_oracle_config_json(
              R"({"odd": [{"name": "a", "min": 0, "max": 1, "step": 1}], "safe_region": "b > 0", "seed": 1})");
        }).find("safe_region") != std::string::npos);
}

TEST_CASE("evidence json reload over the fixture") {
  const Fixture fx = make_reference_fixture(42);
  SafetyOracle oracle(fx.config);
  const EvidenceFile e = build_evidence(fx.baseline_rule, fx.dataset.runs, oracle, fx.config.odd, {}, "fixture-42");
  REQUIRE(e.pairs.size() == 27);
  const std::string text = write_evidence_json(e);
  CHECK(parse_evidence_json(text) == e);
  CHECK(write_evidence_json(parse_evidence_json(text)) == text);
  CHECK(text.find("\"y\": \"Fail\"") != std::string::npos);
}

TEST_CASE("dataset csv round trip is byte-identical") {
  const Fixture fx = make_reference_fixture(7);
  const std::string csv = write_dataset_csv(fx.dataset);
  CHECK(write_dataset_csv(parse_dataset_csv(csv)) == csv);
}

TEST_CASE("outcome json round trip") {
  const Fixture fx = make_reference_fixture(42);
  SafetyOracle oracle(fx.config);
  const auto rules = fx.ruleset();

  DeterministicGenerator det;
  const RefineResult ok = refine_loop(fx.baseline_rule, rules, fx.dataset.runs, oracle, fx.config.odd, det);
  REQUIRE(std::holds_alternative<RefinementOutcome>(ok));
  const std::string text = write_outcome_json(fx.baseline_rule, ok);
  CHECK(text.find("\"status\": \"accepted\"") != std::string::npos);
  CHECK(text.find("\"dg_after\": 1.0") != std::string::npos);
  const RefineResult back = parse_outcome_json(text);
  REQUIRE(std::holds_alternative<RefinementOutcome>(back));
  CHECK(std::get<RefinementOutcome>(back).refined == std::get<RefinementOutcome>(ok).refined);
  CHECK(write_outcome_json(fx.baseline_rule, back) == text);

  MockGenerator bad({"[[('greater_than_func','ARG1','0')]]"});
  RefineOptions opt;
  opt.max_attempts = 2;
  const RefineResult ex = refine_loop(fx.baseline_rule, rules, fx.dataset.runs, oracle, fx.config.odd, bad, opt);
  REQUIRE(std::holds_alternative<Exhausted>(ex));
  const std::string etext = write_outcome_json(fx.baseline_rule, ex);
  CHECK(etext.find("\"status\": \"exhausted\"") != std::string::npos);
  const RefineResult eback = parse_outcome_json(etext);
  REQUIRE(std::holds_alternative<Exhausted>(eback));
  CHECK(std::get<Exhausted>(eback).reports.size() == 2);
  CHECK(write_outcome_json(fx.baseline_rule, eback) == etext);
}

TEST_CASE("metrics and decisiveness json") {
  const Fixture fx = make_reference_fixture(42);
  const auto m = compute_metrics(fx.baseline_rule, parse_rule("(dist_front < 4.1) and (ego_speed > 0)"), "",
                                 fx.dataset.runs, fx.config.odd);
  const std::string mj = write_metrics_json(m);
  CHECK(mj.find("\"schema_version\": 1") != std::string::npos);
  CHECK(mj.find("\"band\": \"Conservative\"") != std::string::npos);
  CHECK(mj.find("\"interpretability\": null") != std::string::npos);

  const RuleDecisiveness row{fx.baseline_rule.id, print_rule(fx.baseline_rule.ast), fx.baseline_rule.polarity,
                             decisiveness(fx.baseline_rule, fx.dataset.runs)};
  const std::string dj = write_decisiveness_json(std::span(&row, 1), "fixture");
  CHECK(dj.find("\"n_mismatch\": 27") != std::string::npos);
  CHECK(dj.find("\"n\": 198") != std::string::npos);
}

TEST_CASE("text files") {
  const auto dir = std::filesystem::temp_directory_path() / "ruleforge_io_test";
  std::filesystem::create_directories(dir);
  write_text_file(dir / "a.txt", "hello\n");
  CHECK(read_text_file(dir / "a.txt") == "hello\n");
  CHECK_FALSE(std::filesystem::exists(dir / "a.txt.tmp"));
  CHECK_THROWS_AS(read_text_file(dir / "missing.txt"), FormatError);
  std::filesystem::remove_all(dir);
}
