#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "ruleforge/grammar.hpp"
#include "ruleforge/random_rule.hpp"
#include "ruleforge/semantics.hpp"

using namespace ruleforge;

namespace {

const Binding kX1{{"ego_speed", 8.0}, {"dist_front", 4.2}, {"lane_offset", 0.1}};

PolarizedRule rule(const char* id, Polarity p, const char* text) { return {id, p, parse_rule(text)}; }

}  // namespace

TEST_CASE("evaluate: worked example") {
  CHECK(evaluate(parse_rule("(dist_front < 5.0) and (ego_speed > 0)"), kX1));
  CHECK_FALSE(evaluate(parse_rule("(dist_front < 4.1) and (ego_speed > 0)"), kX1));
}

TEST_CASE("evaluate: division by zero is false with a diagnostic") {
  std::vector<std::string> diags;
  CHECK_FALSE(evaluate(parse_rule("(ARG1 / ARG2 > 1)"), Binding{{"ARG1", 3}, {"ARG2", 0}}, kDefaultEpsEq, &diags));
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].find("division by zero") != std::string::npos);
  // A later disjunct can still hold.
  CHECK(evaluate(parse_rule("(ARG1 / ARG2 > 1) or (ARG1 > 2)"), Binding{{"ARG1", 3}, {"ARG2", 0}}));
}

TEST_CASE("evaluate: equality tolerance") {
  const auto eq = parse_rule("x == 0.3");
  CHECK(evaluate(eq, Binding{{"x", 0.1 + 0.2}}));
  CHECK_FALSE(evaluate(eq, Binding{{"x", 0.31}}));
  CHECK(evaluate(eq, Binding{{"x", 0.31}}, 0.02));
  CHECK(evaluate(parse_rule("x != 0.3"), Binding{{"x", 0.31}}));
  CHECK_FALSE(evaluate(parse_rule("x != 0.3"), Binding{{"x", 0.1 + 0.2}}));
}

TEST_CASE("evaluate: unbound variable is an error even when short-circuit would skip it") {
  CHECK_THROWS_AS(evaluate(parse_rule("(a > 0) or (b > 0)"), Binding{{"a", 1}}), UnboundVariable);
  CHECK_THROWS_AS(evaluate(parse_rule("(a > 0) and (b > 0)"), Binding{{"a", -1}}), UnboundVariable);
}

TEST_CASE("classify_consistency: the six table rows, exhaustively") {
  // (polarity, holds, y) -> expected
  const auto holds = parse_rule("x > 0");
  const Binding on{{"x", 1}}, off{{"x", -1}};
  struct Row {
    Polarity p;
    bool holds;
    Outcome y;
    Consistency expected;
  };
  const Row rows[] = {
      {Polarity::PassRule, true, Outcome::Pass, Consistency::Consistent},
      {Polarity::FailRule, true, Outcome::Pass, Consistency::Inconsistent},
      {Polarity::PassRule, true, Outcome::Fail, Consistency::Inconsistent},
      {Polarity::FailRule, true, Outcome::Fail, Consistency::Consistent},
      {Polarity::PassRule, false, Outcome::Pass, Consistency::Inconclusive},
      {Polarity::PassRule, false, Outcome::Fail, Consistency::Inconclusive},
      {Polarity::FailRule, false, Outcome::Pass, Consistency::Inconclusive},
      {Polarity::FailRule, false, Outcome::Fail, Consistency::Inconclusive},
  };
  for (const auto& row : rows) {
    const PolarizedRule r{"r", row.p, holds};
    CHECK(classify_consistency(r, {row.holds ? on : off, row.y}) == row.expected);
  }
}

TEST_CASE("decisiveness") {
  const auto r = rule("r", Polarity::PassRule, "x > 0");
  std::vector<LabeledRun> data;
  for (int i = 0; i < 198; ++i) data.push_back({{{"x", i < 27 ? 1.0 : -1.0}}, i < 27 ? Outcome::Fail : Outcome::Pass});
  auto rep = decisiveness(r, data);
  CHECK(rep.n == 198);
  CHECK(rep.n_mismatch == 27);
  CHECK(rep.dg == doctest::Approx(1.0 - 27.0 / 198.0));
  CHECK(rep.dg == doctest::Approx(0.8636).epsilon(1e-4));
  CHECK(rep.mismatches.size() == 27);
  CHECK(std::is_sorted(rep.mismatches.begin(), rep.mismatches.end()));

  SUBCASE("never-holding rule is vacuously decisive and flagged") {
    auto vac = decisiveness(rule("v", Polarity::PassRule, "x > 5"), data);
    CHECK(vac.n_mismatch == 0);
    CHECK(vac.dg == 1.0);
    CHECK(vac.n_inconclusive == 198);
    CHECK(vac.fully_inconclusive);
  }
  SUBCASE("zero mismatches") {
    auto ok = decisiveness(rule("f", Polarity::FailRule, "x > 0"), data);
    CHECK(ok.dg == 1.0);
    CHECK(ok.mismatches.empty());
  }
  CHECK_THROWS_AS(decisiveness(r, std::vector<LabeledRun>{}), EmptyDataset);
}

TEST_CASE("ruleset_decisiveness averages rules with a definitive verdict") {
  std::vector<LabeledRun> data = {{{{"x", 1}}, Outcome::Pass}, {{{"x", 2}}, Outcome::Fail}};
  std::vector<PolarizedRule> rules = {rule("a", Polarity::PassRule, "x > 0"), rule("b", Polarity::PassRule, "x > 9")};
  CHECK(*ruleset_decisiveness(rules, data) == doctest::Approx(0.5));
  rules.pop_back();
  rules[0] = rule("a", Polarity::PassRule, "x > 9");
  CHECK_FALSE(ruleset_decisiveness(rules, data).has_value());
}

TEST_CASE("property: dg bounds and monotonic tightening") {
  const OddSpec odd({{"a", 0, 4, 1}, {"b", 0, 4, 1}});
  std::vector<LabeledRun> data;
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; b <= 4; ++b) data.push_back({{{"a", a}, {"b", b}}, (a + b) % 3 == 0 ? Outcome::Fail : Outcome::Pass});

  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const RuleAst base = random_rule(seed, odd, 2, 2);
    const RuleAst extra = random_rule(seed + 1000, odd, 1, 2);
    // base AND extra implies base: add extra's relations to every disjunct.
    RuleAst tighter = base;
    for (auto& conj : tighter.disjuncts) conj.insert(conj.end(), extra.disjuncts[0].begin(), extra.disjuncts[0].end());
    // Confirm implication by grid enumeration before relying on it.
    bool implies = true;
    for (const auto& run : data) implies &= !evaluate(tighter, run.x) || evaluate(base, run.x);
    REQUIRE(implies);

    const auto loose = decisiveness({"p", Polarity::PassRule, base}, data);
    const auto tight = decisiveness({"p", Polarity::PassRule, tighter}, data);
    CHECK(loose.dg >= 0.0);
    CHECK(loose.dg <= 1.0);
    CHECK((loose.dg == 1.0) == loose.mismatches.empty());
    CHECK(std::includes(loose.mismatches.begin(), loose.mismatches.end(), tight.mismatches.begin(),
                        tight.mismatches.end()));
    // Determinism under reordering: reversing the dataset mirrors the indices.
    std::vector<LabeledRun> reversed(data.rbegin(), data.rend());
    const auto rev = decisiveness({"p", Polarity::PassRule, base}, reversed);
    CHECK(rev.n_mismatch == loose.n_mismatch);
  }
}

TEST_CASE("dataset CSV") {
  const std::string text = "a,b,outcome\n1,2.5,Pass\n-0.1,0,Fail\n";
  auto ds = parse_dataset_csv(text);
  CHECK(ds.features == std::vector<std::string>{"a", "b"});
  REQUIRE(ds.runs.size() == 2);
  CHECK(ds.runs[1].x.at("a") == -0.1);
  CHECK(ds.runs[1].y == Outcome::Fail);
  CHECK(write_dataset_csv(ds) == text);
  CHECK(parse_dataset_csv("a,outcome\r\n1,Pass\r\n") == parse_dataset_csv("a,outcome\n1,Pass\n"));
  CHECK(dataset_digest(ds) == dataset_digest(parse_dataset_csv(text)));
  CHECK(dataset_digest(ds).starts_with("fnv1a64:"));

  auto expect_error = [](const std::string& bad, const std::string& fragment) {
    try {
      parse_dataset_csv(bad);
      FAIL("expected FormatError for " << bad);
    } catch (const FormatError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, e.what());
    }
  };
  expect_error("", "header");
  expect_error("a,b\n1,2\n", "outcome");
  expect_error("a,outcome\n1,Maybe\n", "line 2");
  expect_error("a,outcome\nx,Pass\n", "column 'a'");
  expect_error("a,outcome\n1,2,Pass\n", "expected 2 fields");
  expect_error("a,a,outcome\n1,2,Pass\n", "duplicate");
}
