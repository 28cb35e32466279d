#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "ruleforge/grammar.hpp"
#include "ruleforge/random_rule.hpp"
#include "ruleforge/semantics.hpp"
#include "ruleforge/vocabulary.hpp"

using namespace ruleforge;

namespace {

OddSpec driving_odd() {
  return OddSpec({{"ego_speed", 0, 30, 0.5}, {"dist_front", 0, 50, 0.2}, {"lane_offset", -2, 2, 0.1}});
}

std::size_t count_kind(const std::vector<Token>& toks, TokenKind kind) {
  return static_cast<std::size_t>(
      std::count_if(toks.begin(), toks.end(), [&](const Token& t) { return t.kind == kind; }));
}

std::string strip_ws(std::string_view s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

}  // namespace

TEST_CASE("tokenize: simple relation") {
  auto toks = tokenize("ARG1 > 0");
  REQUIRE(toks.size() == 3);
  CHECK(toks[0] == Token{TokenKind::Ident, "ARG1", 0, 4});
  CHECK(toks[1] == Token{TokenKind::RelOp, ">", 5, 6});
  CHECK(toks[2] == Token{TokenKind::Number, "0", 7, 8});
}

TEST_CASE("tokenize: worked rule has eleven tokens and no garbage") {
  auto toks = tokenize("(dist_front < 5.0) and (ego_speed > 0)");
  CHECK(toks.size() == 11);
  CHECK(count_kind(toks, TokenKind::Garbage) == 0);
  CHECK(toks[3].lexeme == "5.0");
  CHECK(toks[5].kind == TokenKind::LogOp);
}

TEST_CASE("tokenize: tuple-list text yields garbage runs") {
  auto toks = tokenize("[[('greater_than_func','ARG1','0')]]");
  CHECK(count_kind(toks, TokenKind::Garbage) == 6);
  CHECK(toks.front().lexeme == "[[");
  CHECK(toks.back().lexeme == "]]");
  CHECK(count_kind(toks, TokenKind::Ident) == 2);
}

TEST_CASE("tokenize: logical aliases and keyword case") {
  auto toks = tokenize("a>1 AND b<2 && c<3 \xE2\x88\xA7 d>0 Or e>1 || f>2 \xE2\x88\xA8 g>3");
  CHECK(count_kind(toks, TokenKind::LogOp) == 6);
  CHECK(count_kind(toks, TokenKind::Garbage) == 0);
}

TEST_CASE("tokenize: lone symbols become garbage, never abort") {
  for (std::string_view s : {"&", "|", "=", "!", "5.", "#$%", "\xFF\xFE", "a = b", ""}) {
    CHECK_NOTHROW(tokenize(s));
  }
  auto toks = tokenize("a = b");
  REQUIRE(toks.size() == 3);
  CHECK(toks[1].kind == TokenKind::Garbage);
}

TEST_CASE("tokenize: spans are ordered and reconstruct the input modulo whitespace") {
  const OddSpec odd = driving_odd();
  std::vector<std::string> corpus = {"[[('greater_than_func','ARG1','0')]]", "```\nx>1\n```",
                                     "(a<=b)&&!c", "  1.5e3 >= foo_bar\t or"};
  for (std::uint64_t seed = 0; seed < 50; ++seed) corpus.push_back(print_rule(random_rule(seed, odd, 3, 3)));
  for (const auto& text : corpus) {
    auto toks = tokenize(text);
    std::string joined;
    std::size_t last_end = 0;
    for (const auto& t : toks) {
      CHECK(t.begin >= last_end);
      CHECK(t.end > t.begin);
      CHECK(text.substr(t.begin, t.end - t.begin) == t.lexeme);
      last_end = t.end;
      joined += t.lexeme;
    }
    CHECK(joined == strip_ws(text));
  }
}

TEST_CASE("parse_rule: worked rule") {
  auto ast = parse_rule("(dist_front < 5.0) and (ego_speed > 0)");
  REQUIRE(ast.disjuncts.size() == 1);
  REQUIRE(ast.disjuncts[0].size() == 2);
  const Relation& first = ast.disjuncts[0][0];
  CHECK(first.lhs == Expr::variable("dist_front"));
  CHECK(first.op == RelOp::Lt);
  CHECK(first.rhs == Expr::constant(5.0));
}

TEST_CASE("parse_rule: chained format exemplar desugars") {
  auto ast = parse_rule("(0 < ARG2 < 5) and (ARG1 > 0) or (8 < ARG2 < 12)");
  REQUIRE(ast.disjuncts.size() == 2);
  CHECK(ast.disjuncts[0].size() == 3);
  CHECK(ast.disjuncts[1].size() == 2);
  CHECK(ast.disjuncts[0][1] == Relation{Expr::variable("ARG2"), RelOp::Lt, Expr::constant(5)});
}

TEST_CASE("parse_rule: precedence") {
  auto ast = parse_rule("a + b * 2 > c - 1 - 2 or x > 1 and y > 2");
  REQUIRE(ast.disjuncts.size() == 2);
  const Relation& rel = ast.disjuncts[0][0];
  REQUIRE(rel.lhs.is_binary());
  CHECK(rel.lhs.op() == ArithOp::Add);
  CHECK(rel.lhs.rhs().op() == ArithOp::Mul);
  // left-associative: (c - 1) - 2
  CHECK(rel.rhs.op() == ArithOp::Sub);
  CHECK(rel.rhs.lhs().op() == ArithOp::Sub);
  CHECK(ast.disjuncts[1].size() == 2);
}

TEST_CASE("parse_rule: parenthesized arithmetic vs logical grouping") {
  auto ast = parse_rule("(ARG1 + 1) * 2 > 3 and ((ARG2 > 0))");
  REQUIRE(ast.disjuncts.size() == 1);
  REQUIRE(ast.disjuncts[0].size() == 2);
  CHECK(ast.disjuncts[0][0].lhs.op() == ArithOp::Mul);
  auto grouped = parse_rule("((a > 1) or (b > 2)) or c > 3");
  CHECK(grouped.disjuncts.size() == 3);
}

TEST_CASE("parse_rule: negative literals") {
  auto ast = parse_rule("lane_offset > -1.5 and x - -2 < 3");
  CHECK(ast.disjuncts[0][0].rhs == Expr::constant(-1.5));
  CHECK(ast.disjuncts[0][1].lhs.rhs() == Expr::constant(-2));
}

TEST_CASE("parse_rule: errors") {
  SUBCASE("dangling operator reports end of input") {
    try {
      parse_rule("ARG1 >");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset() == 6);
      CHECK(e.found() == "end of input");
      CHECK(std::find(e.expected().begin(), e.expected().end(), "identifier") != e.expected().end());
    }
  }
  SUBCASE("tuple-list text") {
    CHECK_THROWS_AS(parse_rule("[[('greater_than_func','ARG1','0')]]"), ParseError);
    CHECK_THROWS_AS(parse_rule("[('greater_than_func','ARG1','0')]"), ParseError);
  }
  SUBCASE("doubled connective") {
    try {
      parse_rule("(ARG1 > 0) and and (ARG2 > 3)");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.token_index() == 6);
    }
  }
  SUBCASE("disjunction under conjunction is outside the grammar") {
    CHECK_THROWS_AS(parse_rule("(a > 1 or b > 2) and c > 3"), ParseError);
  }
  SUBCASE("misc") {
    for (std::string_view bad : {"", "ARG1", "ARG1 > 0 ARG2", "(ARG1 > 0", "ARG1 > 0)", "a = 1", "> 3",
                                 "a > 1 or", "-a > 1", "a > 1e5"}) {
      CHECK_THROWS_AS(parse_rule(bad), ParseError);
    }
  }
}

TEST_CASE("print_rule: canonical forms") {
  CHECK(print_rule(parse_rule("(dist_front < 5.0) and (ego_speed > 0)")) ==
        "(dist_front < 5) and (ego_speed > 0)");
  CHECK(print_rule(parse_rule("(0 < ARG2 < 5) and (ARG1 > 0) or (8 < ARG2 < 12)")) ==
        "((0 < ARG2) and (ARG2 < 5) and (ARG1 > 0)) or ((8 < ARG2) and (ARG2 < 12))");
  CHECK(print_rule(parse_rule("ARG2 > 5")) == "(ARG2 > 5)");
  CHECK(print_rule(parse_rule("a - (b - c) > a * (b + 1) / 2 OR x >= 0.10")) ==
        "(a - (b - c) > a * (b + 1) / 2) or (x >= 0.1)");
}

TEST_CASE("property: print/parse round trip and grammar closure over random rules") {
  const OddSpec odd = driving_odd();
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const RuleAst ast = random_rule(seed, odd, 3, 4);
    CHECK_NOTHROW(validate(ast));
    const std::string text = print_rule(ast);
    CHECK(parse_rule(text) == ast);
    auto toks = tokenize(text);
    CHECK(count_kind(toks, TokenKind::Garbage) == 0);
    CHECK(check_vocabulary(ast, odd).empty());
  }
}

TEST_CASE("random_rule: determinism and limits") {
  const OddSpec odd = driving_odd();
  CHECK(random_rule(1, odd, 2, 3) == random_rule(1, odd, 2, 3));
  bool any_different = false;
  for (std::uint64_t s = 2; s < 10; ++s) any_different |= !(random_rule(s, odd, 2, 3) == random_rule(1, odd, 2, 3));
  CHECK(any_different);
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto ast = random_rule(s, odd, 2, 3);
    CHECK(ast.disjuncts.size() <= 2);
    for (const auto& c : ast.disjuncts) CHECK(c.size() <= 3);
  }
  CHECK_THROWS_AS(random_rule(1, odd, 0, 3), RuleError);
}

TEST_CASE("desugaring soundness by grid enumeration") {
  const auto chained = parse_rule("1 < x <= 3");
  const auto explicit_form = parse_rule("(1 < x) and (x <= 3)");
  const auto chained3 = parse_rule("0 <= x < y < 4");
  const auto explicit3 = parse_rule("(0 <= x) and (x < y) and (y < 4)");
  for (int i = -10; i <= 50; ++i) {
    for (int j = -10; j <= 50; j += 3) {
      Binding b{{"x", i * 0.1}, {"y", j * 0.1}};
      CHECK(evaluate(chained, b) == evaluate(explicit_form, b));
      CHECK(evaluate(chained3, b) == evaluate(explicit3, b));
    }
  }
}

TEST_CASE("check_vocabulary") {
  const OddSpec odd = driving_odd();
  CHECK(check_vocabulary(parse_rule("(dist_front < 5.0) and (ego_speed > 0)"), odd).empty());

  const OddSpec args({{"ARG1", 0, 10, 1}, {"ARG2", 0, 20, 1}});
  auto unknown = check_vocabulary(parse_rule("(ARG1 > 0) and (ARG3 < 4)"), args);
  REQUIRE(unknown.size() == 1);
  CHECK(unknown[0].message() == "UnknownVariable ARG3");
  CHECK(unknown[0].relation == 1);

  auto range = check_vocabulary(parse_rule("(dist_front < 120)"), odd);
  REQUIRE(range.size() == 1);
  CHECK(range[0].kind == ViolationKind::OutOfRangeBound);
  CHECK(range[0].subject == "120");

  // Mirrored form and compound expressions.
  CHECK(check_vocabulary(parse_rule("(-3 < lane_offset)"), odd).size() == 1);
  CHECK(check_vocabulary(parse_rule("(lane_offset * 100 < 120)"), odd).empty());

  const RelOp strict_only[] = {RelOp::Lt, RelOp::Gt};
  auto ops = check_vocabulary(parse_rule("(ego_speed >= 1) and (ego_speed < 3)"), odd, strict_only);
  REQUIRE(ops.size() == 1);
  CHECK(ops[0].kind == ViolationKind::DisallowedOperator);
}

TEST_CASE("OddSpec invariants") {
  CHECK_THROWS_AS(OddSpec({{"a", 0, 1, 0.1}, {"a", 0, 1, 0.1}}), RuleError);
  CHECK_THROWS_AS(OddSpec({{"a", 2, 1, 0.1}}), RuleError);
  CHECK_THROWS_AS(OddSpec({{"a", 0, 1, 0}}), RuleError);
  CHECK_THROWS_AS(OddSpec({{"1a", 0, 1, 1}}), RuleError);
  const OddVariable lane{"lane_offset", -2, 2, 0.1};
  CHECK(grid_count(lane) == 41);
  CHECK(grid_value(lane, 21) == 0.1);
  CHECK(grid_count({"d", 0, 50, 0.2}) == 251);
  CHECK(format_number(5.0) == "5");
  CHECK(format_number(4.1) == "4.1");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(0.30000000000000004) == "0.30000000000000004");
  CHECK(decimal_places(0.2) == 1);
  CHECK(decimal_places(0.05) == 2);
  CHECK(decimal_places(1) == 0);
}
