#include "ruleforge/random_rule.hpp"

#include "ruleforge/rng.hpp"

namespace ruleforge {

namespace {

const OddVariable& pick_variable(Rng& rng, const OddSpec& odd) {
  return odd.variables()[rng.below(odd.size())];
}

double pick_grid_value(Rng& rng, const OddVariable& var) {
  return grid_value(var, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(grid_count(var)))));
}

RelOp pick_relop(Rng& rng) { return kAllRelOps[rng.below(6)]; }

Relation random_relation(Rng& rng, const OddSpec& odd) {
  const auto roll = rng.below(20);
  const OddVariable& var = pick_variable(rng, odd);
  const RelOp op = pick_relop(rng);
  if (roll < 12) {
    return {Expr::variable(var.name), op, Expr::constant(pick_grid_value(rng, var))};
  }
  if (roll < 15) {
    return {Expr::constant(pick_grid_value(rng, var)), op, Expr::variable(var.name)};
  }
  if (roll < 18) {
    const auto aop = static_cast<ArithOp>(rng.below(4));
    double operand = pick_grid_value(rng, var);
    if (aop == ArithOp::Div && operand == 0.0) operand = 1.0;
    Expr lhs = Expr::binary(aop, Expr::variable(var.name), Expr::constant(operand));
    return {lhs, op, Expr::constant(pick_grid_value(rng, var))};
  }
  const OddVariable& other = pick_variable(rng, odd);
  return {Expr::variable(var.name), op, Expr::variable(other.name)};
}

}  // namespace

RuleAst random_rule(std::uint64_t seed, const OddSpec& odd, int max_disjuncts, int max_relations) {
  if (odd.size() == 0) throw RuleError("random_rule needs a non-empty ODD");
  if (max_disjuncts < 1 || max_relations < 1) throw RuleError("random_rule limits must be >= 1");
  Rng rng(seed);
  RuleAst ast;
  const auto n_disj = rng.between(1, max_disjuncts);
  for (std::int64_t d = 0; d < n_disj; ++d) {
    Conjunct conj;
    const auto n_rel = rng.between(1, max_relations);
    for (std::int64_t r = 0; r < n_rel; ++r) conj.push_back(random_relation(rng, odd));
    ast.disjuncts.push_back(std::move(conj));
  }
  return ast;
}

}  // namespace ruleforge
