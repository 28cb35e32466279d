#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ruleforge/ast.hpp"
#include "ruleforge/counterfactual.hpp"
#include "ruleforge/odd.hpp"
#include "ruleforge/rng.hpp"
#include "ruleforge/semantics.hpp"

namespace testsupport {

using namespace ruleforge;

// Calls fn(binding) for every grid point of the ODD; stops early when fn
// returns true. Returns whether it stopped early.
template <typename Fn>
bool for_each_grid_point(const OddSpec& odd, Fn&& fn) {
  std::vector<std::int64_t> idx(odd.size(), 0);
  Binding x;
  while (true) {
    for (std::size_t i = 0; i < odd.size(); ++i) x[odd.variables()[i].name] = grid_value(odd.variables()[i], idx[i]);
    if (fn(static_cast<const Binding&>(x))) return true;
    std::size_t i = 0;
    while (i < odd.size() && ++idx[i] == grid_count(odd.variables()[i])) idx[i++] = 0;
    if (i == odd.size()) return false;
  }
}

// Bound relations whose real-valued and grid-valued satisfiability agree:
// lower bounds sit a quarter step below a grid point, upper bounds a quarter
// step above, equalities on grid points. Strictness and orientation vary.
inline Relation grid_aligned_relation(Rng& rng, const OddSpec& odd) {
  const OddVariable& v = odd.variables()[rng.below(odd.size())];
  const double g = grid_value(v, rng.between(0, grid_count(v) - 1));
  RelOp op;
  double c;
  switch (rng.below(5)) {
    case 0: op = RelOp::Gt; c = g - v.step / 4; break;
    case 1: op = RelOp::Ge; c = g - v.step / 4; break;
    case 2: op = RelOp::Lt; c = g + v.step / 4; break;
    case 3: op = RelOp::Le; c = g + v.step / 4; break;
    default: op = RelOp::Eq; c = g; break;
  }
  if (rng.chance(0.3)) return {Expr::constant(c), mirrored(op), Expr::variable(v.name)};
  return {Expr::variable(v.name), op, Expr::constant(c)};
}

inline RuleAst grid_aligned_rule(Rng& rng, const OddSpec& odd, int max_disjuncts, int max_relations) {
  RuleAst ast;
  const auto nd = rng.between(1, max_disjuncts);
  for (std::int64_t d = 0; d < nd; ++d) {
    Conjunct conj;
    const auto nr = rng.between(1, max_relations);
    for (std::int64_t r = 0; r < nr; ++r) conj.push_back(grid_aligned_relation(rng, odd));
    ast.disjuncts.push_back(std::move(conj));
  }
  return ast;
}

inline bool grid_satisfiable(const RuleAst& a, const RuleAst& b, const OddSpec& odd) {
  return for_each_grid_point(odd, [&](const Binding& x) { return evaluate(a, x) && evaluate(b, x); });
}

// Minimum step-L1 distance from x to a grid point with a different label,
// by exhaustive enumeration; INT_MAX if none within max_radius.
inline int brute_force_min_steps(const OddSpec& odd, const Binding& x, Outcome y, Oracle& oracle, int max_radius) {
  int best = std::numeric_limits<int>::max();
  for_each_grid_point(odd, [&](const Binding& p) {
    int dist = 0;
    for (const auto& v : odd.variables()) {
      dist += static_cast<int>(std::llround(std::fabs(p.at(v.name) - x.at(v.name)) / v.step));
    }
    if (dist > 0 && dist <= max_radius && oracle.query(p) != y) best = std::min(best, dist);
    return false;
  });
  return best;
}

// Small random instance: 1-3 features, at most 5 steps each, and a linear
// threshold oracle.
struct MinimalityInstance {
  OddSpec odd;
  std::vector<double> weights;
  double threshold = 0;
  Binding x;

  Outcome label(const Binding& p) const {
    double s = 0;
    for (std::size_t d = 0; d < weights.size(); ++d) s += weights[d] * p.at(odd.variables()[d].name);
    return s < threshold ? Outcome::Pass : Outcome::Fail;
  }
};

inline MinimalityInstance minimality_instance(std::uint64_t seed) {
  Rng rng(seed);
  MinimalityInstance inst;
  const auto dims = rng.between(1, 3);
  std::vector<OddVariable> vars;
  for (std::int64_t d = 0; d < dims; ++d) {
    const double step = rng.below(2) == 0 ? 1.0 : 0.5;
    vars.push_back({"f" + std::to_string(d), 0.0, step * static_cast<double>(rng.between(1, 5)), step});
    inst.weights.push_back(static_cast<double>(rng.between(-3, 3)));
  }
  inst.odd = OddSpec(vars);
  inst.threshold = static_cast<double>(rng.between(-4, 8)) + 0.25;
  for (const auto& v : inst.odd.variables()) inst.x[v.name] = grid_value(v, rng.between(0, grid_count(v) - 1));
  return inst;
}

}  // namespace testsupport
