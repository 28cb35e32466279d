#pragma once

#include <cstdint>

#include "ruleforge/ast.hpp"
#include "ruleforge/odd.hpp"

namespace ruleforge {

// Deterministic for a given seed; constants are drawn from the ODD grid so
// the result is vocabulary-clean. Requires a non-empty ODD and limits >= 1.
RuleAst random_rule(std::uint64_t seed, const OddSpec& odd, int max_disjuncts, int max_relations);

}  // namespace ruleforge
