#include "ruleforge/vocabulary.hpp"

#include <algorithm>

namespace ruleforge {

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::UnknownVariable: return "UnknownVariable";
    case ViolationKind::OutOfRangeBound: return "OutOfRangeBound";
    case ViolationKind::DisallowedOperator: return "DisallowedOperator";
  }
  return "?";
}

std::string VocabularyViolation::message() const {
  return std::string(to_string(kind)) + " " + subject;
}

std::vector<VocabularyViolation> check_vocabulary(const RuleAst& ast, const OddSpec& odd) {
  return check_vocabulary(ast, odd, kAllRelOps);
}

std::vector<VocabularyViolation> check_vocabulary(const RuleAst& ast, const OddSpec& odd,
                                                  std::span<const RelOp> allowed_ops) {
  std::vector<VocabularyViolation> out;
  for (std::size_t d = 0; d < ast.disjuncts.size(); ++d) {
    const auto& conj = ast.disjuncts[d];
    for (std::size_t r = 0; r < conj.size(); ++r) {
      const Relation& rel = conj[r];
      for (const auto& name : variables_of(rel)) {
        if (!odd.find(name)) out.push_back({ViolationKind::UnknownVariable, name, d, r});
      }
      if (std::find(allowed_ops.begin(), allowed_ops.end(), rel.op) == allowed_ops.end()) {
        out.push_back({ViolationKind::DisallowedOperator, std::string(to_string(rel.op)), d, r});
      }
      BoundView bound;
      if (as_bound(rel, bound)) {
        if (const OddVariable* var = odd.find(bound.variable)) {
          if (bound.bound < var->min || bound.bound > var->max) {
            out.push_back({ViolationKind::OutOfRangeBound, format_number(bound.bound), d, r});
          }
        }
      }
    }
  }
  return out;
}

std::string summarize(std::span<const VocabularyViolation> violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.message();
  }
  return out;
}

}  // namespace ruleforge
