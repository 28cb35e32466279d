#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ruleforge/ast.hpp"
#include "ruleforge/odd.hpp"

namespace ruleforge {

enum class ViolationKind { UnknownVariable, OutOfRangeBound, DisallowedOperator };

std::string_view to_string(ViolationKind kind);

struct VocabularyViolation {
  ViolationKind kind;
  std::string subject;  // variable name, constant, or operator lexeme
  std::size_t disjunct = 0;
  std::size_t relation = 0;

  // "UnknownVariable ARG3", "OutOfRangeBound 120", ...
  std::string message() const;

  friend bool operator==(const VocabularyViolation&, const VocabularyViolation&) = default;
};

// Unknown variables are reported once per relation that mentions them.
// Range checks apply only to `var rop const` / `const rop var` relations.
std::vector<VocabularyViolation> check_vocabulary(const RuleAst& ast, const OddSpec& odd);
std::vector<VocabularyViolation> check_vocabulary(const RuleAst& ast, const OddSpec& odd,
                                                  std::span<const RelOp> allowed_ops);

std::string summarize(std::span<const VocabularyViolation> violations);

}  // namespace ruleforge
