#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ruleforge/ast.hpp"
#include "ruleforge/odd.hpp"
#include "ruleforge/semantics.hpp"
#include "ruleforge/vocabulary.hpp"

namespace ruleforge {

struct SemanticValidity {
  double sv = 1.0;
  std::size_t n_invalid = 0;
  std::size_t n_pred = 0;
  std::vector<VocabularyViolation> violations;
};

// A relation is invalid if it has at least one vocabulary violation.
SemanticValidity semantic_validity(const RuleAst& ast, const OddSpec& odd);
SemanticValidity semantic_validity(const RuleAst& ast, const OddSpec& odd, std::span<const RelOp> allowed_ops);

struct GrammarCompliance {
  double gc = 1.0;
  std::size_t n_viol = 0;
  std::size_t n_tok = 0;
  bool empty_input = false;
  std::vector<std::size_t> discarded;  // token indices counted as violations, ascending
};

// GARBAGE tokens are violations outright. The remaining tokens are parsed;
// on each error one token is discarded (the offending one, or at end of
// input the innermost unclosed "(" if any, else the last token) and the
// parse retried.
GrammarCompliance grammar_compliance(std::string_view raw);

enum class CmBand { Optimal, Conservative, OverConstrained, Low };
std::string_view to_string(CmBand b);

struct EditStats {
  std::size_t original = 0;
  std::size_t refined = 0;
  std::size_t unchanged = 0;
  std::size_t removed_redundant = 0;
  std::size_t removed_other = 0;
  std::size_t threshold_shifted = 0;
  std::size_t operator_changed = 0;
  std::size_t added_existing = 0;
  std::size_t added_new_variable = 0;
  bool narrowed_one_sided = false;  // a one-sided variable gained a second bound and its first moved
  double unchanged_fraction = 1.0;
  double changed_fraction = 0.0;
};

struct ChangeMinimality {
  double cm = 1.0;
  CmBand band = CmBand::Optimal;
  EditStats stats;
};

ChangeMinimality change_minimality(const RuleAst& original, const RuleAst& refined);

struct MetricsReport {
  double dg_before = 0.0;
  double dg_after = 0.0;
  double dg_gain = 0.0;
  SemanticValidity sv;
  GrammarCompliance gc;
  ChangeMinimality cm;
};

// `refined_raw` is the rule text as produced; the canonical print is used
// when it is empty.
MetricsReport compute_metrics(const PolarizedRule& original, const RuleAst& refined, std::string_view refined_raw,
                              std::span<const LabeledRun> dataset, const OddSpec& odd,
                              double eps_eq = kDefaultEpsEq);

// Columns: variant, GC, SV, I (not computed), CM with band.
std::string render_metrics_table(std::span<const std::pair<std::string, MetricsReport>> rows);

}  // namespace ruleforge
