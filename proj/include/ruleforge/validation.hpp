#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ruleforge/candidates.hpp"
#include "ruleforge/counterfactual.hpp"
#include "ruleforge/odd.hpp"
#include "ruleforge/semantics.hpp"

namespace ruleforge {

// ---- Contradiction -------------------------------------------------------

enum class ContradictionStatus { Clear, Flagged, Unknown };
std::string_view to_string(ContradictionStatus s);

struct ContradictionBudget {
  std::size_t grid_cap = 100'000;  // witness-grid points per pair
  int max_depth = 12;              // box bisection depth
  std::size_t samples = 10'000;    // seeded uniform samples per pair
  std::uint64_t seed = 0;
};

struct ContradictionResult {
  ContradictionStatus status = ContradictionStatus::Clear;
  std::optional<Binding> witness;  // set iff Flagged; binds every ODD variable
  std::string opposing_rule_id;

  friend bool operator==(const ContradictionResult&, const ContradictionResult&) = default;
};

// Decides satisfiability of a ∧ b over the ODD box. Witness search (seed
// points, coarse grid, uniform samples) runs first; the conjunction is then
// refuted per disjunct pair by box contraction and bisection.
ContradictionResult check_pair(const RuleAst& a, const RuleAst& b, const OddSpec& odd,
                               const ContradictionBudget& budget = {},
                               std::span<const LabeledRun> seeds = {}, double eps_eq = kDefaultEpsEq);

// One result per opposing rule, in order. Throws RuleError if an opposing
// rule has the candidate's polarity.
std::vector<ContradictionResult> check_contradiction(const PolarizedRule& candidate,
                                                     std::span<const PolarizedRule> opposing,
                                                     const OddSpec& odd, const ContradictionBudget& budget = {},
                                                     std::span<const LabeledRun> seeds = {},
                                                     double eps_eq = kDefaultEpsEq);

// ---- Preservation and resolution -----------------------------------------

class TargetNotInRuleset : public RuleError {
 public:
  explicit TargetNotInRuleset(const std::string& id) : RuleError("rule '" + id + "' is not in the rule set") {}
};

struct PreservationReport {
  std::vector<std::string> broken_rule_ids;
  std::size_t new_inconsistencies = 0;
  std::vector<std::size_t> new_inconsistent_runs;
};

// The candidate replaces the rule with the same id.
PreservationReport check_preserved_consistency(const PolarizedRule& candidate, std::span<const PolarizedRule> ruleset,
                                               std::span<const LabeledRun> dataset,
                                               double eps_eq = kDefaultEpsEq);

struct ResolutionReport {
  std::size_t mismatch_before = 0;
  std::size_t mismatch_after = 0;
};

ResolutionReport check_target_resolution(const PolarizedRule& candidate, const PolarizedRule& target,
                                         std::span<const LabeledRun> dataset, double eps_eq = kDefaultEpsEq);

// ---- Refinement loop -----------------------------------------------------

enum class Stage { Generation, Vocabulary, Contradiction, Preservation, Resolution, Semantic, Accepted };
std::string_view to_string(Stage s);

struct ValidationReport {
  int attempt = 0;
  Stage stage_reached = Stage::Generation;
  std::string candidate_rule;  // canonical; empty when generation failed
  ContradictionResult contradiction;  // first non-Clear pair, else Clear
  std::vector<std::string> broken_rule_ids;
  ResolutionReport resolution;
  std::size_t new_inconsistencies = 0;
  bool accepted = false;
  std::string failure_summary;
};

struct RefinementOutcome {
  PolarizedRule refined;
  RefinementCandidate candidate;
  EvidenceFile evidence;
  int attempts = 0;
  std::vector<ValidationReport> reports;
  double dg_before = 0.0;
  double dg_after = 0.0;
};

struct Exhausted {
  EvidenceFile evidence;
  std::vector<ValidationReport> reports;
};

using RefineResult = std::variant<RefinementOutcome, Exhausted>;

struct RefineOptions {
  int max_attempts = 5;
  double eps_eq = kDefaultEpsEq;
  SearchLimits search{};
  ContradictionBudget contradiction{};
  std::string grammar_doc;  // default_grammar_doc() when empty
  std::string dataset_ref;
};

// Throws TargetNotInRuleset, NoInconsistency, or RuleError on bad options.
RefineResult refine_loop(const PolarizedRule& target, std::span<const PolarizedRule> ruleset,
                         std::span<const LabeledRun> dataset, Oracle& oracle, const OddSpec& odd,
                         CandidateGenerator& generator, const RefineOptions& options = {});

// Human-readable summary: refined rule, change log, explanation, per-attempt
// verdicts.
std::string render_report(const PolarizedRule& target, const RefineResult& result);

}  // namespace ruleforge
