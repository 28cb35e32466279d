#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ruleforge/ast.hpp"
#include "ruleforge/counterfactual.hpp"
#include "ruleforge/odd.hpp"
#include "ruleforge/semantics.hpp"

namespace ruleforge {

// ---- Change log ----------------------------------------------------------

enum class EditKind { ThresholdAdjust, OperatorReplace, AddConjunct, RemoveConjunct, AddDisjunct, RemoveDisjunct };

std::string_view to_string(EditKind kind);
std::optional<EditKind> edit_kind_from_string(std::string_view text);

// One step of a change log. `disjunct`/`relation` address the rule as it is
// when the edit applies; `relation` is unused by disjunct-level edits.
// `before`/`after` are canonical fragments (a relation or a conjunct).
struct Edit {
  EditKind kind = EditKind::ThresholdAdjust;
  std::size_t disjunct = 0;
  std::size_t relation = 0;
  std::string before;
  std::string after;

  friend bool operator==(const Edit&, const Edit&) = default;
};

class EditError : public RuleError {
 public:
  using RuleError::RuleError;
};

// Throws EditError if the path is invalid or `before` does not match.
RuleAst apply_edit(const RuleAst& ast, const Edit& edit);
RuleAst replay(const RuleAst& ast, std::span<const Edit> edits);

// An edit script turning `from` into `to`; replay(from, diff) == to.
std::vector<Edit> diff_rules(const RuleAst& from, const RuleAst& to);

// ---- Context and prompt --------------------------------------------------

enum class CandidateSource { Deterministic, LLM, Mock };
std::string_view to_string(CandidateSource s);

struct RefinementCandidate {
  RuleAst ast;
  std::string raw_rule_text;  // rule text as produced, before canonical printing
  std::string explanation;
  std::vector<Edit> change_log;
  CandidateSource source = CandidateSource::Deterministic;
  int attempt = 1;
};

struct RefinementContext {
  std::string grammar_doc;
  OddSpec odd;
  PolarizedRule target;
  std::vector<PolarizedRule> historical;
  EvidenceFile evidence;
  std::optional<std::string> failure_summary;
  // Labeled runs the deterministic generator scores candidates on.
  std::span<const LabeledRun> dataset;
  // Candidates already rejected in this loop; not proposed again.
  std::vector<RuleAst> rejected;
  std::vector<RelOp> allowed_ops{std::begin(kAllRelOps), std::end(kAllRelOps)};
  double eps_eq = kDefaultEpsEq;
};

// Throws RuleError if the target id appears among the historical rules or
// a historical id repeats.
void validate(const RefinementContext& ctx);

std::string default_grammar_doc();

inline constexpr std::string_view kFormatExemplar = "(0<ARG2<5) and (ARG1>0) or (8<ARG2<12)";

// Sections in order: grammar, vocabulary whitelist, target rule, historical
// rules, evidence, format exemplar, task, and the previous failure when set.
std::string build_prompt(const RefinementContext& ctx);

// ---- Response parsing ----------------------------------------------------

enum class RejectionReason { Empty, ListTupleForm, ParseFailure, Vocabulary };
std::string_view to_string(RejectionReason r);

struct RejectedResponse {
  RejectionReason reason;
  std::string summary;  // fed back into the next prompt
};

using ParsedResponse = std::variant<RefinementCandidate, RejectedResponse>;

// Bounded repair: strips markdown fences and surrounding prose, rejects
// list/tuple renderings, then parses and vocabulary-checks the rule. The
// returned candidate has no change log yet.
ParsedResponse parse_candidate_response(std::string_view raw, const OddSpec& odd);
ParsedResponse parse_candidate_response(std::string_view raw, const OddSpec& odd,
                                        std::span<const RelOp> allowed_ops);

// ---- Generators ----------------------------------------------------------

struct GenerationFailure {
  std::string summary;
};

using GenerationResult = std::variant<RefinementCandidate, GenerationFailure>;

class CandidateGenerator {
 public:
  virtual ~CandidateGenerator() = default;
  virtual GenerationResult generate(const RefinementContext& ctx, int attempt) = 0;
  virtual CandidateSource source() const = 0;
};

// A single-edit candidate with its score on the context dataset.
struct ScoredEdit {
  RuleAst ast;
  Edit edit;
  std::size_t n_mismatch = 0;
  std::size_t evidence_pair = 0;  // index into ctx.evidence.pairs, if any
};

// Enumerates single-edit candidates in the fixed order: threshold
// adjustments to the counterfactual midpoint, strict/non-strict operator
// swaps, midpoint-bounding conjuncts, then removals. Evidence pairs are
// visited tightest first (fewest grid steps), then by run index.
std::vector<ScoredEdit> enumerate_single_edits(const RefinementContext& ctx);

class DeterministicGenerator final : public CandidateGenerator {
 public:
  GenerationResult generate(const RefinementContext& ctx, int attempt) override;
  CandidateSource source() const override { return CandidateSource::Deterministic; }
};

// Replays scripted raw responses; the last one repeats once the script ends.
class MockGenerator final : public CandidateGenerator {
 public:
  explicit MockGenerator(std::vector<std::string> responses);
  GenerationResult generate(const RefinementContext& ctx, int attempt) override;
  CandidateSource source() const override { return CandidateSource::Mock; }
  std::size_t calls() const { return calls_; }

 private:
  std::vector<std::string> responses_;
  std::size_t calls_ = 0;
};

GenerationResult generate_candidate(CandidateGenerator& generator, const RefinementContext& ctx,
                                    int attempt = 1);

// Shared by the LLM and mock paths: parse, then attach the change log and
// metadata. Rejections become GenerationFailure.
GenerationResult candidate_from_response(std::string_view raw, const RefinementContext& ctx,
                                         CandidateSource source, int attempt);

}  // namespace ruleforge
