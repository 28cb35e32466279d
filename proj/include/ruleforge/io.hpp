#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ruleforge/counterfactual.hpp"
#include "ruleforge/metrics.hpp"
#include "ruleforge/scenario.hpp"
#include "ruleforge/semantics.hpp"
#include "ruleforge/validation.hpp"

namespace ruleforge {

inline constexpr int kSchemaVersion = 1;

// All loaders throw FormatError with a field path ("rules[2].polarity: ...")
// and all writers emit two-space indented JSON with a trailing newline, so
// loading and storing a canonical file reproduces it byte for byte.

// ---- Rules ---------------------------------------------------------------

// A rules-file entry whose text has not been parsed yet.
struct RuleEntry {
  std::string id;
  Polarity polarity = Polarity::PassRule;
  std::string text;
};

// Checks the document shape, ids, and polarities only.
std::vector<RuleEntry> parse_rule_entries_json(std::string_view text);

// Accepts a bare array [{"id", "polarity": "pass"|"fail", "text"}] or an
// object {"schema_version": 1, "rules": [...]}. Rule ids must be unique.
std::vector<PolarizedRule> parse_rules_json(std::string_view text);
std::string write_rules_json(std::span<const PolarizedRule> rules);

// Interchange form {"or":[{"and":[{"lhs":..., "op":"<", "rhs":...}]}]}.
std::string rule_ast_to_json(const RuleAst& ast);
RuleAst rule_ast_from_json(std::string_view text);

// ---- ODD and oracle config -----------------------------------------------

// {"schema_version": 1, "variables": [{"name", "min", "max", "step"}]}; a
// bare array of variables is also accepted.
OddSpec parse_odd_json(std::string_view text);
std::string write_odd_json(const OddSpec& odd);

// {"schema_version": 1, "odd": {...}, "safe_region": "<rule text>", "seed": n}
OracleConfig parse_oracle_config_json(std::string_view text);
std::string write_oracle_config_json(const OracleConfig& config);

// ---- Evidence --------------------------------------------------------------

EvidenceFile parse_evidence_json(std::string_view text);
std::string write_evidence_json(const EvidenceFile& evidence);

// ---- Reports ---------------------------------------------------------------

struct RuleDecisiveness {
  std::string rule_id;
  std::string rule_text;
  Polarity polarity = Polarity::PassRule;
  DecisivenessReport report;
};

std::string write_decisiveness_json(std::span<const RuleDecisiveness> rows, std::string_view dataset_ref);

// Accepted outcomes and Exhausted results share one document shape, told
// apart by "status": "accepted" | "exhausted".
std::string write_outcome_json(const PolarizedRule& target, const RefineResult& result);
RefineResult parse_outcome_json(std::string_view text);

std::string write_metrics_json(const MetricsReport& report);

// ---- Files -----------------------------------------------------------------

// Throws FormatError when the file cannot be read.
std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary sibling and rename. Throws std::runtime_error.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace ruleforge
