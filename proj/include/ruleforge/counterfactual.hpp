#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ruleforge/odd.hpp"
#include "ruleforge/semantics.hpp"

namespace ruleforge {

// Ground-truth labeling of inputs, standing in for re-executing the system
// under test. Implementations must be deterministic.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual Outcome query(const Binding& x) = 0;
  // True if concurrent queries from several threads are safe.
  virtual bool shareable() const { return false; }
};

class FunctionOracle final : public Oracle {
 public:
  explicit FunctionOracle(std::function<Outcome(const Binding&)> fn) : fn_(std::move(fn)) {}
  Outcome query(const Binding& x) override { return fn_(x); }

 private:
  std::function<Outcome(const Binding&)> fn_;
};

struct SearchLimits {
  int max_radius_steps = 20;
  std::size_t query_budget = 10000;  // oracle queries per search
};

struct CounterfactualPair {
  std::size_t run_index = 0;
  Binding x;
  Outcome y = Outcome::Fail;
  Binding x_cf;
  Outcome y_cf = Outcome::Pass;
  Binding delta;       // x_cf - x for every ODD feature
  double l1 = 0.0;     // raw-unit L1 norm of delta
  int l1_steps = 0;    // L1 norm in per-feature grid steps

  friend bool operator==(const CounterfactualPair&, const CounterfactualPair&) = default;
};

enum class SearchFailure { NotFound, BudgetExceeded };
std::string_view to_string(SearchFailure f);

using SearchResult = std::variant<CounterfactualPair, SearchFailure>;

// Expands the grid L1 radius k = 1, 2, ... around x. At radius k the
// candidates are all offset vectors (o_1..o_d), in units of each feature's
// step, with sum |o_i| = k, visited in lexicographic order over ODD feature
// order with signed offsets ascending. Probes outside the ODD box are skipped
// without spending budget. Returns the first probe whose oracle outcome
// differs from y.
SearchResult search_counterfactual(const Binding& x, Outcome y, Oracle& oracle, const OddSpec& odd,
                                   const SearchLimits& limits = {});

struct UnresolvedRun {
  std::size_t run_index = 0;
  SearchFailure reason = SearchFailure::NotFound;

  friend bool operator==(const UnresolvedRun&, const UnresolvedRun&) = default;
};

struct EvidenceFile {
  std::string rule_id;
  std::string rule_text;  // canonical DSL
  std::string dataset_ref;
  std::vector<CounterfactualPair> pairs;
  std::vector<UnresolvedRun> unresolved;

  friend bool operator==(const EvidenceFile&, const EvidenceFile&) = default;
};

class NoInconsistency : public RuleError {
 public:
  explicit NoInconsistency(const std::string& rule_id)
      : RuleError("rule '" + rule_id + "' has no inconsistent run on the dataset") {}
};

// One search per inconsistent run, in dataset order.
EvidenceFile build_evidence(const PolarizedRule& rule, std::span<const LabeledRun> dataset, Oracle& oracle,
                            const OddSpec& odd, const SearchLimits& limits = {},
                            std::string dataset_ref = {}, double eps_eq = kDefaultEpsEq);

}  // namespace ruleforge
