#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ruleforge/ast.hpp"
#include "ruleforge/odd.hpp"

namespace ruleforge {

enum class Outcome { Pass, Fail };
enum class Polarity { PassRule, FailRule };
enum class Consistency { Consistent, Inconsistent, Inconclusive };

std::string_view to_string(Outcome o);
std::string_view to_string(Polarity p);
std::string_view to_string(Consistency c);
Outcome opposite(Outcome o);
Polarity opposite(Polarity p);

// Verdict a rule assigns when it holds.
Outcome verdict_of(Polarity p);

using Binding = std::map<std::string, double, std::less<>>;

struct LabeledRun {
  Binding x;
  Outcome y = Outcome::Pass;

  friend bool operator==(const LabeledRun&, const LabeledRun&) = default;
};

struct PolarizedRule {
  std::string id;
  Polarity polarity = Polarity::PassRule;
  RuleAst ast;

  friend bool operator==(const PolarizedRule&, const PolarizedRule&) = default;
};

class UnboundVariable : public RuleError {
 public:
  explicit UnboundVariable(std::string name)
      : RuleError("unbound variable '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class EmptyDataset : public RuleError {
 public:
  EmptyDataset() : RuleError("dataset is empty") {}
};

inline constexpr double kDefaultEpsEq = 1e-9;

// Value of an expression; nullopt when a division by zero occurs.
std::optional<double> evaluate_expr(const Expr& expr, const Binding& x);

// Relation truth value. A division by zero makes the relation false and
// appends a diagnostic when `diagnostics` is given.
bool evaluate(const Relation& rel, const Binding& x, double eps_eq = kDefaultEpsEq,
              std::vector<std::string>* diagnostics = nullptr);

// Disjunction of conjunctions. Throws UnboundVariable if `x` misses any
// variable of the rule, even one a short-circuit would skip.
bool evaluate(const RuleAst& ast, const Binding& x, double eps_eq = kDefaultEpsEq,
              std::vector<std::string>* diagnostics = nullptr);

Consistency classify_consistency(const PolarizedRule& rule, const LabeledRun& run,
                                 double eps_eq = kDefaultEpsEq);

struct DecisivenessReport {
  double dg = 1.0;
  std::size_t n = 0;
  std::size_t n_mismatch = 0;
  std::size_t n_consistent = 0;
  std::size_t n_inconclusive = 0;
  std::vector<std::size_t> mismatches;  // run indices, ascending
  // The rule held on no run; dg = 1 here is vacuous.
  bool fully_inconclusive = false;
};

DecisivenessReport decisiveness(const PolarizedRule& rule, std::span<const LabeledRun> dataset,
                                double eps_eq = kDefaultEpsEq);

// Mean dg over rules that produced at least one definitive verdict; nullopt
// when no rule did.
std::optional<double> ruleset_decisiveness(std::span<const PolarizedRule> rules,
                                           std::span<const LabeledRun> dataset,
                                           double eps_eq = kDefaultEpsEq);

// ---- Dataset CSV -------------------------------------------------------

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Feature columns in file order; each run binds all of them.
struct Dataset {
  std::vector<std::string> features;
  std::vector<LabeledRun> runs;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Header of feature names plus a final "outcome" column with Pass|Fail.
// Throws FormatError naming the line and column.
Dataset parse_dataset_csv(std::string_view text);
std::string write_dataset_csv(const Dataset& dataset);

// Checks every run binds each ODD variable within range; throws FormatError.
void check_dataset_against(const Dataset& dataset, const OddSpec& odd);

// "fnv1a64:<hex>" over the canonical CSV form.
std::string dataset_digest(const Dataset& dataset);

}  // namespace ruleforge
