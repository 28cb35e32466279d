#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ruleforge {

enum class RelOp { Lt, Le, Gt, Ge, Eq, Ne };
enum class ArithOp { Add, Sub, Mul, Div };

inline constexpr RelOp kAllRelOps[] = {RelOp::Lt, RelOp::Le, RelOp::Gt,
                                       RelOp::Ge, RelOp::Eq, RelOp::Ne};

std::string_view to_string(RelOp op);
std::string_view to_string(ArithOp op);

// Operator with its operands swapped: a < b  <=>  b > a.
RelOp mirrored(RelOp op);
bool is_strict(RelOp op);

// Arithmetic expression. Nodes are immutable and children are shared, so
// copies are cheap and equality is structural.
class Expr {
 public:
  enum class Kind { Constant, Variable, Binary };

  static Expr constant(double value);
  static Expr variable(std::string name);
  static Expr binary(ArithOp op, Expr lhs, Expr rhs);

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::Constant; }
  bool is_variable() const { return kind_ == Kind::Variable; }
  bool is_binary() const { return kind_ == Kind::Binary; }

  double value() const { return value_; }
  const std::string& name() const { return name_; }
  ArithOp op() const { return op_; }
  const Expr& lhs() const { return *lhs_; }
  const Expr& rhs() const { return *rhs_; }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  Expr() = default;

  Kind kind_ = Kind::Constant;
  double value_ = 0.0;
  std::string name_;
  ArithOp op_ = ArithOp::Add;
  std::shared_ptr<const Expr> lhs_;
  std::shared_ptr<const Expr> rhs_;
};

struct Relation {
  Expr lhs;
  RelOp op;
  Expr rhs;

  friend bool operator==(const Relation&, const Relation&) = default;
};

using Conjunct = std::vector<Relation>;

// A rule of grammar G in disjunctive-over-conjunctive shape.
struct RuleAst {
  std::vector<Conjunct> disjuncts;

  friend bool operator==(const RuleAst&, const RuleAst&) = default;
};

class RuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws RuleError if the structural invariants do not hold: at least one
// disjunct, no empty disjunct, identifier-shaped names, finite constants.
void validate(const RuleAst& ast);

bool is_identifier(std::string_view text);

// Variables in order of first appearance.
std::vector<std::string> variables_of(const Expr& expr);
std::vector<std::string> variables_of(const Relation& rel);
std::vector<std::string> variables_of(const RuleAst& ast);

std::size_t relation_count(const RuleAst& ast);

// A relation of shape `var rop const` or `const rop var`, normalized so the
// variable is on the left.
struct BoundView {
  std::string variable;
  RelOp op;
  double bound;
};
bool as_bound(const Relation& rel, BoundView& out);

}  // namespace ruleforge
