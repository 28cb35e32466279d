#include "ruleforge/ast.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace ruleforge {

std::string_view to_string(RelOp op) {
  switch (op) {
    case RelOp::Lt: return "<";
    case RelOp::Le: return "<=";
    case RelOp::Gt: return ">";
    case RelOp::Ge: return ">=";
    case RelOp::Eq: return "==";
    case RelOp::Ne: return "!=";
  }
  return "?";
}

std::string_view to_string(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
  }
  return "?";
}

RelOp mirrored(RelOp op) {
  switch (op) {
    case RelOp::Lt: return RelOp::Gt;
    case RelOp::Le: return RelOp::Ge;
    case RelOp::Gt: return RelOp::Lt;
    case RelOp::Ge: return RelOp::Le;
    default: return op;
  }
}

bool is_strict(RelOp op) { return op == RelOp::Lt || op == RelOp::Gt; }

Expr Expr::constant(double value) {
  Expr e;
  e.kind_ = Kind::Constant;
  // Normalize negative zero so printing and equality agree.
  e.value_ = value == 0.0 ? 0.0 : value;
  return e;
}

Expr Expr::variable(std::string name) {
  Expr e;
  e.kind_ = Kind::Variable;
  e.name_ = std::move(name);
  return e;
}

Expr Expr::binary(ArithOp op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind_ = Kind::Binary;
  e.op_ = op;
  e.lhs_ = std::make_shared<const Expr>(std::move(lhs));
  e.rhs_ = std::make_shared<const Expr>(std::move(rhs));
  return e;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case Expr::Kind::Constant: return a.value_ == b.value_;
    case Expr::Kind::Variable: return a.name_ == b.name_;
    case Expr::Kind::Binary:
      return a.op_ == b.op_ && *a.lhs_ == *b.lhs_ && *a.rhs_ == *b.rhs_;
  }
  return false;
}

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  auto head = static_cast<unsigned char>(text.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  return std::all_of(text.begin() + 1, text.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_';
  });
}

namespace {

void validate_expr(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Constant:
      if (!std::isfinite(e.value())) throw RuleError("non-finite constant in rule");
      break;
    case Expr::Kind::Variable:
      if (!is_identifier(e.name())) throw RuleError("invalid variable name '" + e.name() + "'");
      break;
    case Expr::Kind::Binary:
      validate_expr(e.lhs());
      validate_expr(e.rhs());
      break;
  }
}

void collect(const Expr& e, std::vector<std::string>& out) {
  switch (e.kind()) {
    case Expr::Kind::Constant: break;
    case Expr::Kind::Variable:
      if (std::find(out.begin(), out.end(), e.name()) == out.end()) out.push_back(e.name());
      break;
    case Expr::Kind::Binary:
      collect(e.lhs(), out);
      collect(e.rhs(), out);
      break;
  }
}

}  // namespace

void validate(const RuleAst& ast) {
  if (ast.disjuncts.empty()) throw RuleError("rule has no disjuncts");
  for (const auto& conj : ast.disjuncts) {
    if (conj.empty()) throw RuleError("rule has an empty disjunct");
    for (const auto& rel : conj) {
      validate_expr(rel.lhs);
      validate_expr(rel.rhs);
    }
  }
}

std::vector<std::string> variables_of(const Expr& expr) {
  std::vector<std::string> out;
  collect(expr, out);
  return out;
}

std::vector<std::string> variables_of(const Relation& rel) {
  std::vector<std::string> out;
  collect(rel.lhs, out);
  collect(rel.rhs, out);
  return out;
}

std::vector<std::string> variables_of(const RuleAst& ast) {
  std::vector<std::string> out;
  for (const auto& conj : ast.disjuncts) {
    for (const auto& rel : conj) {
      collect(rel.lhs, out);
      collect(rel.rhs, out);
    }
  }
  return out;
}

std::size_t relation_count(const RuleAst& ast) {
  std::size_t n = 0;
  for (const auto& conj : ast.disjuncts) n += conj.size();
  return n;
}

bool as_bound(const Relation& rel, BoundView& out) {
  if (rel.lhs.is_variable() && rel.rhs.is_constant()) {
    out = {rel.lhs.name(), rel.op, rel.rhs.value()};
    return true;
  }
  if (rel.lhs.is_constant() && rel.rhs.is_variable()) {
    out = {rel.rhs.name(), mirrored(rel.op), rel.lhs.value()};
    return true;
  }
  return false;
}

}  // namespace ruleforge
