#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "ruleforge/grammar.hpp"
#include "ruleforge/odd.hpp"

namespace ruleforge {

namespace {

std::string describe(const std::vector<std::string>& expected, const std::string& found,
                     std::size_t offset) {
  std::ostringstream os;
  os << "parse error at offset " << offset << ": expected ";
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) os << " or ";
    os << expected[i];
  }
  os << ", found " << found;
  return os.str();
}

bool lexeme_is_and(std::string_view lexeme) {
  if (lexeme == "&&" || lexeme == "\xE2\x88\xA7") return true;
  return lexeme.size() == 3 && std::tolower(static_cast<unsigned char>(lexeme[0])) == 'a' &&
         std::tolower(static_cast<unsigned char>(lexeme[1])) == 'n' &&
         std::tolower(static_cast<unsigned char>(lexeme[2])) == 'd';
}

RelOp relop_of(std::string_view lexeme) {
  if (lexeme == "<") return RelOp::Lt;
  if (lexeme == "<=") return RelOp::Le;
  if (lexeme == ">") return RelOp::Gt;
  if (lexeme == ">=") return RelOp::Ge;
  if (lexeme == "==") return RelOp::Eq;
  return RelOp::Ne;
}

ArithOp arithop_of(std::string_view lexeme) {
  if (lexeme == "+") return ArithOp::Add;
  if (lexeme == "-") return ArithOp::Sub;
  if (lexeme == "*") return ArithOp::Mul;
  return ArithOp::Div;
}

// Recursive descent with one backtracking point: a '(' may open either a
// logical group or a parenthesized arithmetic expression. The furthest
// failure across all attempts is the one reported.
class Parser {
 public:
  Parser(const std::vector<Token>& tokens, std::size_t source_length)
      : tokens_(tokens), source_length_(source_length) {}

  RuleAst run() {
    try {
      RuleAst ast{disjunction()};
      if (pos_ != tokens_.size()) fail("'and'", "'or'", "end of input");
      return ast;
    } catch (const Failure&) {
      const bool at_end = furthest_ >= tokens_.size();
      const std::size_t offset = at_end ? source_length_ : tokens_[furthest_].begin;
      std::string found = at_end ? "end of input" : "'" + tokens_[furthest_].lexeme + "'";
      throw ParseError(offset, furthest_, expected_, std::move(found));
    }
  }

 private:
  struct Failure {};

  template <typename... Names>
  [[noreturn]] void fail(Names... names) {
    if (pos_ > furthest_) {
      furthest_ = pos_;
      expected_.clear();
    }
    if (pos_ == furthest_) {
      for (std::string name : {std::string(names)...}) {
        if (std::find(expected_.begin(), expected_.end(), name) == expected_.end())
          expected_.push_back(std::move(name));
      }
    }
    throw Failure{};
  }

  const Token* peek(std::size_t ahead = 0) const {
    return pos_ + ahead < tokens_.size() ? &tokens_[pos_ + ahead] : nullptr;
  }
  bool at(TokenKind kind, std::size_t ahead = 0) const {
    const Token* t = peek(ahead);
    return t && t->kind == kind;
  }

  std::vector<Conjunct> disjunction() {
    std::vector<Conjunct> out = conjunction();
    while (at(TokenKind::LogOp) && !lexeme_is_and(peek()->lexeme)) {
      ++pos_;
      auto more = conjunction();
      out.insert(out.end(), more.begin(), more.end());
    }
    return out;
  }

  std::vector<Conjunct> conjunction() {
    std::size_t start = pos_;
    std::vector<std::vector<Conjunct>> parts;
    std::vector<std::size_t> starts;
    parts.push_back(atom());
    starts.push_back(start);
    while (at(TokenKind::LogOp) && lexeme_is_and(peek()->lexeme)) {
      ++pos_;
      starts.push_back(pos_);
      parts.push_back(atom());
    }
    if (parts.size() == 1) return std::move(parts.front());
    Conjunct merged;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (parts[i].size() != 1) {
        // G has no disjunction below a conjunction.
        pos_ = starts[i];
        if (pos_ < furthest_ && !expected_.empty()) throw Failure{};
        furthest_ = pos_;
        expected_ = {"relation (a disjunction cannot appear inside a conjunction)"};
        throw Failure{};
      }
      merged.insert(merged.end(), parts[i].front().begin(), parts[i].front().end());
    }
    return {std::move(merged)};
  }

  std::vector<Conjunct> atom() {
    if (at(TokenKind::LParen)) {
      const std::size_t save = pos_;
      try {
        ++pos_;
        auto inner = disjunction();
        if (!at(TokenKind::RParen)) fail("')'");
        ++pos_;
        if (!at(TokenKind::RelOp) && !at(TokenKind::ArOp)) return inner;
      } catch (const Failure&) {
      }
      pos_ = save;
    }
    return {comparison()};
  }

  Conjunct comparison() {
    Expr left = sum();
    if (!at(TokenKind::RelOp)) fail("relational operator", "arithmetic operator");
    Conjunct out;
    while (at(TokenKind::RelOp)) {
      const RelOp op = relop_of(peek()->lexeme);
      ++pos_;
      Expr right = sum();
      out.push_back({left, op, right});
      left = std::move(right);
    }
    return out;
  }

  Expr sum() {
    Expr left = product();
    while (at(TokenKind::ArOp) && (peek()->lexeme == "+" || peek()->lexeme == "-")) {
      const ArithOp op = arithop_of(peek()->lexeme);
      ++pos_;
      left = Expr::binary(op, std::move(left), product());
    }
    return left;
  }

  Expr product() {
    Expr left = unary();
    while (at(TokenKind::ArOp) && (peek()->lexeme == "*" || peek()->lexeme == "/")) {
      const ArithOp op = arithop_of(peek()->lexeme);
      ++pos_;
      left = Expr::binary(op, std::move(left), unary());
    }
    return left;
  }

  // Unary minus exists only on numeric literals, so negative constants
  // survive a print/parse round trip.
  Expr unary() {
    if (at(TokenKind::ArOp) && peek()->lexeme == "-" && at(TokenKind::Number, 1)) {
      ++pos_;
      return Expr::constant(-number());
    }
    return primary();
  }

  double number() {
    const std::string& lex = peek()->lexeme;
    double value = 0.0;
    auto res = std::from_chars(lex.data(), lex.data() + lex.size(), value);
    if (res.ec != std::errc{} || !std::isfinite(value)) fail("finite number");
    ++pos_;
    return value;
  }

  Expr primary() {
    if (at(TokenKind::Number)) return Expr::constant(number());
    if (at(TokenKind::Ident)) {
      Expr e = Expr::variable(peek()->lexeme);
      ++pos_;
      return e;
    }
    if (at(TokenKind::LParen)) {
      ++pos_;
      Expr e = sum();
      if (!at(TokenKind::RParen)) fail("')'", "arithmetic operator");
      ++pos_;
      return e;
    }
    fail("number", "identifier", "'('");
  }

  const std::vector<Token>& tokens_;
  std::size_t source_length_;
  std::size_t pos_ = 0;
  std::size_t furthest_ = 0;
  std::vector<std::string> expected_;
};

int precedence(ArithOp op) { return (op == ArithOp::Add || op == ArithOp::Sub) ? 1 : 2; }

std::string print_expr_in(const Expr& e, int parent_prec, bool right_operand) {
  switch (e.kind()) {
    case Expr::Kind::Constant: return format_number(e.value());
    case Expr::Kind::Variable: return e.name();
    case Expr::Kind::Binary: {
      const int p = precedence(e.op());
      std::string s = print_expr_in(e.lhs(), p, false) + " " + std::string(to_string(e.op())) + " " +
                      print_expr_in(e.rhs(), p, true);
      if (p < parent_prec || (p == parent_prec && right_operand)) return "(" + s + ")";
      return s;
    }
  }
  return {};
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::size_t token_index,
                       std::vector<std::string> expected, std::string found)
    : std::runtime_error(describe(expected, found, offset)),
      offset_(offset),
      token_index_(token_index),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

RuleAst parse_tokens(const std::vector<Token>& tokens, std::size_t source_length) {
  return Parser(tokens, source_length).run();
}

RuleAst parse_rule(std::string_view text) {
  return parse_tokens(tokenize(text), text.size());
}

std::string print_expr(const Expr& expr) { return print_expr_in(expr, 0, false); }

std::string print_relation(const Relation& rel) {
  return "(" + print_expr(rel.lhs) + " " + std::string(to_string(rel.op)) + " " +
         print_expr(rel.rhs) + ")";
}

std::string print_conjunct(const Conjunct& conj) {
  std::string out;
  for (std::size_t i = 0; i < conj.size(); ++i) {
    if (i) out += " and ";
    out += print_relation(conj[i]);
  }
  return out;
}

std::string print_rule(const RuleAst& ast) {
  if (ast.disjuncts.size() == 1) return print_conjunct(ast.disjuncts.front());
  std::string out;
  for (std::size_t i = 0; i < ast.disjuncts.size(); ++i) {
    if (i) out += " or ";
    const auto& conj = ast.disjuncts[i];
    out += conj.size() > 1 ? "(" + print_conjunct(conj) + ")" : print_conjunct(conj);
  }
  return out;
}

std::string_view grammar_ebnf() {
  return R"EBNF(rule        = disjunction ;
disjunction = conjunction , { or , conjunction } ;
conjunction = atom , { and , atom } ;
atom        = "(" , disjunction , ")" | comparison ;
comparison  = expr , relop , expr , { relop , expr } ;   (* a < x < b means (a < x) and (x < b) *)
expr        = term , { ( "+" | "-" ) , term } ;
term        = factor , { ( "*" | "/" ) , factor } ;
factor      = [ "-" ] , number | identifier | "(" , expr , ")" ;
relop       = "<" | "<=" | ">" | ">=" | "==" | "!=" ;
and         = "and" | "&&" | "∧" ;                    (* keywords are case-insensitive *)
or          = "or" | "||" | "∨" ;
identifier  = ( letter | "_" ) , { letter | digit | "_" } ;
number      = digit , { digit } , [ "." , digit , { digit } ] ;
(* Precedence, loosest first: or, and, relational, additive, multiplicative.
   All binary operators are left-associative. A disjunction may not appear
   as an operand of "and". *)
)EBNF";
}

}  // namespace ruleforge
