#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ruleforge/ast.hpp"

namespace ruleforge {

enum class TokenKind { Ident, Number, RelOp, ArOp, LogOp, LParen, RParen, Garbage };

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind;
  std::string lexeme;
  std::size_t begin = 0;  // byte offsets into the source, [begin, end)
  std::size_t end = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

// Total: bytes that fit no lexical class are grouped into maximal GARBAGE runs.
std::vector<Token> tokenize(std::string_view text);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::size_t token_index, std::vector<std::string> expected,
             std::string found);

  // Byte offset of the offending token (input length at end of input).
  std::size_t offset() const { return offset_; }
  std::size_t token_index() const { return token_index_; }
  const std::vector<std::string>& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  std::size_t offset_;
  std::size_t token_index_;
  std::vector<std::string> expected_;
  std::string found_;
};

// Parses the rule DSL. Chained comparisons are desugared into conjunctions
// of binary relations. Throws ParseError.
RuleAst parse_rule(std::string_view text);
RuleAst parse_tokens(const std::vector<Token>& tokens, std::size_t source_length);

// Canonical form: parenthesized binary relations, lowercase connectives,
// shortest decimal constants.
std::string print_rule(const RuleAst& ast);
std::string print_conjunct(const Conjunct& conj);
std::string print_relation(const Relation& rel);
std::string print_expr(const Expr& expr);

// EBNF of the accepted surface syntax.
std::string_view grammar_ebnf();

}  // namespace ruleforge
