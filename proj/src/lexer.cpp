#include <cctype>
#include <string>

#include "ruleforge/grammar.hpp"

namespace ruleforge {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Ident: return "IDENT";
    case TokenKind::Number: return "NUMBER";
    case TokenKind::RelOp: return "RELOP";
    case TokenKind::ArOp: return "AROP";
    case TokenKind::LogOp: return "LOGOP";
    case TokenKind::LParen: return "LPAREN";
    case TokenKind::RParen: return "RPAREN";
    case TokenKind::Garbage: return "GARBAGE";
  }
  return "?";
}

namespace {

constexpr std::string_view kAndSymbol = "\xE2\x88\xA7";  // U+2227
constexpr std::string_view kOrSymbol = "\xE2\x88\xA8";   // U+2228

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

// Length of the recognized token starting at `pos`, or 0 if the byte starts
// no token.
std::size_t match_at(std::string_view text, std::size_t pos, TokenKind& kind) {
  const char c = text[pos];
  auto rest = text.substr(pos);
  if (is_ident_start(c)) {
    std::size_t n = 1;
    while (pos + n < text.size() && is_ident_char(text[pos + n])) ++n;
    auto word = text.substr(pos, n);
    kind = (iequals(word, "and") || iequals(word, "or")) ? TokenKind::LogOp : TokenKind::Ident;
    return n;
  }
  if (is_digit(c)) {
    std::size_t n = 1;
    while (pos + n < text.size() && is_digit(text[pos + n])) ++n;
    if (pos + n + 1 < text.size() && text[pos + n] == '.' && is_digit(text[pos + n + 1])) {
      n += 2;
      while (pos + n < text.size() && is_digit(text[pos + n])) ++n;
    }
    kind = TokenKind::Number;
    return n;
  }
  if (rest.starts_with("<=") || rest.starts_with(">=") || rest.starts_with("==") ||
      rest.starts_with("!=")) {
    kind = TokenKind::RelOp;
    return 2;
  }
  if (c == '<' || c == '>') {
    kind = TokenKind::RelOp;
    return 1;
  }
  if (rest.starts_with("&&") || rest.starts_with("||")) {
    kind = TokenKind::LogOp;
    return 2;
  }
  if (rest.starts_with(kAndSymbol) || rest.starts_with(kOrSymbol)) {
    kind = TokenKind::LogOp;
    return 3;
  }
  if (c == '+' || c == '-' || c == '*' || c == '/') {
    kind = TokenKind::ArOp;
    return 1;
  }
  if (c == '(') {
    kind = TokenKind::LParen;
    return 1;
  }
  if (c == ')') {
    kind = TokenKind::RParen;
    return 1;
  }
  return 0;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t pos = 0;
  std::size_t garbage_begin = std::string_view::npos;
  auto flush_garbage = [&](std::size_t end) {
    if (garbage_begin == std::string_view::npos) return;
    out.push_back({TokenKind::Garbage, std::string(text.substr(garbage_begin, end - garbage_begin)),
                   garbage_begin, end});
    garbage_begin = std::string_view::npos;
  };
  while (pos < text.size()) {
    if (is_space(text[pos])) {
      flush_garbage(pos);
      ++pos;
      continue;
    }
    TokenKind kind{};
    const std::size_t n = match_at(text, pos, kind);
    if (n == 0) {
      if (garbage_begin == std::string_view::npos) garbage_begin = pos;
      ++pos;
      continue;
    }
    flush_garbage(pos);
    out.push_back({kind, std::string(text.substr(pos, n)), pos, pos + n});
    pos += n;
  }
  flush_garbage(pos);
  return out;
}

}  // namespace ruleforge
