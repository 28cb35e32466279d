#include <algorithm>
#include <utility>

#include "ruleforge/candidates.hpp"
#include "ruleforge/grammar.hpp"

namespace ruleforge {

namespace {

constexpr std::pair<EditKind, std::string_view> kEditNames[] = {
    {EditKind::ThresholdAdjust, "ThresholdAdjust"}, {EditKind::OperatorReplace, "OperatorReplace"},
    {EditKind::AddConjunct, "AddConjunct"},         {EditKind::RemoveConjunct, "RemoveConjunct"},
    {EditKind::AddDisjunct, "AddDisjunct"},         {EditKind::RemoveDisjunct, "RemoveDisjunct"},
};

Relation parse_relation_fragment(const std::string& text) {
  RuleAst ast;
  try {
    ast = parse_rule(text);
  } catch (const ParseError& e) {
    throw EditError("edit fragment '" + text + "' does not parse: " + e.what());
  }
  if (ast.disjuncts.size() != 1 || ast.disjuncts[0].size() != 1) {
    throw EditError("edit fragment '" + text + "' is not a single relation");
  }
  return ast.disjuncts[0][0];
}

Conjunct parse_conjunct_fragment(const std::string& text) {
  RuleAst ast;
  try {
    ast = parse_rule(text);
  } catch (const ParseError& e) {
    throw EditError("edit fragment '" + text + "' does not parse: " + e.what());
  }
  if (ast.disjuncts.size() != 1) throw EditError("edit fragment '" + text + "' is not a conjunct");
  return ast.disjuncts[0];
}

Conjunct& disjunct_at(RuleAst& ast, const Edit& edit) {
  if (edit.disjunct >= ast.disjuncts.size()) {
    throw EditError(std::string(to_string(edit.kind)) + ": disjunct " + std::to_string(edit.disjunct) +
                    " out of range");
  }
  return ast.disjuncts[edit.disjunct];
}

Relation& relation_at(RuleAst& ast, const Edit& edit) {
  Conjunct& conj = disjunct_at(ast, edit);
  if (edit.relation >= conj.size()) {
    throw EditError(std::string(to_string(edit.kind)) + ": relation " + std::to_string(edit.relation) +
                    " out of range");
  }
  Relation& rel = conj[edit.relation];
  if (print_relation(rel) != edit.before) {
    throw EditError(std::string(to_string(edit.kind)) + ": expected '" + edit.before + "', found '" +
                    print_relation(rel) + "'");
  }
  return rel;
}

bool same_shape(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Expr::Kind::Constant: return true;
    case Expr::Kind::Variable: return a.name() == b.name();
    case Expr::Kind::Binary: return a.op() == b.op() && same_shape(a.lhs(), b.lhs()) && same_shape(a.rhs(), b.rhs());
  }
  return false;
}

// Index pairs of a longest common subsequence, in increasing order.
template <typename T>
std::vector<std::pair<std::size_t, std::size_t>> lcs(const std::vector<T>& a, const std::vector<T>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> len(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      len[i][j] = a[i] == b[j] ? len[i + 1][j + 1] + 1 : std::max(len[i + 1][j], len[i][j + 1]);
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (a[i] == b[j]) {
      out.emplace_back(i++, j++);
    } else if (len[i + 1][j] >= len[i][j + 1]) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

class Differ {
 public:
  explicit Differ(RuleAst from) : cur_(std::move(from)) {}

  void rule(const RuleAst& to) {
    const std::vector<Conjunct> from = cur_.disjuncts;
    auto anchors = lcs(from, to.disjuncts);
    anchors.emplace_back(from.size(), to.disjuncts.size());
    std::size_t fi = 0, tj = 0, p = 0;
    for (const auto& [fa, ta] : anchors) {
      const std::size_t a = fa - fi, b = ta - tj, k = std::min(a, b);
      for (std::size_t t = 0; t < k; ++t, ++p) conjunct(p, to.disjuncts[tj + t]);
      for (std::size_t t = k; t < b; ++t, ++p) {
        push({EditKind::AddDisjunct, p, 0, "", print_conjunct(to.disjuncts[tj + t])});
      }
      for (std::size_t t = k; t < a; ++t) {
        push({EditKind::RemoveDisjunct, p, 0, print_conjunct(cur_.disjuncts[p]), ""});
      }
      if (fa < from.size()) ++p;  // step over the anchor itself
      fi = fa + 1;
      tj = ta + 1;
    }
  }

  std::vector<Edit> take() { return std::move(edits_); }

 private:
  void conjunct(std::size_t d, const Conjunct& to) {
    const Conjunct from = cur_.disjuncts[d];
    auto anchors = lcs(from, to);
    anchors.emplace_back(from.size(), to.size());
    std::size_t fi = 0, tj = 0, p = 0;
    for (const auto& [fa, ta] : anchors) {
      const std::size_t a = fa - fi, b = ta - tj, k = std::min(a, b);
      for (std::size_t t = 0; t < k; ++t, ++p) relation(d, p, from[fi + t], to[tj + t]);
      for (std::size_t t = k; t < b; ++t, ++p) {
        push({EditKind::AddConjunct, d, p, "", print_relation(to[tj + t])});
      }
      for (std::size_t t = k; t < a; ++t) {
        push({EditKind::RemoveConjunct, d, p, print_relation(cur_.disjuncts[d][p]), ""});
      }
      if (fa < from.size()) ++p;
      fi = fa + 1;
      tj = ta + 1;
    }
  }

  void relation(std::size_t d, std::size_t p, const Relation& from, const Relation& to) {
    const std::string before = print_relation(from), after = print_relation(to);
    if (from.lhs == to.lhs && from.rhs == to.rhs) {
      push({EditKind::OperatorReplace, d, p, before, after});
    } else if (from.op == to.op && same_shape(from.lhs, to.lhs) && same_shape(from.rhs, to.rhs)) {
      push({EditKind::ThresholdAdjust, d, p, before, after});
    } else {
      push({EditKind::AddConjunct, d, p, "", after});
      push({EditKind::RemoveConjunct, d, p + 1, before, ""});
    }
  }

  void push(Edit edit) {
    cur_ = apply_edit(cur_, edit);
    edits_.push_back(std::move(edit));
  }

  RuleAst cur_;
  std::vector<Edit> edits_;
};

}  // namespace

std::string_view to_string(EditKind kind) {
  for (const auto& [k, name] : kEditNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<EditKind> edit_kind_from_string(std::string_view text) {
  for (const auto& [k, name] : kEditNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

RuleAst apply_edit(const RuleAst& ast, const Edit& edit) {
  RuleAst out = ast;
  switch (edit.kind) {
    case EditKind::ThresholdAdjust:
    case EditKind::OperatorReplace:
      relation_at(out, edit) = parse_relation_fragment(edit.after);
      break;
    case EditKind::AddConjunct: {
      Conjunct& conj = disjunct_at(out, edit);
      if (edit.relation > conj.size()) throw EditError("AddConjunct: relation index out of range");
      conj.insert(conj.begin() + static_cast<std::ptrdiff_t>(edit.relation), parse_relation_fragment(edit.after));
      break;
    }
    case EditKind::RemoveConjunct: {
      relation_at(out, edit);
      Conjunct& conj = out.disjuncts[edit.disjunct];
      if (conj.size() == 1) throw EditError("RemoveConjunct: would leave an empty disjunct");
      conj.erase(conj.begin() + static_cast<std::ptrdiff_t>(edit.relation));
      break;
    }
    case EditKind::AddDisjunct:
      if (edit.disjunct > out.disjuncts.size()) throw EditError("AddDisjunct: disjunct index out of range");
      out.disjuncts.insert(out.disjuncts.begin() + static_cast<std::ptrdiff_t>(edit.disjunct),
                           parse_conjunct_fragment(edit.after));
      break;
    case EditKind::RemoveDisjunct: {
      const Conjunct& conj = disjunct_at(out, edit);
      if (print_conjunct(conj) != edit.before) {
        throw EditError("RemoveDisjunct: expected '" + edit.before + "', found '" + print_conjunct(conj) + "'");
      }
      if (out.disjuncts.size() == 1) throw EditError("RemoveDisjunct: would leave an empty rule");
      out.disjuncts.erase(out.disjuncts.begin() + static_cast<std::ptrdiff_t>(edit.disjunct));
      break;
    }
  }
  return out;
}

RuleAst replay(const RuleAst& ast, std::span<const Edit> edits) {
  RuleAst out = ast;
  for (const auto& e : edits) out = apply_edit(out, e);
  return out;
}

std::vector<Edit> diff_rules(const RuleAst& from, const RuleAst& to) {
  Differ differ(from);
  differ.rule(to);
  return differ.take();
}

}  // namespace ruleforge
