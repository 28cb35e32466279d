#include "ruleforge/candidates.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

#include "ruleforge/grammar.hpp"
#include "ruleforge/vocabulary.hpp"

namespace ruleforge {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

std::string join(const std::vector<std::string_view>& lines, std::string_view sep) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += sep;
    out += l;
  }
  return out;
}

std::string format_binding(const Binding& x) {
  std::string out = "{";
  for (const auto& [k, v] : x) {
    if (out.size() > 1) out += ", ";
    out += k + ": " + format_number(v);
  }
  return out + "}";
}

std::string format_delta(const Binding& delta) {
  std::string out = "{";
  for (const auto& [k, v] : delta) {
    if (v == 0.0) continue;
    if (out.size() > 1) out += ", ";
    out += k + ": " + (v > 0 ? "+" : "") + format_number(v);
  }
  return out + "}";
}

// "RULE:" / "**Rule:**" / "## EXPLANATION:" -> the text after the label.
std::optional<std::string_view> after_label(std::string_view line, std::string_view label) {
  std::string_view s = trim(line);
  while (!s.empty() && (s.front() == '*' || s.front() == '#' || s.front() == '-')) s.remove_prefix(1);
  s = trim(s);
  if (s.size() < label.size()) return std::nullopt;
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(s[i])) != label[i]) return std::nullopt;
  }
  s.remove_prefix(label.size());
  while (!s.empty() && s.front() == '*') s.remove_prefix(1);
  if (s.empty() || s.front() != ':') return std::nullopt;
  s.remove_prefix(1);
  while (!s.empty() && s.front() == '*') s.remove_prefix(1);
  return trim(s);
}

bool is_fence(std::string_view line) { return trim(line).starts_with("```"); }

bool looks_like_list_or_tuple(std::string_view text) {
  text = trim(text);
  return text.starts_with("[") || text.starts_with("('") || text.starts_with("(\"");
}

std::string strip_inline_code(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '`' && s.back() == '`') {
    s.remove_prefix(1);
    s.remove_suffix(1);
  }
  return std::string(trim(s));
}

struct Sections {
  std::vector<std::string_view> rule_lines;
  std::optional<std::string> explanation;
};

// Splits a response into rule-bearing lines and an explanation. With a
// RULE: label only the labeled block is considered; otherwise every line.
Sections split_sections(std::string_view raw) {
  const auto lines = split_lines(raw);
  Sections out;
  std::optional<std::size_t> rule_at, expl_at;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!rule_at && after_label(lines[i], "RULE")) rule_at = i;
    if (!expl_at && after_label(lines[i], "EXPLANATION")) expl_at = i;
  }
  if (expl_at) {
    std::vector<std::string_view> text;
    const auto first = *after_label(lines[*expl_at], "EXPLANATION");
    if (!first.empty()) text.push_back(first);
    for (std::size_t i = *expl_at + 1; i < lines.size(); ++i) {
      if (rule_at && i == *rule_at) break;
      if (!is_fence(lines[i])) text.push_back(trim(lines[i]));
    }
    while (!text.empty() && text.back().empty()) text.pop_back();
    out.explanation = join(text, "\n");
  }
  const std::size_t end = (expl_at && (!rule_at || *expl_at > *rule_at)) ? *expl_at : lines.size();
  if (rule_at) {
    const auto first = *after_label(lines[*rule_at], "RULE");
    if (!first.empty()) out.rule_lines.push_back(first);
    for (std::size_t i = *rule_at + 1; i < end; ++i) {
      if (out.rule_lines.size() > 0 && trim(lines[i]).empty() && !is_fence(lines[i])) {
        // A blank line closes the rule block unless we are inside a fence.
        bool open_fence = false;
        for (std::size_t j = *rule_at + 1; j < i; ++j) open_fence ^= is_fence(lines[j]);
        if (!open_fence) break;
      }
      out.rule_lines.push_back(lines[i]);
    }
  } else {
    for (std::size_t i = 0; i < end; ++i) out.rule_lines.push_back(lines[i]);
  }
  return out;
}

// Lines inside the first fenced block if there is one; else all non-fence lines.
std::vector<std::string_view> unfence(const std::vector<std::string_view>& lines) {
  std::vector<std::string_view> inside;
  bool in = false, seen = false;
  for (const auto& l : lines) {
    if (is_fence(l)) {
      if (in) break;
      in = seen = true;
      continue;
    }
    if (in) inside.push_back(l);
  }
  if (seen) return inside;
  std::vector<std::string_view> out;
  for (const auto& l : lines) {
    if (!is_fence(l)) out.push_back(l);
  }
  return out;
}

}  // namespace

std::string_view to_string(CandidateSource s) {
  switch (s) {
    case CandidateSource::Deterministic: return "Deterministic";
    case CandidateSource::LLM: return "LLM";
    case CandidateSource::Mock: return "Mock";
  }
  return "?";
}

std::string_view to_string(RejectionReason r) {
  switch (r) {
    case RejectionReason::Empty: return "Empty";
    case RejectionReason::ListTupleForm: return "ListTupleForm";
    case RejectionReason::ParseFailure: return "ParseFailure";
    case RejectionReason::Vocabulary: return "Vocabulary";
  }
  return "?";
}

void validate(const RefinementContext& ctx) {
  for (std::size_t i = 0; i < ctx.historical.size(); ++i) {
    const auto& h = ctx.historical[i];
    if (h.id == ctx.target.id) throw RuleError("target rule '" + h.id + "' also listed as historical");
    if (h.polarity == ctx.target.polarity && h.ast == ctx.target.ast) {
      throw RuleError("historical rule '" + h.id + "' duplicates the target rule");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (ctx.historical[j].id == h.id) throw RuleError("historical rule id '" + h.id + "' repeats");
    }
  }
}

std::string default_grammar_doc() { return std::string(grammar_ebnf()); }

std::string build_prompt(const RefinementContext& ctx) {
  validate(ctx);
  std::ostringstream out;
  out << "You refine operational rules for a system under test. A pass rule that holds on an input\n"
         "predicts Pass; a fail rule that holds predicts Fail.\n\n";

  out << "## Grammar\n" << (ctx.grammar_doc.empty() ? default_grammar_doc() : ctx.grammar_doc) << "\n\n";

  out << "## Allowed vocabulary\nRelational operators:";
  for (RelOp op : ctx.allowed_ops) out << ' ' << to_string(op);
  out << "\nArithmetic operators: + - * /\nConnectives: and or\nVariables (operational design domain):\n";
  for (const auto& v : ctx.odd.variables()) {
    out << "- " << v.name << " in [" << format_number(v.min) << ", " << format_number(v.max) << "], step "
        << format_number(v.step) << '\n';
  }
  out << "No other identifiers, functions, lists, tuples or quoted strings are allowed.\n\n";

  out << "## Inconsistent rule\n" << ctx.target.id << " (" << to_string(ctx.target.polarity)
      << " rule): " << print_rule(ctx.target.ast) << "\n\n";

  out << "## Historical rules (must stay consistent)\n";
  if (ctx.historical.empty()) out << "(none)\n";
  for (const auto& h : ctx.historical) {
    out << "- " << h.id << " (" << to_string(h.polarity) << " rule): " << print_rule(h.ast) << '\n';
  }
  out << '\n';

  out << "## Evidence\n";
  if (!ctx.evidence.dataset_ref.empty()) out << "Dataset: " << ctx.evidence.dataset_ref << '\n';
  out << "Counterfactual pairs (input, observed outcome -> minimally changed input, flipped outcome):\n";
  for (const auto& p : ctx.evidence.pairs) {
    out << "- run " << p.run_index << ": x = " << format_binding(p.x) << " (" << to_string(p.y) << ") -> x' = "
        << format_binding(p.x_cf) << " (" << to_string(p.y_cf) << "); delta = " << format_delta(p.delta)
        << "; L1 = " << format_number(p.l1) << '\n';
  }
  if (!ctx.evidence.unresolved.empty()) {
    out << "Runs without a counterfactual:";
    for (const auto& u : ctx.evidence.unresolved) out << ' ' << u.run_index << " (" << to_string(u.reason) << ')';
    out << '\n';
  }
  out << '\n';

  out << "## Format exemplar\n" << kFormatExemplar << "\n\n";

  out << "## Task\n"
         "Return a refined version of the inconsistent rule that no longer disagrees with the observed\n"
         "outcomes in the evidence, using only threshold adjustments, operator replacements, or the\n"
         "addition or removal of conjuncts and disjuncts. Keep the change as small as possible, keep\n"
         "every historical rule consistent, and do not create overlap with rules of the opposite polarity.\n"
         "Answer in exactly this form, with the rule on a single line:\n"
         "RULE: <refined rule>\n"
         "EXPLANATION: <why the change resolves the evidence>\n";

  if (ctx.failure_summary) {
    out << "\n## Previous attempt failed\n" << *ctx.failure_summary << '\n';
  }
  return out.str();
}

ParsedResponse parse_candidate_response(std::string_view raw, const OddSpec& odd) {
  return parse_candidate_response(raw, odd, kAllRelOps);
}

ParsedResponse parse_candidate_response(std::string_view raw, const OddSpec& odd,
                                        std::span<const RelOp> allowed_ops) {
  if (trim(raw).empty()) return RejectedResponse{RejectionReason::Empty, "empty response"};

  const Sections sections = split_sections(raw);
  std::vector<std::string_view> lines = unfence(sections.rule_lines);
  std::vector<std::string> cleaned;
  for (const auto& l : lines) {
    std::string c = strip_inline_code(l);
    if (!c.empty()) cleaned.push_back(std::move(c));
  }
  if (cleaned.empty()) return RejectedResponse{RejectionReason::Empty, "no rule found in response"};

  // Whole block first, then the first parseable line.
  std::optional<RuleAst> ast;
  std::string rule_text;
  std::string first_error;
  bool saw_structure = false;
  std::vector<std::string> attempts;
  attempts.push_back(std::accumulate(std::next(cleaned.begin()), cleaned.end(), cleaned.front(),
                                     [](std::string a, const std::string& b) { return a + " " + b; }));
  if (cleaned.size() > 1) attempts.insert(attempts.end(), cleaned.begin(), cleaned.end());
  for (const auto& text : attempts) {
    if (looks_like_list_or_tuple(text)) {
      saw_structure = true;
      continue;
    }
    try {
      ast = parse_rule(text);
      rule_text = text;
      break;
    } catch (const ParseError& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!ast) {
    if (saw_structure) return RejectedResponse{RejectionReason::ListTupleForm, "structural violation: list/tuple form"};
    return RejectedResponse{RejectionReason::ParseFailure, "parse error: " + first_error};
  }

  const auto violations = check_vocabulary(*ast, odd, allowed_ops);
  if (!violations.empty()) {
    return RejectedResponse{RejectionReason::Vocabulary, "vocabulary violation: " + summarize(violations)};
  }

  RefinementCandidate cand;
  cand.ast = std::move(*ast);
  cand.raw_rule_text = rule_text;
  if (sections.explanation) {
    cand.explanation = *sections.explanation;
  } else {
    // Unlabeled: every non-rule, non-fence line is explanation.
    std::vector<std::string_view> rest;
    for (const auto& l : split_lines(raw)) {
      if (is_fence(l) || trim(l).empty() || strip_inline_code(l) == rule_text) continue;
      rest.push_back(trim(l));
    }
    cand.explanation = join(rest, "\n");
  }
  return cand;
}

// ---- Deterministic generator ---------------------------------------------

namespace {

struct Enumerator {
  const RefinementContext& ctx;
  std::vector<ScoredEdit> out;

  void offer(const RuleAst& ast, Edit edit, std::size_t pair) {
    if (ast == ctx.target.ast) return;
    for (const auto& c : out) {
      if (c.ast == ast) return;
    }
    for (const auto& r : ctx.rejected) {
      if (r == ast) return;
    }
    if (!check_vocabulary(ast, ctx.odd, ctx.allowed_ops).empty()) return;
    out.push_back({ast, std::move(edit), 0, pair});
  }

  double midpoint(const CounterfactualPair& p, const OddVariable& var) const {
    const double a = p.x.at(var.name), b = p.x_cf.at(var.name);
    return round_to_places((a + b) / 2.0, decimal_places(var.step) + 1);
  }
};

bool changed(const CounterfactualPair& p, const std::string& f) {
  const auto it = p.delta.find(f);
  return it != p.delta.end() && it->second != 0.0;
}

}  // namespace

std::vector<ScoredEdit> enumerate_single_edits(const RefinementContext& ctx) {
  const RuleAst& target = ctx.target.ast;
  std::vector<std::size_t> order(ctx.evidence.pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = ctx.evidence.pairs[a];
    const auto& pb = ctx.evidence.pairs[b];
    if (pa.l1_steps != pb.l1_steps) return pa.l1_steps < pb.l1_steps;
    return pa.run_index < pb.run_index;
  });

  Enumerator en{ctx, {}};
  auto each_bound = [&](auto&& fn) {
    for (std::size_t d = 0; d < target.disjuncts.size(); ++d) {
      for (std::size_t r = 0; r < target.disjuncts[d].size(); ++r) {
        BoundView b;
        if (as_bound(target.disjuncts[d][r], b)) fn(d, r, b);
      }
    }
  };

  for (std::size_t pi : order) {
    const auto& pair = ctx.evidence.pairs[pi];
    each_bound([&](std::size_t d, std::size_t r, const BoundView& b) {
      if (!changed(pair, b.variable)) return;
      const OddVariable* var = ctx.odd.find(b.variable);
      if (!var || !pair.x.contains(b.variable) || !pair.x_cf.contains(b.variable)) return;
      const Relation& old = target.disjuncts[d][r];
      const Expr mid = Expr::constant(en.midpoint(pair, *var));
      const Relation rel = old.lhs.is_variable() ? Relation{old.lhs, old.op, mid} : Relation{mid, old.op, old.rhs};
      if (rel == old) return;
      RuleAst ast = target;
      ast.disjuncts[d][r] = rel;
      en.offer(ast, {EditKind::ThresholdAdjust, d, r, print_relation(old), print_relation(rel)}, pi);
    });
  }

  for (std::size_t pi : order) {
    const auto& pair = ctx.evidence.pairs[pi];
    each_bound([&](std::size_t d, std::size_t r, const BoundView& b) {
      if (!changed(pair, b.variable)) return;
      const Relation& old = target.disjuncts[d][r];
      RelOp swapped;
      switch (old.op) {
        case RelOp::Lt: swapped = RelOp::Le; break;
        case RelOp::Le: swapped = RelOp::Lt; break;
        case RelOp::Gt: swapped = RelOp::Ge; break;
        case RelOp::Ge: swapped = RelOp::Gt; break;
        default: return;
      }
      const Relation rel{old.lhs, swapped, old.rhs};
      RuleAst ast = target;
      ast.disjuncts[d][r] = rel;
      en.offer(ast, {EditKind::OperatorReplace, d, r, print_relation(old), print_relation(rel)}, pi);
    });
  }

  for (std::size_t pi : order) {
    const auto& pair = ctx.evidence.pairs[pi];
    for (const auto& var : ctx.odd.variables()) {
      if (!changed(pair, var.name) || !pair.x.contains(var.name) || !pair.x_cf.contains(var.name)) continue;
      const RelOp op = pair.x_cf.at(var.name) < pair.x.at(var.name) ? RelOp::Lt : RelOp::Gt;
      const Relation rel{Expr::variable(var.name), op, Expr::constant(en.midpoint(pair, var))};
      for (std::size_t d = 0; d < target.disjuncts.size(); ++d) {
        RuleAst single{{target.disjuncts[d]}};
        bool holds = false;
        try {
          holds = evaluate(single, pair.x, ctx.eps_eq);
        } catch (const UnboundVariable&) {
          continue;
        }
        if (!holds) continue;
        RuleAst ast = target;
        const std::size_t at = ast.disjuncts[d].size();
        ast.disjuncts[d].push_back(rel);
        en.offer(ast, {EditKind::AddConjunct, d, at, "", print_relation(rel)}, pi);
      }
    }
  }

  for (std::size_t d = 0; d < target.disjuncts.size(); ++d) {
    if (target.disjuncts[d].size() < 2) continue;
    for (std::size_t r = 0; r < target.disjuncts[d].size(); ++r) {
      RuleAst ast = target;
      ast.disjuncts[d].erase(ast.disjuncts[d].begin() + static_cast<std::ptrdiff_t>(r));
      en.offer(ast, {EditKind::RemoveConjunct, d, r, print_relation(target.disjuncts[d][r]), ""}, 0);
    }
  }
  if (target.disjuncts.size() > 1) {
    for (std::size_t d = 0; d < target.disjuncts.size(); ++d) {
      RuleAst ast = target;
      ast.disjuncts.erase(ast.disjuncts.begin() + static_cast<std::ptrdiff_t>(d));
      en.offer(ast, {EditKind::RemoveDisjunct, d, 0, print_conjunct(target.disjuncts[d]), ""}, 0);
    }
  }

  for (auto& c : en.out) {
    c.n_mismatch = decisiveness({ctx.target.id, ctx.target.polarity, c.ast}, ctx.dataset, ctx.eps_eq).n_mismatch;
  }
  return en.out;
}

GenerationResult DeterministicGenerator::generate(const RefinementContext& ctx, int attempt) {
  validate(ctx);
  if (ctx.evidence.pairs.empty()) return GenerationFailure{"evidence has no counterfactual pair"};
  if (ctx.dataset.empty()) return GenerationFailure{"no dataset to score candidates on"};

  const std::size_t before =
      decisiveness(ctx.target, ctx.dataset, ctx.eps_eq).n_mismatch;
  const auto scored = enumerate_single_edits(ctx);
  // Every candidate is a single edit, so the tie-break falls to enumeration order.
  const ScoredEdit* best = nullptr;
  for (const auto& c : scored) {
    if (!best || c.n_mismatch < best->n_mismatch) best = &c;
  }
  if (!best || best->n_mismatch >= before) return GenerationFailure{"no improving edit"};

  RefinementCandidate cand;
  cand.ast = best->ast;
  cand.raw_rule_text = print_rule(best->ast);
  cand.change_log = {best->edit};
  cand.source = CandidateSource::Deterministic;
  cand.attempt = attempt;

  std::ostringstream why;
  why << to_string(best->edit.kind) << ": ";
  if (best->edit.before.empty()) {
    why << "added " << best->edit.after;
  } else if (best->edit.after.empty()) {
    why << "removed " << best->edit.before;
  } else {
    why << best->edit.before << " -> " << best->edit.after;
  }
  why << ".";
  if (best->edit.kind != EditKind::RemoveConjunct && best->edit.kind != EditKind::RemoveDisjunct) {
    const auto& pair = ctx.evidence.pairs[best->evidence_pair];
    why << " Counterfactual for run " << pair.run_index << " moves " << format_delta(pair.delta) << " and flips "
        << to_string(pair.y) << " to " << to_string(pair.y_cf)
        << "; the new bound sits at the midpoint between the two inputs.";
  }
  why << " Mismatches on the dataset: " << before << " -> " << best->n_mismatch << ".";
  cand.explanation = why.str();
  return cand;
}

// ---- Mock and shared plumbing ---------------------------------------------

MockGenerator::MockGenerator(std::vector<std::string> responses) : responses_(std::move(responses)) {
  if (responses_.empty()) throw RuleError("mock generator needs at least one scripted response");
}

GenerationResult MockGenerator::generate(const RefinementContext& ctx, int attempt) {
  const std::string& raw = responses_[std::min(calls_, responses_.size() - 1)];
  ++calls_;
  return candidate_from_response(raw, ctx, CandidateSource::Mock, attempt);
}

GenerationResult candidate_from_response(std::string_view raw, const RefinementContext& ctx,
                                         CandidateSource source, int attempt) {
  ParsedResponse parsed = parse_candidate_response(raw, ctx.odd, ctx.allowed_ops);
  if (auto* rej = std::get_if<RejectedResponse>(&parsed)) return GenerationFailure{rej->summary};
  auto cand = std::get<RefinementCandidate>(std::move(parsed));
  cand.change_log = diff_rules(ctx.target.ast, cand.ast);
  cand.source = source;
  cand.attempt = attempt;
  return cand;
}

GenerationResult generate_candidate(CandidateGenerator& generator, const RefinementContext& ctx, int attempt) {
  validate(ctx);
  if (ctx.evidence.pairs.empty()) return GenerationFailure{"evidence has no counterfactual pair"};
  return generator.generate(ctx, attempt);
}

}  // namespace ruleforge
