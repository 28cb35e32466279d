#include "ruleforge/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "ruleforge/grammar.hpp"

namespace ruleforge {

SemanticValidity semantic_validity(const RuleAst& ast, const OddSpec& odd) {
  return semantic_validity(ast, odd, kAllRelOps);
}

SemanticValidity semantic_validity(const RuleAst& ast, const OddSpec& odd, std::span<const RelOp> allowed_ops) {
  SemanticValidity out;
  out.violations = check_vocabulary(ast, odd, allowed_ops);
  out.n_pred = relation_count(ast);
  std::set<std::pair<std::size_t, std::size_t>> invalid;
  for (const auto& v : out.violations) invalid.insert({v.disjunct, v.relation});
  out.n_invalid = invalid.size();
  out.sv = out.n_pred == 0 ? 1.0
                           : 1.0 - static_cast<double>(out.n_invalid) / static_cast<double>(out.n_pred);
  return out;
}

GrammarCompliance grammar_compliance(std::string_view raw) {
  GrammarCompliance out;
  const auto tokens = tokenize(raw);
  out.n_tok = tokens.size();
  if (tokens.empty()) {
    out.gc = 0.0;
    out.empty_input = true;
    return out;
  }

  std::vector<std::size_t> kept;  // indices into tokens
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind == TokenKind::Garbage) {
      out.discarded.push_back(i);
    } else {
      kept.push_back(i);
    }
  }

  while (!kept.empty()) {
    std::vector<Token> stream;
    for (std::size_t i : kept) stream.push_back(tokens[i]);
    try {
      parse_tokens(stream, raw.size());
      break;
    } catch (const ParseError& e) {
      std::size_t at = e.token_index();
      if (at >= stream.size()) {
        std::vector<std::size_t> open;
        for (std::size_t k = 0; k < stream.size(); ++k) {
          if (stream[k].kind == TokenKind::LParen) open.push_back(k);
          if (stream[k].kind == TokenKind::RParen && !open.empty()) open.pop_back();
        }
        at = open.empty() ? stream.size() - 1 : open.back();
      }
      out.discarded.push_back(kept[at]);
      kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(at));
    }
  }
  std::sort(out.discarded.begin(), out.discarded.end());
  out.n_viol = out.discarded.size();
  out.gc = 1.0 - static_cast<double>(out.n_viol) / static_cast<double>(out.n_tok);
  return out;
}

std::string_view to_string(CmBand b) {
  switch (b) {
    case CmBand::Optimal: return "Optimal";
    case CmBand::Conservative: return "Conservative";
    case CmBand::OverConstrained: return "OverConstrained";
    case CmBand::Low: return "Low";
  }
  return "?";
}

namespace {

struct Pred {
  std::size_t disjunct;
  Relation rel;
  std::optional<BoundView> bound;
  std::string key;  // canonical text of the normalized relation
  std::vector<std::string> vars;
};

std::vector<Pred> flatten(const RuleAst& ast) {
  std::vector<Pred> out;
  for (std::size_t d = 0; d < ast.disjuncts.size(); ++d) {
    for (const auto& rel : ast.disjuncts[d]) {
      Pred p{d, rel, std::nullopt, {}, variables_of(rel)};
      BoundView b;
      if (as_bound(rel, b)) {
        p.bound = b;
        p.key = print_relation({Expr::variable(b.variable), b.op, Expr::constant(b.bound)});
      } else {
        p.key = print_relation(rel);
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

int direction(RelOp op) {
  switch (op) {
    case RelOp::Lt:
    case RelOp::Le: return -1;
    case RelOp::Gt:
    case RelOp::Ge: return 1;
    default: return 0;
  }
}

// `weak` is implied by `strong`: same variable and direction, and strong is
// at least as tight.
bool implies(const BoundView& strong, const BoundView& weak) {
  if (strong.variable != weak.variable) return false;
  const int d = direction(weak.op);
  if (d == 0 || direction(strong.op) != d) return false;
  if (strong.bound == weak.bound) return is_strict(strong.op) || !is_strict(weak.op);
  return d > 0 ? strong.bound > weak.bound : strong.bound < weak.bound;
}

struct Sides {
  bool lower = false;
  bool upper = false;
};

std::map<std::string, Sides> sides_of(const std::vector<Pred>& preds) {
  std::map<std::string, Sides> out;
  for (const auto& p : preds) {
    if (!p.bound) continue;
    auto& s = out[p.bound->variable];
    const int d = direction(p.bound->op);
    const bool eq = p.bound->op == RelOp::Eq;
    s.lower = s.lower || d > 0 || eq;
    s.upper = s.upper || d < 0 || eq;
  }
  return out;
}

double clamp_band(double mid, double lo, double hi, double uf) {
  return std::clamp(mid + 0.05 * (2.0 * uf - 1.0), lo, hi);
}

}  // namespace

ChangeMinimality change_minimality(const RuleAst& original, const RuleAst& refined) {
  const auto orig = flatten(original);
  const auto ref = flatten(refined);
  std::vector<bool> o_used(orig.size(), false), r_used(ref.size(), false);
  std::set<std::string> moved_vars;  // variables whose original bound was shifted or changed operator
  EditStats s;
  s.original = orig.size();
  s.refined = ref.size();

  for (std::size_t i = 0; i < orig.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (!r_used[j] && orig[i].key == ref[j].key) {
        o_used[i] = r_used[j] = true;
        ++s.unchanged;
        break;
      }
    }
  }
  auto align = [&](auto&& match, std::size_t& counter) {
    for (std::size_t i = 0; i < orig.size(); ++i) {
      if (o_used[i] || !orig[i].bound) continue;
      for (std::size_t j = 0; j < ref.size(); ++j) {
        if (r_used[j] || !ref[j].bound) continue;
        if (orig[i].bound->variable == ref[j].bound->variable && match(*orig[i].bound, *ref[j].bound)) {
          o_used[i] = r_used[j] = true;
          moved_vars.insert(orig[i].bound->variable);
          ++counter;
          break;
        }
      }
    }
  };
  align([](const BoundView& a, const BoundView& b) { return a.op == b.op; }, s.threshold_shifted);
  align([](const BoundView&, const BoundView&) { return true; }, s.operator_changed);

  for (std::size_t i = 0; i < orig.size(); ++i) {
    if (o_used[i]) continue;
    bool redundant = false;
    if (orig[i].bound) {
      for (std::size_t k = 0; k < orig.size() && !redundant; ++k) {
        redundant = k != i && orig[k].disjunct == orig[i].disjunct && orig[k].bound &&
                    implies(*orig[k].bound, *orig[i].bound) && (o_used[k] || !implies(*orig[i].bound, *orig[k].bound));
      }
    }
    ++(redundant ? s.removed_redundant : s.removed_other);
  }

  std::set<std::string> orig_vars;
  for (const auto& p : orig) orig_vars.insert(p.vars.begin(), p.vars.end());
  for (std::size_t j = 0; j < ref.size(); ++j) {
    if (r_used[j]) continue;
    const bool fresh = std::any_of(ref[j].vars.begin(), ref[j].vars.end(),
                                   [&](const std::string& v) { return !orig_vars.contains(v); });
    ++(fresh ? s.added_new_variable : s.added_existing);
  }

  const auto before = sides_of(orig), after = sides_of(ref);
  for (const auto& [var, sb] : before) {
    const auto it = after.find(var);
    if (sb.lower != sb.upper && it != after.end() && it->second.lower && it->second.upper && moved_vars.contains(var)) {
      s.narrowed_one_sided = true;
    }
  }

  const std::size_t added = s.added_existing + s.added_new_variable;
  const std::size_t changed = s.threshold_shifted + s.operator_changed + s.removed_other + added;
  s.unchanged_fraction = s.original == 0 ? 1.0 : static_cast<double>(s.unchanged) / static_cast<double>(s.original);
  s.changed_fraction = (s.original + added) == 0
                           ? 0.0
                           : static_cast<double>(changed) / static_cast<double>(s.original + added);

  ChangeMinimality out;
  out.stats = s;
  const double uf = s.unchanged_fraction;
  if (changed == 0) {
    out.band = CmBand::Optimal;
    out.cm = 1.0;
  } else if (s.added_new_variable > 0) {
    out.band = CmBand::Low;
    out.cm = clamp_band(0.15, 0.0, 0.3, uf);
  } else if (s.narrowed_one_sided) {
    out.band = CmBand::OverConstrained;
    out.cm = clamp_band(0.45, 0.4, 0.5, uf);
  } else if (s.changed_fraction > 0.5) {
    out.band = CmBand::Low;
    out.cm = clamp_band(0.15, 0.0, 0.3, uf);
  } else if (added > 0) {
    out.band = CmBand::Conservative;
    out.cm = clamp_band(0.75, 0.7, 0.8, uf);
  } else if (s.operator_changed == 0 && s.removed_other == 0 && uf >= 2.0 / 3.0) {
    out.band = CmBand::Optimal;
    out.cm = 1.0;
  } else {
    out.band = CmBand::Conservative;
    out.cm = clamp_band(0.75, 0.7, 0.8, uf);
  }
  return out;
}

MetricsReport compute_metrics(const PolarizedRule& original, const RuleAst& refined, std::string_view refined_raw,
                              std::span<const LabeledRun> dataset, const OddSpec& odd, double eps_eq) {
  MetricsReport out;
  out.dg_before = decisiveness(original, dataset, eps_eq).dg;
  out.dg_after = decisiveness({original.id, original.polarity, refined}, dataset, eps_eq).dg;
  out.dg_gain = out.dg_after - out.dg_before;
  out.sv = semantic_validity(refined, odd);
  out.gc = grammar_compliance(refined_raw.empty() ? std::string_view(print_rule(refined)) : refined_raw);
  out.cm = change_minimality(original.ast, refined);
  return out;
}

std::string render_metrics_table(std::span<const std::pair<std::string, MetricsReport>> rows) {
  std::size_t width = 7;
  for (const auto& [name, _] : rows) width = std::max(width, name.size());
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  auto fixed2 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << pad("Variant", width) << "  " << pad("GC", 6) << pad("SV", 6) << pad("I", 6) << "CM\n";
  for (const auto& [name, m] : rows) {
    out << pad(name, width) << "  " << pad(fixed2(m.gc.gc), 6) << pad(fixed2(m.sv.sv), 6) << pad("n/a", 6)
        << fixed2(m.cm.cm) << " (" << to_string(m.cm.band) << ")\n";
  }
  return out.str();
}

}  // namespace ruleforge
