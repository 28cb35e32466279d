#include "ruleforge/validation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ruleforge/grammar.hpp"
#include "ruleforge/interval.hpp"
#include "ruleforge/rng.hpp"
#include "ruleforge/vocabulary.hpp"

namespace ruleforge {

namespace {

enum class Sat { Yes, No, Unknown };

class PairChecker {
 public:
  PairChecker(const RuleAst& a, const RuleAst& b, const OddSpec& odd, const ContradictionBudget& budget,
              double eps)
      : a_(a), b_(b), odd_(odd), budget_(budget), eps_(eps) {
    for (const auto& v : variables_of(a)) add_var(v);
    for (const auto& v : variables_of(b)) add_var(v);
    for (const auto& v : odd.variables()) base_[v.name] = v.min;
  }

  ContradictionResult run(std::span<const LabeledRun> seeds) {
    if (!unknown_var_) {
      if (auto w = from_seeds(seeds)) return flagged(*w);
      if (auto w = from_grid()) return flagged(*w);
      if (auto w = from_samples()) return flagged(*w);
    }
    if (unknown_var_) return {ContradictionStatus::Unknown, std::nullopt, {}};

    bool all_refuted = true;
    for (const auto& ca : a_.disjuncts) {
      for (const auto& cb : b_.disjuncts) {
        Conjunct conj = ca;
        conj.insert(conj.end(), cb.begin(), cb.end());
        Box box;
        for (const auto* v : vars_) box[v->name] = {v->min, v->max, Interval::Defined::Yes};
        Binding witness;
        switch (solve(conj, box, 0, witness)) {
          case Sat::Yes:
            if (holds_both(witness)) return flagged(witness);
            all_refuted = false;
            break;
          case Sat::Unknown: all_refuted = false; break;
          case Sat::No: break;
        }
      }
    }
    return {all_refuted ? ContradictionStatus::Clear : ContradictionStatus::Unknown, std::nullopt, {}};
  }

 private:
  void add_var(const std::string& name) {
    const OddVariable* v = odd_.find(name);
    if (!v) {
      unknown_var_ = true;
      return;
    }
    if (std::find(vars_.begin(), vars_.end(), v) == vars_.end()) vars_.push_back(v);
  }

  static ContradictionResult flagged(const Binding& w) { return {ContradictionStatus::Flagged, w, {}}; }

  bool holds_both(const Binding& x) const {
    return evaluate(a_, x, eps_) && evaluate(b_, x, eps_);
  }

  std::optional<Binding> from_seeds(std::span<const LabeledRun> seeds) const {
    for (const auto& run : seeds) {
      Binding x = base_;
      bool inside = true;
      for (const auto& v : odd_.variables()) {
        const auto it = run.x.find(v.name);
        if (it == run.x.end()) continue;
        if (it->second < v.min || it->second > v.max) inside = false;
        x[v.name] = it->second;
      }
      if (inside && holds_both(x)) return x;
    }
    return std::nullopt;
  }

  std::optional<Binding> from_grid() const {
    if (budget_.grid_cap == 0 || vars_.empty()) return std::nullopt;
    // Uniform stride so the coarse grid stays within the cap.
    std::int64_t stride = 1;
    auto points = [&](std::int64_t s) {
      double total = 1;
      for (const auto* v : vars_) total *= static_cast<double>((grid_count(*v) + s - 1) / s);
      return total;
    };
    while (points(stride) > static_cast<double>(budget_.grid_cap)) ++stride;

    std::vector<std::int64_t> idx(vars_.size(), 0);
    Binding x = base_;
    while (true) {
      for (std::size_t i = 0; i < vars_.size(); ++i) x[vars_[i]->name] = grid_value(*vars_[i], idx[i]);
      if (holds_both(x)) return x;
      std::size_t i = 0;
      for (; i < vars_.size(); ++i) {
        idx[i] += stride;
        if (idx[i] < grid_count(*vars_[i])) break;
        idx[i] = 0;
      }
      if (i == vars_.size()) break;
    }
    return std::nullopt;
  }

  std::optional<Binding> from_samples() const {
    Rng rng(budget_.seed);
    Binding x = base_;
    for (std::size_t s = 0; s < budget_.samples; ++s) {
      for (const auto* v : vars_) x[v->name] = v->min + rng.unit() * (v->max - v->min);
      if (holds_both(x)) return x;
    }
    return std::nullopt;
  }

  void contract(const Conjunct& conj, Box& box) const {
    for (const auto& rel : conj) {
      BoundView b;
      if (!as_bound(rel, b)) continue;
      auto it = box.find(b.variable);
      if (it == box.end()) continue;
      Interval& iv = it->second;
      switch (b.op) {
        case RelOp::Lt:
        case RelOp::Le: iv.hi = std::min(iv.hi, b.bound); break;
        case RelOp::Gt:
        case RelOp::Ge: iv.lo = std::max(iv.lo, b.bound); break;
        case RelOp::Eq: {
          // Tightest doubles with |x - bound| <= eps.
          double lo = b.bound - eps_, hi = b.bound + eps_;
          while (lo - b.bound < -eps_) lo = std::nextafter(lo, b.bound);
          while (hi - b.bound > eps_) hi = std::nextafter(hi, b.bound);
          iv.lo = std::max(iv.lo, lo);
          iv.hi = std::min(iv.hi, hi);
          break;
        }
        case RelOp::Ne: break;
      }
    }
  }

  bool conj_holds(const Conjunct& conj, const Binding& x) const {
    return std::all_of(conj.begin(), conj.end(), [&](const Relation& r) { return evaluate(r, x, eps_); });
  }

  // Concrete points inside the box: the grid point nearest the centre, then
  // the centre itself.
  bool probe(const Conjunct& conj, const Box& box, Binding& witness) const {
    Binding grid = base_, centre = base_;
    bool grid_inside = true;
    for (const auto* v : vars_) {
      const Interval& iv = box.at(v->name);
      const double c = iv.mid();
      centre[v->name] = c;
      const std::int64_t k =
          std::clamp<std::int64_t>(std::llround((c - v->min) / v->step), 0, grid_count(*v) - 1);
      const double g = grid_value(*v, k);
      grid[v->name] = g;
      if (g < iv.lo || g > iv.hi) grid_inside = false;
    }
    if (grid_inside && conj_holds(conj, grid)) {
      witness = grid;
      return true;
    }
    if (conj_holds(conj, centre)) {
      witness = centre;
      return true;
    }
    return false;
  }

  Sat solve(const Conjunct& conj, Box box, int depth, Binding& witness) const {
    contract(conj, box);
    for (const auto& [name, iv] : box) {
      if (iv.empty()) return Sat::No;
    }
    std::vector<const Relation*> open;
    for (const auto& rel : conj) {
      const Truth t = evaluate_interval(rel, box, eps_);
      if (t == Truth::False) return Sat::No;
      if (t == Truth::Unknown) open.push_back(&rel);
    }
    if (probe(conj, box, witness)) return Sat::Yes;
    if (depth >= budget_.max_depth || open.empty()) return Sat::Unknown;

    const OddVariable* widest = nullptr;
    double best = 0.0;
    for (const Relation* rel : open) {
      for (const auto& name : variables_of(*rel)) {
        const OddVariable* v = odd_.find(name);
        const double w = box.at(name).width() / v->step;
        if (w > best) {
          best = w;
          widest = v;
        }
      }
    }
    if (!widest) return Sat::Unknown;

    const double m = box.at(widest->name).mid();
    Box left = box, right = box;
    left[widest->name].hi = m;
    right[widest->name].lo = m;
    const Sat l = solve(conj, std::move(left), depth + 1, witness);
    if (l == Sat::Yes) return l;
    const Sat r = solve(conj, std::move(right), depth + 1, witness);
    if (r == Sat::Yes) return r;
    return (l == Sat::No && r == Sat::No) ? Sat::No : Sat::Unknown;
  }

  const RuleAst& a_;
  const RuleAst& b_;
  const OddSpec& odd_;
  const ContradictionBudget& budget_;
  double eps_;
  std::vector<const OddVariable*> vars_;
  bool unknown_var_ = false;
  Binding base_;
};

std::string format_binding(const Binding& x) {
  std::string out = "{";
  for (const auto& [k, v] : x) {
    if (out.size() > 1) out += ", ";
    out += k + ": " + format_number(v);
  }
  return out + "}";
}

std::string dg_text(double dg) { return format_number(round_to_places(dg, 4)); }

}  // namespace

std::string_view to_string(ContradictionStatus s) {
  switch (s) {
    case ContradictionStatus::Clear: return "Clear";
    case ContradictionStatus::Flagged: return "Flagged";
    case ContradictionStatus::Unknown: return "Unknown";
  }
  return "?";
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Generation: return "Generation";
    case Stage::Vocabulary: return "Vocabulary";
    case Stage::Contradiction: return "Contradiction";
    case Stage::Preservation: return "Preservation";
    case Stage::Resolution: return "Resolution";
    case Stage::Semantic: return "Semantic";
    case Stage::Accepted: return "Accepted";
  }
  return "?";
}

ContradictionResult check_pair(const RuleAst& a, const RuleAst& b, const OddSpec& odd,
                               const ContradictionBudget& budget, std::span<const LabeledRun> seeds, double eps_eq) {
  return PairChecker(a, b, odd, budget, eps_eq).run(seeds);
}

std::vector<ContradictionResult> check_contradiction(const PolarizedRule& candidate,
                                                     std::span<const PolarizedRule> opposing, const OddSpec& odd,
                                                     const ContradictionBudget& budget,
                                                     std::span<const LabeledRun> seeds, double eps_eq) {
  std::vector<ContradictionResult> out;
  for (const auto& rule : opposing) {
    if (rule.polarity == candidate.polarity) {
      throw RuleError("rule '" + rule.id + "' has the same polarity as '" + candidate.id + "'");
    }
    auto result = check_pair(candidate.ast, rule.ast, odd, budget, seeds, eps_eq);
    result.opposing_rule_id = rule.id;
    out.push_back(std::move(result));
  }
  return out;
}

PreservationReport check_preserved_consistency(const PolarizedRule& candidate, std::span<const PolarizedRule> ruleset,
                                               std::span<const LabeledRun> dataset, double eps_eq) {
  const auto target = std::find_if(ruleset.begin(), ruleset.end(),
                                   [&](const PolarizedRule& r) { return r.id == candidate.id; });
  if (target == ruleset.end()) throw TargetNotInRuleset(candidate.id);

  std::vector<PolarizedRule> substituted(ruleset.begin(), ruleset.end());
  const auto t = static_cast<std::size_t>(target - ruleset.begin());
  substituted[t] = candidate;

  PreservationReport report;
  for (std::size_t i = 0; i < ruleset.size(); ++i) {
    if (i == t) continue;
    for (const auto& run : dataset) {
      if (classify_consistency(ruleset[i], run, eps_eq) == Consistency::Consistent &&
          classify_consistency(substituted[i], run, eps_eq) == Consistency::Inconsistent) {
        report.broken_rule_ids.push_back(ruleset[i].id);
        break;
      }
    }
  }
  for (std::size_t k = 0; k < dataset.size(); ++k) {
    if (classify_consistency(candidate, dataset[k], eps_eq) == Consistency::Inconsistent &&
        classify_consistency(*target, dataset[k], eps_eq) != Consistency::Inconsistent) {
      report.new_inconsistent_runs.push_back(k);
    }
  }
  report.new_inconsistencies = report.new_inconsistent_runs.size();
  return report;
}

ResolutionReport check_target_resolution(const PolarizedRule& candidate, const PolarizedRule& target,
                                         std::span<const LabeledRun> dataset, double eps_eq) {
  return {decisiveness(target, dataset, eps_eq).n_mismatch, decisiveness(candidate, dataset, eps_eq).n_mismatch};
}

RefineResult refine_loop(const PolarizedRule& target, std::span<const PolarizedRule> ruleset,
                         std::span<const LabeledRun> dataset, Oracle& oracle, const OddSpec& odd,
                         CandidateGenerator& generator, const RefineOptions& options) {
  if (options.max_attempts < 1) throw RuleError("max_attempts must be at least 1");
  if (std::none_of(ruleset.begin(), ruleset.end(), [&](const PolarizedRule& r) { return r.id == target.id; })) {
    throw TargetNotInRuleset(target.id);
  }

  RefinementContext ctx;
  ctx.grammar_doc = options.grammar_doc.empty() ? default_grammar_doc() : options.grammar_doc;
  ctx.odd = odd;
  ctx.target = target;
  std::vector<PolarizedRule> opposing;
  for (const auto& r : ruleset) {
    if (r.id == target.id) continue;
    ctx.historical.push_back(r);
    if (r.polarity != target.polarity) opposing.push_back(r);
  }
  ctx.evidence = build_evidence(target, dataset, oracle, odd, options.search, options.dataset_ref, options.eps_eq);
  ctx.dataset = dataset;
  ctx.eps_eq = options.eps_eq;

  std::vector<ValidationReport> reports;
  std::string accumulated;
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    if (!accumulated.empty()) ctx.failure_summary = accumulated;
    ValidationReport report;
    report.attempt = attempt;

    auto reject = [&](Stage stage, std::string summary) {
      report.stage_reached = stage;
      report.failure_summary = std::move(summary);
      if (!accumulated.empty()) accumulated += '\n';
      accumulated += "attempt " + std::to_string(attempt) + ": " + report.failure_summary;
      reports.push_back(report);
    };

    GenerationResult generated = generate_candidate(generator, ctx, attempt);
    if (auto* failure = std::get_if<GenerationFailure>(&generated)) {
      reject(Stage::Generation, failure->summary);
      continue;
    }
    RefinementCandidate cand = std::get<RefinementCandidate>(std::move(generated));
    report.candidate_rule = print_rule(cand.ast);
    const PolarizedRule candidate{target.id, target.polarity, cand.ast};
    ctx.rejected.push_back(cand.ast);

    if (replay(target.ast, cand.change_log) != cand.ast) {
      reject(Stage::Generation, "change log does not replay to the candidate");
      continue;
    }
    if (const auto v = check_vocabulary(cand.ast, odd, ctx.allowed_ops); !v.empty()) {
      reject(Stage::Vocabulary, "vocabulary violation: " + summarize(v));
      continue;
    }

    bool contradicted = false;
    for (const auto& rule : opposing) {
      auto result = check_pair(cand.ast, rule.ast, odd, options.contradiction, dataset, options.eps_eq);
      result.opposing_rule_id = rule.id;
      if (result.status != ContradictionStatus::Clear) {
        report.contradiction = result;
        std::string summary = "contradiction " + std::string(to_string(result.status)) + " against " + rule.id;
        if (result.witness) summary += " at " + format_binding(*result.witness);
        reject(Stage::Contradiction, summary);
        contradicted = true;
        break;
      }
    }
    if (contradicted) continue;

    const auto preserved = check_preserved_consistency(candidate, ruleset, dataset, options.eps_eq);
    report.broken_rule_ids = preserved.broken_rule_ids;
    report.new_inconsistencies = preserved.new_inconsistencies;
    if (!preserved.broken_rule_ids.empty()) {
      std::string ids;
      for (const auto& id : preserved.broken_rule_ids) ids += (ids.empty() ? "" : ", ") + id;
      reject(Stage::Preservation, "breaks consistency of " + ids);
      continue;
    }

    report.resolution = check_target_resolution(candidate, target, dataset, options.eps_eq);
    if (report.resolution.mismatch_after >= report.resolution.mismatch_before) {
      reject(Stage::Resolution, "mismatches not reduced: " + std::to_string(report.resolution.mismatch_before) +
                                    " -> " + std::to_string(report.resolution.mismatch_after));
      continue;
    }

    const auto after = decisiveness(candidate, dataset, options.eps_eq);
    if (preserved.new_inconsistencies > 0) {
      reject(Stage::Semantic,
             "introduces " + std::to_string(preserved.new_inconsistencies) + " new inconsistent run(s)");
      continue;
    }
    if (after.fully_inconclusive) {
      reject(Stage::Semantic, "candidate holds on no run of the dataset");
      continue;
    }

    report.stage_reached = Stage::Accepted;
    report.accepted = true;
    reports.push_back(report);

    RefinementOutcome outcome;
    outcome.refined = candidate;
    outcome.candidate = std::move(cand);
    outcome.evidence = std::move(ctx.evidence);
    outcome.attempts = attempt;
    outcome.reports = std::move(reports);
    outcome.dg_before = decisiveness(target, dataset, options.eps_eq).dg;
    outcome.dg_after = after.dg;
    return outcome;
  }
  return Exhausted{std::move(ctx.evidence), std::move(reports)};
}

std::string render_report(const PolarizedRule& target, const RefineResult& result) {
  std::ostringstream out;
  out << "Target rule " << target.id << " (" << to_string(target.polarity) << "): " << print_rule(target.ast) << '\n';
  const std::vector<ValidationReport>* reports = nullptr;
  if (const auto* ok = std::get_if<RefinementOutcome>(&result)) {
    reports = &ok->reports;
    out << "Result: accepted on attempt " << ok->attempts << '\n'
        << "Refined rule: " << print_rule(ok->refined.ast) << '\n'
        << "DG: " << dg_text(ok->dg_before) << " -> " << dg_text(ok->dg_after) << '\n'
        << "Change log:\n";
    for (std::size_t i = 0; i < ok->candidate.change_log.size(); ++i) {
      const Edit& e = ok->candidate.change_log[i];
      out << "  " << i + 1 << ". " << to_string(e.kind) << " at disjunct " << e.disjunct;
      if (e.kind != EditKind::AddDisjunct && e.kind != EditKind::RemoveDisjunct) out << ", relation " << e.relation;
      out << ": " << (e.before.empty() ? "-" : e.before) << " => " << (e.after.empty() ? "-" : e.after) << '\n';
    }
    out << "Explanation:\n  " << (ok->candidate.explanation.empty() ? "(none)" : ok->candidate.explanation) << '\n';
  } else {
    const auto& ex = std::get<Exhausted>(result);
    reports = &ex.reports;
    out << "Result: exhausted after " << ex.reports.size() << " attempt(s)\n";
  }
  out << "Attempts:\n";
  for (const auto& r : *reports) {
    out << "  " << r.attempt << ". " << to_string(r.stage_reached);
    if (!r.candidate_rule.empty()) out << "  " << r.candidate_rule;
    if (r.accepted) {
      out << "  mismatches " << r.resolution.mismatch_before << " -> " << r.resolution.mismatch_after;
    } else {
      out << "  " << r.failure_summary;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace ruleforge
