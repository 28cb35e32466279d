#include "ruleforge/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "ruleforge/grammar.hpp"

namespace ruleforge {

std::string_view to_string(SearchFailure f) {
  return f == SearchFailure::NotFound ? "NotFound" : "BudgetExceeded";
}

namespace {

enum class Step { Continue, Found, OutOfBudget };

class RadiusSearch {
 public:
  RadiusSearch(const Binding& x, Outcome y, Oracle& oracle, const OddSpec& odd, std::size_t budget)
      : x_(x), y_(y), oracle_(oracle), odd_(odd), budget_(budget), offsets_(odd.size(), 0) {
    for (const auto& var : odd.variables()) {
      auto it = x.find(var.name);
      if (it == x.end()) throw UnboundVariable(var.name);
      base_.push_back(it->second);
      places_.push_back(std::max(decimal_places(var.step), decimal_places(it->second)));
    }
  }

  Step radius(int k) { return visit(0, k); }

  CounterfactualPair result(int k) const {
    CounterfactualPair pair;
    pair.x = x_;
    pair.y = y_;
    pair.x_cf = found_;
    pair.y_cf = found_outcome_;
    pair.l1_steps = k;
    int max_places = 0;
    for (std::size_t i = 0; i < odd_.size(); ++i) {
      const auto& var = odd_.variables()[i];
      const double d = round_to_places(static_cast<double>(hit_[i]) * var.step, decimal_places(var.step));
      pair.delta[var.name] = d;
      pair.l1 += std::fabs(d);
      max_places = std::max(max_places, decimal_places(var.step));
    }
    pair.l1 = round_to_places(pair.l1, max_places);
    return pair;
  }

 private:
  Step visit(std::size_t feature, int remaining) {
    if (feature + 1 == odd_.size()) {
      // The last feature absorbs whatever radius remains.
      if (remaining == 0) {
        offsets_[feature] = 0;
        return probe();
      }
      for (int o : {-remaining, remaining}) {
        offsets_[feature] = o;
        if (auto s = probe(); s != Step::Continue) return s;
      }
      return Step::Continue;
    }
    for (int o = -remaining; o <= remaining; ++o) {
      offsets_[feature] = o;
      if (auto s = visit(feature + 1, remaining - std::abs(o)); s != Step::Continue) return s;
    }
    return Step::Continue;
  }

  Step probe() {
    Binding candidate = x_;
    for (std::size_t i = 0; i < odd_.size(); ++i) {
      if (offsets_[i] == 0) continue;
      const auto& var = odd_.variables()[i];
      double v = round_to_places(base_[i] + offsets_[i] * var.step, places_[i]);
      const double slack = 1e-9 * var.step;
      if (v < var.min - slack || v > var.max + slack) return Step::Continue;
      v = std::clamp(v, var.min, var.max);
      candidate[var.name] = v;
    }
    if (budget_ == 0) return Step::OutOfBudget;
    --budget_;
    const Outcome out = oracle_.query(candidate);
    if (out == y_) return Step::Continue;
    found_ = std::move(candidate);
    found_outcome_ = out;
    hit_ = offsets_;
    return Step::Found;
  }

  const Binding& x_;
  Outcome y_;
  Oracle& oracle_;
  const OddSpec& odd_;
  std::size_t budget_;
  std::vector<double> base_;
  std::vector<int> places_;
  std::vector<int> offsets_;
  std::vector<int> hit_;
  Binding found_;
  Outcome found_outcome_ = Outcome::Pass;
};

}  // namespace

SearchResult search_counterfactual(const Binding& x, Outcome y, Oracle& oracle, const OddSpec& odd,
                                   const SearchLimits& limits) {
  if (odd.size() == 0) return SearchFailure::NotFound;
  RadiusSearch search(x, y, oracle, odd, limits.query_budget);
  for (int k = 1; k <= limits.max_radius_steps; ++k) {
    switch (search.radius(k)) {
      case Step::Found: return search.result(k);
      case Step::OutOfBudget: return SearchFailure::BudgetExceeded;
      case Step::Continue: break;
    }
  }
  return SearchFailure::NotFound;
}

EvidenceFile build_evidence(const PolarizedRule& rule, std::span<const LabeledRun> dataset, Oracle& oracle,
                            const OddSpec& odd, const SearchLimits& limits, std::string dataset_ref,
                            double eps_eq) {
  const auto report = decisiveness(rule, dataset, eps_eq);
  if (report.n_mismatch == 0) throw NoInconsistency(rule.id);
  EvidenceFile evidence;
  evidence.rule_id = rule.id;
  evidence.rule_text = print_rule(rule.ast);
  evidence.dataset_ref = std::move(dataset_ref);
  for (std::size_t index : report.mismatches) {
    const LabeledRun& run = dataset[index];
    auto result = search_counterfactual(run.x, run.y, oracle, odd, limits);
    if (auto* pair = std::get_if<CounterfactualPair>(&result)) {
      pair->run_index = index;
      evidence.pairs.push_back(std::move(*pair));
    } else {
      evidence.unresolved.push_back({index, std::get<SearchFailure>(result)});
    }
  }
  return evidence;
}

}  // namespace ruleforge
