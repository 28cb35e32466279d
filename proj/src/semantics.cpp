#include "ruleforge/semantics.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

#include "ruleforge/grammar.hpp"

namespace ruleforge {

std::string_view to_string(Outcome o) { return o == Outcome::Pass ? "Pass" : "Fail"; }
std::string_view to_string(Polarity p) { return p == Polarity::PassRule ? "pass" : "fail"; }
std::string_view to_string(Consistency c) {
  switch (c) {
    case Consistency::Consistent: return "Consistent";
    case Consistency::Inconsistent: return "Inconsistent";
    case Consistency::Inconclusive: return "Inconclusive";
  }
  return "?";
}

Outcome opposite(Outcome o) { return o == Outcome::Pass ? Outcome::Fail : Outcome::Pass; }
Polarity opposite(Polarity p) {
  return p == Polarity::PassRule ? Polarity::FailRule : Polarity::PassRule;
}
Outcome verdict_of(Polarity p) { return p == Polarity::PassRule ? Outcome::Pass : Outcome::Fail; }

std::optional<double> evaluate_expr(const Expr& expr, const Binding& x) {
  switch (expr.kind()) {
    case Expr::Kind::Constant: return expr.value();
    case Expr::Kind::Variable: {
      auto it = x.find(expr.name());
      if (it == x.end()) throw UnboundVariable(expr.name());
      return it->second;
    }
    case Expr::Kind::Binary: {
      auto l = evaluate_expr(expr.lhs(), x);
      auto r = evaluate_expr(expr.rhs(), x);
      if (!l || !r) return std::nullopt;
      switch (expr.op()) {
        case ArithOp::Add: return *l + *r;
        case ArithOp::Sub: return *l - *r;
        case ArithOp::Mul: return *l * *r;
        case ArithOp::Div:
          if (*r == 0.0) return std::nullopt;
          return *l / *r;
      }
    }
  }
  return std::nullopt;
}

bool evaluate(const Relation& rel, const Binding& x, double eps_eq,
              std::vector<std::string>* diagnostics) {
  auto l = evaluate_expr(rel.lhs, x);
  auto r = evaluate_expr(rel.rhs, x);
  if (!l || !r) {
    if (diagnostics) diagnostics->push_back("division by zero in " + print_relation(rel));
    return false;
  }
  switch (rel.op) {
    case RelOp::Lt: return *l < *r;
    case RelOp::Le: return *l <= *r;
    case RelOp::Gt: return *l > *r;
    case RelOp::Ge: return *l >= *r;
    case RelOp::Eq: return std::fabs(*l - *r) <= eps_eq;
    case RelOp::Ne: return std::fabs(*l - *r) > eps_eq;
  }
  return false;
}

bool evaluate(const RuleAst& ast, const Binding& x, double eps_eq,
              std::vector<std::string>* diagnostics) {
  for (const auto& name : variables_of(ast)) {
    if (x.find(name) == x.end()) throw UnboundVariable(name);
  }
  for (const auto& conj : ast.disjuncts) {
    bool all = true;
    for (const auto& rel : conj) {
      if (!evaluate(rel, x, eps_eq, diagnostics)) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

Consistency classify_consistency(const PolarizedRule& rule, const LabeledRun& run, double eps_eq) {
  if (!evaluate(rule.ast, run.x, eps_eq)) return Consistency::Inconclusive;
  return verdict_of(rule.polarity) == run.y ? Consistency::Consistent : Consistency::Inconsistent;
}

DecisivenessReport decisiveness(const PolarizedRule& rule, std::span<const LabeledRun> dataset,
                                double eps_eq) {
  if (dataset.empty()) throw EmptyDataset();
  DecisivenessReport report;
  report.n = dataset.size();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    switch (classify_consistency(rule, dataset[i], eps_eq)) {
      case Consistency::Consistent: ++report.n_consistent; break;
      case Consistency::Inconclusive: ++report.n_inconclusive; break;
      case Consistency::Inconsistent:
        ++report.n_mismatch;
        report.mismatches.push_back(i);
        break;
    }
  }
  report.dg = 1.0 - static_cast<double>(report.n_mismatch) / static_cast<double>(report.n);
  report.fully_inconclusive = report.n_inconclusive == report.n;
  return report;
}

std::optional<double> ruleset_decisiveness(std::span<const PolarizedRule> rules,
                                           std::span<const LabeledRun> dataset, double eps_eq) {
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& rule : rules) {
    auto report = decisiveness(rule, dataset, eps_eq);
    if (report.fully_inconclusive) continue;
    sum += report.dg;
    ++counted;
  }
  if (counted == 0) return std::nullopt;
  return sum / static_cast<double>(counted);
}

namespace {

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    out.emplace_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Dataset parse_dataset_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw FormatError("dataset: missing header row");

  Dataset ds;
  auto header = split_fields(lines.front());
  if (header.size() < 2 || header.back() != "outcome")
    throw FormatError("dataset line 1: last column must be 'outcome'");
  header.pop_back();
  for (const auto& name : header) {
    if (!is_identifier(name)) throw FormatError("dataset line 1: column '" + name + "' is not an identifier");
    for (const auto& seen : ds.features)
      if (seen == name) throw FormatError("dataset line 1: duplicate column '" + name + "'");
    ds.features.push_back(name);
  }

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string where = "dataset line " + std::to_string(li + 1);
    auto fields = split_fields(lines[li]);
    if (fields.size() != ds.features.size() + 1)
      throw FormatError(where + ": expected " + std::to_string(ds.features.size() + 1) + " fields, got " +
                        std::to_string(fields.size()));
    LabeledRun run;
    for (std::size_t c = 0; c < ds.features.size(); ++c) {
      const auto& f = fields[c];
      double v = 0.0;
      auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size() || !std::isfinite(v))
        throw FormatError(where + ", column '" + ds.features[c] + "': not a decimal number: '" + f + "'");
      run.x[ds.features[c]] = v;
    }
    const auto& label = fields.back();
    if (label == "Pass") {
      run.y = Outcome::Pass;
    } else if (label == "Fail") {
      run.y = Outcome::Fail;
    } else {
      throw FormatError(where + ", column 'outcome': expected Pass or Fail, got '" + label + "'");
    }
    ds.runs.push_back(std::move(run));
  }
  return ds;
}

std::string write_dataset_csv(const Dataset& dataset) {
  std::string out;
  for (const auto& f : dataset.features) out += f + ",";
  out += "outcome\n";
  for (const auto& run : dataset.runs) {
    for (const auto& f : dataset.features) {
      auto it = run.x.find(f);
      if (it == run.x.end()) throw FormatError("dataset run misses feature '" + f + "'");
      out += format_number(it->second) + ",";
    }
    out += std::string(to_string(run.y)) + "\n";
  }
  return out;
}

void check_dataset_against(const Dataset& dataset, const OddSpec& odd) {
  for (std::size_t i = 0; i < dataset.runs.size(); ++i) {
    for (const auto& var : odd.variables()) {
      auto it = dataset.runs[i].x.find(var.name);
      const std::string where = "dataset run " + std::to_string(i) + ", feature '" + var.name + "'";
      if (it == dataset.runs[i].x.end()) throw FormatError(where + ": missing");
      if (it->second < var.min || it->second > var.max) throw FormatError(where + ": outside ODD range");
    }
  }
}

std::string dataset_digest(const Dataset& dataset) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : write_dataset_csv(dataset)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

}  // namespace ruleforge
