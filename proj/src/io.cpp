#include "ruleforge/io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "ruleforge/grammar.hpp"

namespace ruleforge {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw FormatError(path.empty() ? message : path + ": " + message);
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n');
    fail("line " + std::to_string(line), "malformed JSON");
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& field(const json& obj, std::string_view key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(join(path, key), "missing field");
  return *it;
}

const json* optional_field(const json& obj, std::string_view key) {
  const auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_unsigned()) fail(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

template <class E, std::size_t N>
E enum_value(const json& j, const std::string& path, const E (&all)[N], std::string_view what) {
  const std::string text = string(j, path);
  for (E e : all) {
    if (to_string(e) == text) return e;
  }
  fail(path, "unknown " + std::string(what) + " '" + text + "'");
}

void check_schema(const json& doc, const std::string& path) {
  if (const json* v = optional_field(doc, "schema_version")) {
    if (!v->is_number_integer() || v->get<int>() != kSchemaVersion) {
      fail(join(path, "schema_version"), "unsupported schema version " + v->dump());
    }
  }
}

json header() { return json{{"schema_version", kSchemaVersion}}; }

RuleAst rule_text(const std::string& text, const std::string& path) {
  try {
    return parse_rule(text);
  } catch (const std::runtime_error& e) {
    fail(path, e.what());
  }
}

RuleAst rule_text(const json& j, const std::string& path) { return rule_text(string(j, path), path); }

constexpr Outcome kOutcomes[] = {Outcome::Pass, Outcome::Fail};
constexpr Polarity kPolarities[] = {Polarity::PassRule, Polarity::FailRule};
constexpr ArithOp kArithOps[] = {ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div};
constexpr SearchFailure kSearchFailures[] = {SearchFailure::NotFound, SearchFailure::BudgetExceeded};
constexpr ContradictionStatus kStatuses[] = {ContradictionStatus::Clear, ContradictionStatus::Flagged,
                                             ContradictionStatus::Unknown};
constexpr Stage kStages[] = {Stage::Generation,   Stage::Vocabulary, Stage::Contradiction, Stage::Preservation,
                             Stage::Resolution, Stage::Semantic,   Stage::Accepted};
constexpr CandidateSource kSources[] = {CandidateSource::Deterministic, CandidateSource::LLM,
                                        CandidateSource::Mock};
constexpr EditKind kEditKinds[] = {EditKind::ThresholdAdjust, EditKind::OperatorReplace, EditKind::AddConjunct,
                                   EditKind::RemoveConjunct,  EditKind::AddDisjunct,     EditKind::RemoveDisjunct};

// ---- rules ----

json rule_to_json(const PolarizedRule& r) {
  return json{{"id", r.id}, {"polarity", to_string(r.polarity)}, {"text", print_rule(r.ast)}};
}

PolarizedRule rule_from_json(const json& j, const std::string& path) {
  PolarizedRule r;
  r.id = string(field(j, "id", path), join(path, "id"));
  if (r.id.empty()) fail(join(path, "id"), "empty rule id");
  r.polarity = enum_value(field(j, "polarity", path), join(path, "polarity"), kPolarities, "polarity");
  r.ast = rule_text(field(j, "text", path), join(path, "text"));
  return r;
}

// ---- expressions ----

json expr_to_json(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Constant: return json{{"const", e.value()}};
    case Expr::Kind::Variable: return json{{"var", e.name()}};
    case Expr::Kind::Binary:
      return json{{"bin", {{"op", to_string(e.op())}, {"l", expr_to_json(e.lhs())}, {"r", expr_to_json(e.rhs())}}}};
  }
  return nullptr;
}

Expr expr_from_json(const json& j, const std::string& path) {
  if (!j.is_object() || j.size() != 1) fail(path, "expected one of {\"var\"}, {\"const\"}, {\"bin\"}");
  if (const json* v = optional_field(j, "var")) {
    const std::string name = string(*v, join(path, "var"));
    if (!is_identifier(name)) fail(join(path, "var"), "not an identifier '" + name + "'");
    return Expr::variable(name);
  }
  if (const json* c = optional_field(j, "const")) return Expr::constant(number(*c, join(path, "const")));
  const json& b = field(j, "bin", path);
  const std::string bp = join(path, "bin");
  return Expr::binary(enum_value(field(b, "op", bp), join(bp, "op"), kArithOps, "operator"),
                      expr_from_json(field(b, "l", bp), join(bp, "l")),
                      expr_from_json(field(b, "r", bp), join(bp, "r")));
}

json ast_to_json(const RuleAst& ast) {
  json ors = json::array();
  for (const auto& conj : ast.disjuncts) {
    json ands = json::array();
    for (const auto& rel : conj) {
      ands.push_back({{"lhs", expr_to_json(rel.lhs)}, {"op", to_string(rel.op)}, {"rhs", expr_to_json(rel.rhs)}});
    }
    ors.push_back({{"and", std::move(ands)}});
  }
  return json{{"or", std::move(ors)}};
}

RuleAst ast_from_json(const json& j, const std::string& path) {
  RuleAst ast;
  const std::string op = join(path, "or");
  const json& ors = array(field(j, "or", path), op);
  for (std::size_t d = 0; d < ors.size(); ++d) {
    const std::string dp = index(op, d);
    const std::string ap = join(dp, "and");
    const json& ands = array(field(ors[d], "and", dp), ap);
    Conjunct conj;
    for (std::size_t r = 0; r < ands.size(); ++r) {
      const std::string rp = index(ap, r);
      const json& rel = ands[r];
      conj.push_back({expr_from_json(field(rel, "lhs", rp), join(rp, "lhs")),
                      enum_value(field(rel, "op", rp), join(rp, "op"), kAllRelOps, "operator"),
                      expr_from_json(field(rel, "rhs", rp), join(rp, "rhs"))});
    }
    ast.disjuncts.push_back(std::move(conj));
  }
  try {
    validate(ast);
  } catch (const RuleError& e) {
    fail(path, e.what());
  }
  return ast;
}

// ---- odd ----

json odd_to_json(const OddSpec& odd) {
  json vars = json::array();
  for (const auto& v : odd.variables()) {
    vars.push_back({{"name", v.name}, {"min", v.min}, {"max", v.max}, {"step", v.step}});
  }
  return vars;
}

OddSpec odd_from_json(const json& j, const std::string& path) {
  const json* vars = &j;
  std::string vp = path;
  if (j.is_object()) {
    check_schema(j, path);
    vp = join(path, "variables");
    vars = &field(j, "variables", path);
  }
  array(*vars, vp);
  std::vector<OddVariable> out;
  for (std::size_t i = 0; i < vars->size(); ++i) {
    const std::string p = index(vp, i);
    const json& v = (*vars)[i];
    OddVariable var;
    var.name = string(field(v, "name", p), join(p, "name"));
    if (!is_identifier(var.name)) fail(join(p, "name"), "not an identifier '" + var.name + "'");
    var.min = number(field(v, "min", p), join(p, "min"));
    var.max = number(field(v, "max", p), join(p, "max"));
    var.step = number(field(v, "step", p), join(p, "step"));
    out.push_back(std::move(var));
  }
  try {
    return OddSpec(std::move(out));
  } catch (const RuleError& e) {
    fail(vp, e.what());
  }
}

// ---- evidence ----

json binding_to_json(const Binding& b) {
  json out = json::object();
  for (const auto& [k, v] : b) out[k] = v;
  return out;
}

Binding binding_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object of feature values");
  Binding out;
  for (const auto& [k, v] : j.items()) out[k] = number(v, join(path, k));
  return out;
}

json evidence_to_json(const EvidenceFile& e) {
  json pairs = json::array();
  for (const auto& p : e.pairs) {
    pairs.push_back({{"run_index", p.run_index},
                     {"x", binding_to_json(p.x)},
                     {"y", to_string(p.y)},
                     {"x_cf", binding_to_json(p.x_cf)},
                     {"y_cf", to_string(p.y_cf)},
                     {"delta", binding_to_json(p.delta)},
                     {"l1", p.l1},
                     {"l1_steps", p.l1_steps}});
  }
  json unresolved = json::array();
  for (const auto& u : e.unresolved) unresolved.push_back({{"run_index", u.run_index}, {"reason", to_string(u.reason)}});
  return json{{"rule_id", e.rule_id},
              {"rule_text", e.rule_text},
              {"dataset_ref", e.dataset_ref},
              {"pairs", std::move(pairs)},
              {"unresolved", std::move(unresolved)}};
}

EvidenceFile evidence_from_json(const json& j, const std::string& path) {
  check_schema(j, path);
  EvidenceFile e;
  e.rule_id = string(field(j, "rule_id", path), join(path, "rule_id"));
  e.rule_text = string(field(j, "rule_text", path), join(path, "rule_text"));
  rule_text(field(j, "rule_text", path), join(path, "rule_text"));
  e.dataset_ref = string(field(j, "dataset_ref", path), join(path, "dataset_ref"));
  const std::string pp = join(path, "pairs");
  const json& pairs = array(field(j, "pairs", path), pp);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string p = index(pp, i);
    const json& o = pairs[i];
    CounterfactualPair cp;
    cp.run_index = count(field(o, "run_index", p), join(p, "run_index"));
    cp.x = binding_from_json(field(o, "x", p), join(p, "x"));
    cp.y = enum_value(field(o, "y", p), join(p, "y"), kOutcomes, "outcome");
    cp.x_cf = binding_from_json(field(o, "x_cf", p), join(p, "x_cf"));
    cp.y_cf = enum_value(field(o, "y_cf", p), join(p, "y_cf"), kOutcomes, "outcome");
    cp.delta = binding_from_json(field(o, "delta", p), join(p, "delta"));
    cp.l1 = number(field(o, "l1", p), join(p, "l1"));
    cp.l1_steps = integer(field(o, "l1_steps", p), join(p, "l1_steps"));
    e.pairs.push_back(std::move(cp));
  }
  const std::string up = join(path, "unresolved");
  const json& unresolved = array(field(j, "unresolved", path), up);
  for (std::size_t i = 0; i < unresolved.size(); ++i) {
    const std::string p = index(up, i);
    e.unresolved.push_back({count(field(unresolved[i], "run_index", p), join(p, "run_index")),
                            enum_value(field(unresolved[i], "reason", p), join(p, "reason"), kSearchFailures,
                                       "search failure")});
  }
  return e;
}

// ---- outcome ----

json report_to_json(const ValidationReport& r) {
  return json{{"attempt", r.attempt},
              {"stage_reached", to_string(r.stage_reached)},
              {"candidate_rule", r.candidate_rule},
              {"contradiction",
               {{"status", to_string(r.contradiction.status)},
                {"witness", r.contradiction.witness ? binding_to_json(*r.contradiction.witness) : json(nullptr)},
                {"opposing_rule_id", r.contradiction.opposing_rule_id}}},
              {"broken_rule_ids", r.broken_rule_ids},
              {"resolution",
               {{"mismatch_before", r.resolution.mismatch_before}, {"mismatch_after", r.resolution.mismatch_after}}},
              {"new_inconsistencies", r.new_inconsistencies},
              {"accepted", r.accepted},
              {"failure_summary", r.failure_summary}};
}

ValidationReport report_from_json(const json& j, const std::string& path) {
  ValidationReport r;
  r.attempt = integer(field(j, "attempt", path), join(path, "attempt"));
  r.stage_reached = enum_value(field(j, "stage_reached", path), join(path, "stage_reached"), kStages, "stage");
  r.candidate_rule = string(field(j, "candidate_rule", path), join(path, "candidate_rule"));
  const std::string cp = join(path, "contradiction");
  const json& c = field(j, "contradiction", path);
  r.contradiction.status = enum_value(field(c, "status", cp), join(cp, "status"), kStatuses, "status");
  if (const json* w = optional_field(c, "witness")) r.contradiction.witness = binding_from_json(*w, join(cp, "witness"));
  r.contradiction.opposing_rule_id = string(field(c, "opposing_rule_id", cp), join(cp, "opposing_rule_id"));
  const std::string bp = join(path, "broken_rule_ids");
  const json& broken = array(field(j, "broken_rule_ids", path), bp);
  for (std::size_t i = 0; i < broken.size(); ++i) r.broken_rule_ids.push_back(string(broken[i], index(bp, i)));
  const std::string rp = join(path, "resolution");
  const json& res = field(j, "resolution", path);
  r.resolution.mismatch_before = count(field(res, "mismatch_before", rp), join(rp, "mismatch_before"));
  r.resolution.mismatch_after = count(field(res, "mismatch_after", rp), join(rp, "mismatch_after"));
  r.new_inconsistencies = count(field(j, "new_inconsistencies", path), join(path, "new_inconsistencies"));
  r.accepted = boolean(field(j, "accepted", path), join(path, "accepted"));
  r.failure_summary = string(field(j, "failure_summary", path), join(path, "failure_summary"));
  return r;
}

json edit_to_json(const Edit& e) {
  return json{{"kind", to_string(e.kind)},
              {"disjunct", e.disjunct},
              {"relation", e.relation},
              {"before", e.before},
              {"after", e.after}};
}

Edit edit_from_json(const json& j, const std::string& path) {
  Edit e;
  e.kind = enum_value(field(j, "kind", path), join(path, "kind"), kEditKinds, "edit kind");
  e.disjunct = count(field(j, "disjunct", path), join(path, "disjunct"));
  e.relation = count(field(j, "relation", path), join(path, "relation"));
  e.before = string(field(j, "before", path), join(path, "before"));
  e.after = string(field(j, "after", path), join(path, "after"));
  return e;
}

}  // namespace

std::vector<RuleEntry> parse_rule_entries_json(std::string_view text) {
  const json doc = parse_document(text);
  const json* rules = &doc;
  const std::string path = "rules";
  if (doc.is_object()) {
    check_schema(doc, "");
    rules = &field(doc, "rules", "");
  }
  array(*rules, path);
  std::vector<RuleEntry> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < rules->size(); ++i) {
    const std::string p = index(path, i);
    const json& j = (*rules)[i];
    RuleEntry e;
    e.id = string(field(j, "id", p), join(p, "id"));
    if (e.id.empty()) fail(join(p, "id"), "empty rule id");
    if (!ids.insert(e.id).second) fail(join(p, "id"), "duplicate rule id '" + e.id + "'");
    e.polarity = enum_value(field(j, "polarity", p), join(p, "polarity"), kPolarities, "polarity");
    e.text = string(field(j, "text", p), join(p, "text"));
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<PolarizedRule> parse_rules_json(std::string_view text) {
  const auto entries = parse_rule_entries_json(text);
  std::vector<PolarizedRule> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out.push_back({entries[i].id, entries[i].polarity, rule_text(entries[i].text, join(index("rules", i), "text"))});
  }
  return out;
}

std::string write_rules_json(std::span<const PolarizedRule> rules) {
  json doc = header();
  doc["rules"] = json::array();
  for (const auto& r : rules) doc["rules"].push_back(rule_to_json(r));
  return dump(doc);
}

std::string rule_ast_to_json(const RuleAst& ast) { return dump(ast_to_json(ast)); }

RuleAst rule_ast_from_json(std::string_view text) { return ast_from_json(parse_document(text), "rule"); }

OddSpec parse_odd_json(std::string_view text) { return odd_from_json(parse_document(text), "odd"); }

std::string write_odd_json(const OddSpec& odd) {
  json doc = header();
  doc["variables"] = odd_to_json(odd);
  return dump(doc);
}

OracleConfig parse_oracle_config_json(std::string_view text) {
  const json doc = parse_document(text);
  check_schema(doc, "");
  OracleConfig c;
  c.odd = odd_from_json(field(doc, "odd", ""), "odd");
  c.safe_region = rule_text(field(doc, "safe_region", ""), "safe_region");
  const json& seed = field(doc, "seed", "");
  if (!seed.is_number_unsigned()) fail("seed", "expected a non-negative integer");
  c.seed = seed.get<std::uint64_t>();
  try {
    validate(c);
  } catch (const RuleError& e) {
    fail("safe_region", e.what());
  }
  return c;
}

std::string write_oracle_config_json(const OracleConfig& config) {
  json doc = header();
  json odd = header();
  odd["variables"] = odd_to_json(config.odd);
  doc["odd"] = std::move(odd);
  doc["safe_region"] = print_rule(config.safe_region);
  doc["seed"] = config.seed;
  return dump(doc);
}

EvidenceFile parse_evidence_json(std::string_view text) { return evidence_from_json(parse_document(text), ""); }

std::string write_evidence_json(const EvidenceFile& evidence) {
  json doc = header();
  doc.update(evidence_to_json(evidence));
  return dump(doc);
}

std::string write_decisiveness_json(std::span<const RuleDecisiveness> rows, std::string_view dataset_ref) {
  json doc = header();
  doc["dataset_ref"] = dataset_ref;
  doc["rules"] = json::array();
  for (const auto& row : rows) {
    const auto& r = row.report;
    doc["rules"].push_back({{"id", row.rule_id},
                            {"polarity", to_string(row.polarity)},
                            {"text", row.rule_text},
                            {"n", r.n},
                            {"n_mismatch", r.n_mismatch},
                            {"n_consistent", r.n_consistent},
                            {"n_inconclusive", r.n_inconclusive},
                            {"dg", r.dg},
                            {"fully_inconclusive", r.fully_inconclusive},
                            {"mismatches", r.mismatches}});
  }
  return dump(doc);
}

std::string write_outcome_json(const PolarizedRule& target, const RefineResult& result) {
  json doc = header();
  doc["target"] = rule_to_json(target);
  const auto* ok = std::get_if<RefinementOutcome>(&result);
  const auto& reports = ok ? ok->reports : std::get<Exhausted>(result).reports;
  const auto& evidence = ok ? ok->evidence : std::get<Exhausted>(result).evidence;
  doc["status"] = ok ? "accepted" : "exhausted";
  doc["attempts"] = reports.size();
  if (ok) {
    doc["refined"] = rule_to_json(ok->refined);
    json log = json::array();
    for (const auto& e : ok->candidate.change_log) log.push_back(edit_to_json(e));
    doc["candidate"] = {{"raw_rule_text", ok->candidate.raw_rule_text},
                        {"explanation", ok->candidate.explanation},
                        {"change_log", std::move(log)},
                        {"source", to_string(ok->candidate.source)},
                        {"attempt", ok->candidate.attempt}};
    doc["dg_before"] = ok->dg_before;
    doc["dg_after"] = ok->dg_after;
    doc["dg_gain"] = ok->dg_after - ok->dg_before;
  }
  json reps = json::array();
  for (const auto& r : reports) reps.push_back(report_to_json(r));
  doc["reports"] = std::move(reps);
  doc["evidence"] = evidence_to_json(evidence);
  return dump(doc);
}

RefineResult parse_outcome_json(std::string_view text) {
  const json doc = parse_document(text);
  check_schema(doc, "");
  const std::string status = string(field(doc, "status", ""), "status");
  const json& reps = array(field(doc, "reports", ""), "reports");
  std::vector<ValidationReport> reports;
  for (std::size_t i = 0; i < reps.size(); ++i) reports.push_back(report_from_json(reps[i], index("reports", i)));
  EvidenceFile evidence = evidence_from_json(field(doc, "evidence", ""), "evidence");
  if (status == "exhausted") return Exhausted{std::move(evidence), std::move(reports)};
  if (status != "accepted") fail("status", "unknown status '" + status + "'");

  RefinementOutcome out;
  out.refined = rule_from_json(field(doc, "refined", ""), "refined");
  const json& c = field(doc, "candidate", "");
  out.candidate.ast = out.refined.ast;
  out.candidate.raw_rule_text = string(field(c, "raw_rule_text", "candidate"), "candidate.raw_rule_text");
  out.candidate.explanation = string(field(c, "explanation", "candidate"), "candidate.explanation");
  const json& log = array(field(c, "change_log", "candidate"), "candidate.change_log");
  for (std::size_t i = 0; i < log.size(); ++i) {
    out.candidate.change_log.push_back(edit_from_json(log[i], index("candidate.change_log", i)));
  }
  out.candidate.source = enum_value(field(c, "source", "candidate"), "candidate.source", kSources, "source");
  out.candidate.attempt = integer(field(c, "attempt", "candidate"), "candidate.attempt");
  out.attempts = static_cast<int>(reports.size());
  out.dg_before = number(field(doc, "dg_before", ""), "dg_before");
  out.dg_after = number(field(doc, "dg_after", ""), "dg_after");
  out.evidence = std::move(evidence);
  out.reports = std::move(reports);
  return out;
}

std::string write_metrics_json(const MetricsReport& m) {
  json doc = header();
  doc["dg_before"] = m.dg_before;
  doc["dg_after"] = m.dg_after;
  doc["dg_gain"] = m.dg_gain;
  json violations = json::array();
  for (const auto& v : m.sv.violations) violations.push_back(v.message());
  doc["sv"] = {{"sv", m.sv.sv}, {"n_invalid", m.sv.n_invalid}, {"n_pred", m.sv.n_pred}, {"violations", violations}};
  doc["gc"] = {{"gc", m.gc.gc},
               {"n_viol", m.gc.n_viol},
               {"n_tok", m.gc.n_tok},
               {"empty_input", m.gc.empty_input},
               {"discarded_tokens", m.gc.discarded}};
  const auto& s = m.cm.stats;
  doc["cm"] = {{"cm", m.cm.cm},
               {"band", to_string(m.cm.band)},
               {"stats",
                {{"original", s.original},
                 {"refined", s.refined},
                 {"unchanged", s.unchanged},
                 {"removed_redundant", s.removed_redundant},
                 {"removed_other", s.removed_other},
                 {"threshold_shifted", s.threshold_shifted},
                 {"operator_changed", s.operator_changed},
                 {"added_existing", s.added_existing},
                 {"added_new_variable", s.added_new_variable},
                 {"narrowed_one_sided", s.narrowed_one_sided},
                 {"unchanged_fraction", s.unchanged_fraction},
                 {"changed_fraction", s.changed_fraction}}}};
  doc["interpretability"] = nullptr;
  return dump(doc);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp.string() + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error(tmp.string() + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error(path.string() + ": " + ec.message());
}

}  // namespace ruleforge
