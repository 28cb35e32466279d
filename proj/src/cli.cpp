#include "ruleforge/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ruleforge/counterfactual.hpp"
#include "ruleforge/grammar.hpp"
#include "ruleforge/io.hpp"
#include "ruleforge/llm.hpp"
#include "ruleforge/metrics.hpp"
#include "ruleforge/scenario.hpp"
#include "ruleforge/validation.hpp"
#include "ruleforge/vocabulary.hpp"

namespace ruleforge {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ends a command with a non-zero code after its diagnostics were printed.
struct CommandResult {
  int code = kExitOk;
};

struct RunConfig {
  std::string config_path;
  std::string rules_path;
  std::string dataset_path;
  std::string rule_id;
  std::string out;
  std::string out_dir;
  std::string generator = "local";
  std::string mock_path;
  std::string refined_text;
  std::string refined_file;
  std::string outcome_path;
  std::string variant = "candidate";
  int max_attempts = 5;
  double eps_eq = kDefaultEpsEq;
  ContradictionBudget contradiction{};
  SearchLimits search{};
  std::size_t n = kFixtureRuns;
  std::uint64_t sim_seed = 42;
  bool fixture = false;
};

struct PendingFile {
  fs::path path;
  std::string content;
};

class Session {
 public:
  Session(std::ostream& out, std::ostream& err, bool json) : out_(out), err_(err), json_(json) {}

  std::ostream& out() { return out_; }

  void diagnostic(std::string_view level, std::string_view kind, const std::string& message, int code) {
    if (json_) {
      nlohmann::ordered_json j{{"level", level}, {"kind", kind}, {"message", message}};
      if (code >= 0) j["exit_code"] = code;
      err_ << j.dump() << '\n';
    } else {
      err_ << "ruleforge: " << level << ": " << message << '\n';
    }
  }

  void stage(fs::path path, std::string content) { pending_.push_back({std::move(path), std::move(content)}); }

  void commit() {
    for (const auto& f : pending_) {
      if (f.path.has_parent_path()) fs::create_directories(f.path.parent_path());
      write_text_file(f.path, f.content);
    }
    pending_.clear();
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  bool json_;
  std::vector<PendingFile> pending_;
};

std::string dg_text(double dg) { return format_number(round_to_places(dg, 4)); }

OracleConfig load_config(const RunConfig& rc) {
  if (rc.config_path.empty()) return default_oracle_config();
  return parse_oracle_config_json(read_text_file(rc.config_path));
}

std::vector<PolarizedRule> load_rules(const RunConfig& rc) {
  auto rules = parse_rules_json(read_text_file(rc.rules_path));
  if (rules.empty()) throw FormatError(rc.rules_path + ": no rules");
  return rules;
}

Dataset load_dataset(const RunConfig& rc, const OddSpec& odd) {
  Dataset d = parse_dataset_csv(read_text_file(rc.dataset_path));
  check_dataset_against(d, odd);
  return d;
}

// Counterfactual search queries the oracle, so stored labels must agree
// with it.
void check_labels(const Dataset& d, const OracleConfig& config) {
  for (std::size_t i = 0; i < d.runs.size(); ++i) {
    const Outcome want = oracle_label(config, d.runs[i].x);
    if (want != d.runs[i].y) {
      throw FormatError("dataset line " + std::to_string(i + 2) + ": outcome " + std::string(to_string(d.runs[i].y)) +
                        " disagrees with the oracle (" + std::string(to_string(want)) + ")");
    }
  }
}

void check_rules_vocabulary(std::span<const PolarizedRule> rules, const OddSpec& odd) {
  for (const auto& r : rules) {
    const auto v = check_vocabulary(r.ast, odd);
    if (!v.empty()) throw FormatError("rule '" + r.id + "': vocabulary violation: " + v.front().message());
  }
}

const PolarizedRule& pick_rule(const std::vector<PolarizedRule>& rules, const std::string& id) {
  if (id.empty()) return rules.front();
  const auto it = std::find_if(rules.begin(), rules.end(), [&](const PolarizedRule& r) { return r.id == id; });
  if (it == rules.end()) throw UsageError("no rule with id '" + id + "' in the rules file");
  return *it;
}

std::vector<std::string> load_mock_responses(const std::string& path) {
  if (path.empty()) throw UsageError("--generator mock needs --mock-responses");
  const std::string text = read_text_file(path);
  const auto doc = nlohmann::json::parse(text, nullptr, false);
  const nlohmann::json* list = &doc;
  if (doc.is_object() && doc.contains("responses")) list = &doc["responses"];
  if (doc.is_discarded() || !list->is_array() || list->empty()) {
    throw FormatError(path + ": expected a non-empty JSON array of response strings");
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < list->size(); ++i) {
    if (!(*list)[i].is_string()) throw FormatError(path + ": responses[" + std::to_string(i) + "]: expected a string");
    out.push_back((*list)[i].get<std::string>());
  }
  return out;
}

void emit(Session& s, const RunConfig& rc, std::string content) {
  if (rc.out.empty()) {
    s.out() << content;
  } else {
    s.stage(rc.out, std::move(content));
  }
}

// ---- commands ----

CommandResult cmd_sim(Session& s, const RunConfig& rc) {
  const fs::path dir(rc.out_dir);
  if (rc.fixture) {
    if (!rc.config_path.empty()) throw UsageError("--fixture uses the built-in oracle config; drop --config");
    const Fixture fx = make_reference_fixture(rc.sim_seed);
    s.stage(dir / "dataset.csv", write_dataset_csv(fx.dataset));
    s.stage(dir / "config.json", write_oracle_config_json(fx.config));
    s.stage(dir / "rules.json", write_rules_json(fx.ruleset()));
    s.commit();
    s.out() << "fixture: " << fx.dataset.runs.size() << " runs, baseline " << fx.baseline_rule.id << " with "
            << fx.expected_mismatches << " mismatches, written to " << dir.string() << '\n';
    return {};
  }
  if (rc.n == 0) throw UsageError("--n must be at least 1");
  const OracleConfig config = load_config(rc);
  const Dataset d = sample_dataset(config, rc.n, rc.sim_seed);
  s.stage(dir / "dataset.csv", write_dataset_csv(d));
  s.stage(dir / "config.json", write_oracle_config_json(config));
  s.commit();
  const auto pass = std::count_if(d.runs.begin(), d.runs.end(), [](const LabeledRun& r) { return r.y == Outcome::Pass; });
  s.out() << d.runs.size() << " runs (" << pass << " Pass, " << d.runs.size() - static_cast<std::size_t>(pass)
          << " Fail), written to " << dir.string() << '\n';
  return {};
}

CommandResult cmd_eval(Session& s, const RunConfig& rc) {
  const OracleConfig config = load_config(rc);
  const auto rules = load_rules(rc);
  const Dataset d = load_dataset(rc, config.odd);
  std::vector<RuleDecisiveness> rows;
  for (const auto& r : rules) rows.push_back({r.id, print_rule(r.ast), r.polarity, decisiveness(r, d.runs, rc.eps_eq)});
  emit(s, rc, write_decisiveness_json(rows, dataset_digest(d)));
  s.commit();
  if (!rc.out.empty()) {
    for (const auto& row : rows) {
      s.out() << row.rule_id << " (" << to_string(row.polarity) << "): n=" << row.report.n
              << " mismatches=" << row.report.n_mismatch << " dg=" << dg_text(row.report.dg) << '\n';
    }
  }
  return {};
}

CommandResult cmd_cf(Session& s, const RunConfig& rc) {
  const OracleConfig config = load_config(rc);
  const auto rules = load_rules(rc);
  check_rules_vocabulary(rules, config.odd);
  const Dataset d = load_dataset(rc, config.odd);
  check_labels(d, config);
  const PolarizedRule& rule = pick_rule(rules, rc.rule_id);
  SafetyOracle oracle(config);
  const EvidenceFile e = build_evidence(rule, d.runs, oracle, config.odd, rc.search, dataset_digest(d), rc.eps_eq);
  emit(s, rc, write_evidence_json(e));
  s.commit();
  if (!rc.out.empty()) {
    s.out() << rule.id << ": " << e.pairs.size() << " counterfactual pair(s), " << e.unresolved.size()
            << " unresolved\n";
  }
  return {};
}

CommandResult cmd_refine(Session& s, const RunConfig& rc) {
  std::unique_ptr<CandidateGenerator> generator;
  LlmGenerator* llm = nullptr;
  if (rc.generator == "llm") {
    const LlmEndpoint ep = LlmEndpoint::from_env();
    auto owned = std::make_unique<LlmGenerator>(std::make_shared<HttpChatTransport>(ep), ep.model);
    llm = owned.get();
    generator = std::move(owned);
  } else if (rc.generator == "mock") {
    generator = std::make_unique<MockGenerator>(load_mock_responses(rc.mock_path));
  } else {
    if (!rc.mock_path.empty()) throw UsageError("--mock-responses needs --generator mock");
    generator = std::make_unique<DeterministicGenerator>();
  }

  const OracleConfig config = load_config(rc);
  const auto rules = load_rules(rc);
  check_rules_vocabulary(rules, config.odd);
  const Dataset d = load_dataset(rc, config.odd);
  check_labels(d, config);
  const PolarizedRule& target = pick_rule(rules, rc.rule_id);

  RefineOptions opt;
  opt.max_attempts = rc.max_attempts;
  opt.eps_eq = rc.eps_eq;
  opt.search = rc.search;
  opt.contradiction = rc.contradiction;
  opt.dataset_ref = dataset_digest(d);
  SafetyOracle oracle(config);
  const RefineResult result = refine_loop(target, rules, d.runs, oracle, config.odd, *generator, opt);

  const fs::path dir(rc.out_dir);
  const auto* ok = std::get_if<RefinementOutcome>(&result);
  const std::string report = render_report(target, result);
  s.stage(dir / "outcome.json", write_outcome_json(target, result));
  s.stage(dir / "report.txt", report);
  s.stage(dir / "evidence.json", write_evidence_json(ok ? ok->evidence : std::get<Exhausted>(result).evidence));
  if (ok) {
    std::vector<PolarizedRule> refined_rules = rules;
    for (auto& r : refined_rules) {
      if (r.id == target.id) r = ok->refined;
    }
    s.stage(dir / "refined_rules.json", write_rules_json(refined_rules));
  }
  if (llm) s.stage(dir / "transcripts.json", write_transcripts_json(llm->transcripts()));
  s.commit();
  s.out() << report;
  if (!ok) {
    s.diagnostic("error", "Exhausted",
                 "refinement of '" + target.id + "' exhausted after " +
                     std::to_string(std::get<Exhausted>(result).reports.size()) + " attempt(s)",
                 kExitRejected);
    return {kExitRejected};
  }
  return {};
}

CommandResult cmd_metrics(Session& s, const RunConfig& rc) {
  const int sources = !rc.refined_text.empty() + !rc.refined_file.empty() + !rc.outcome_path.empty();
  if (sources != 1) throw UsageError("give exactly one of --refined, --refined-file, --outcome");
  const OracleConfig config = load_config(rc);
  const auto rules = load_rules(rc);
  const Dataset d = load_dataset(rc, config.odd);
  const PolarizedRule& original = pick_rule(rules, rc.rule_id);

  std::string raw;
  if (!rc.outcome_path.empty()) {
    const RefineResult r = parse_outcome_json(read_text_file(rc.outcome_path));
    const auto* ok = std::get_if<RefinementOutcome>(&r);
    if (!ok) throw FormatError(rc.outcome_path + ": outcome was not accepted; no refined rule");
    raw = ok->candidate.raw_rule_text.empty() ? print_rule(ok->refined.ast) : ok->candidate.raw_rule_text;
  } else {
    raw = rc.refined_file.empty() ? rc.refined_text : read_text_file(rc.refined_file);
  }
  const RuleAst refined = parse_rule(raw);
  const MetricsReport m = compute_metrics(original, refined, raw, d.runs, config.odd, rc.eps_eq);
  if (!rc.out.empty()) s.stage(rc.out, write_metrics_json(m));
  s.commit();
  const std::pair<std::string, MetricsReport> row{rc.variant, m};
  s.out() << "DG: " << dg_text(m.dg_before) << " -> " << dg_text(m.dg_after) << '\n'
          << render_metrics_table(std::span(&row, 1));
  return {};
}

CommandResult cmd_check(Session& s, const RunConfig& rc) {
  const OracleConfig config = load_config(rc);
  const auto entries = parse_rule_entries_json(read_text_file(rc.rules_path));
  bool clean = true;
  for (const auto& e : entries) {
    const GrammarCompliance gc = grammar_compliance(e.text);
    char gc_text[64];
    std::snprintf(gc_text, sizeof gc_text, "gc=%.2f (%zu/%zu tokens violate)", gc.gc, gc.n_viol, gc.n_tok);
    std::ostringstream line;
    line << e.id << " (" << to_string(e.polarity) << "): ";
    try {
      const RuleAst ast = parse_rule(e.text);
      const auto v = check_vocabulary(ast, config.odd);
      if (v.empty()) {
        line << "ok " << gc_text;
      } else {
        clean = false;
        line << "vocabulary violation: " << summarize(v) << ' ' << gc_text;
      }
    } catch (const ParseError& err) {
      clean = false;
      line << "parse error: " << err.what() << ' ' << gc_text;
    }
    s.out() << line.str() << '\n';
  }
  if (!clean) {
    s.diagnostic("error", "FormatError", rc.rules_path + ": rules failed grammar or vocabulary checks", kExitFormat);
    return {kExitFormat};
  }
  return {};
}

void add_common(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--config", rc.config_path, "Oracle config JSON (ODD and safe region); built-in default if omitted");
}

void add_eps(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--eps-eq", rc.eps_eq, "Tolerance for == and !=")->check(CLI::NonNegativeNumber);
}

void add_rules_dataset(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--rules", rc.rules_path, "Rules JSON")->required();
  sub->add_option("--dataset", rc.dataset_path, "Dataset CSV")->required();
}

void add_search(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--max-radius", rc.search.max_radius_steps, "Counterfactual L1 radius limit in grid steps")
      ->check(CLI::PositiveNumber);
  sub->add_option("--query-budget", rc.search.query_budget, "Oracle queries per counterfactual search")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grammar-constrained refinement of safety operational rules"};
  app.name("ruleforge");
  app.require_subcommand(1);
  bool json_diagnostics = false;
  app.add_flag("--json", json_diagnostics, "Machine-readable JSON diagnostics on stderr");
  RunConfig rc;

  auto* sim = app.add_subcommand("sim", "Sample a labeled dataset from the oracle");
  add_common(sim, rc);
  sim->add_option("--n", rc.n, "Number of runs");
  sim->add_option("--seed", rc.sim_seed, "Sampling seed");
  sim->add_flag("--fixture", rc.fixture, "Write the 198-run fixture with its baseline rule set instead");
  sim->add_option("--out-dir", rc.out_dir, "Directory for dataset.csv and config.json")->required();

  auto* eval = app.add_subcommand("eval", "Per-rule decisiveness on a dataset");
  add_common(eval, rc);
  add_rules_dataset(eval, rc);
  add_eps(eval, rc);
  eval->add_option("--out", rc.out, "Decisiveness JSON path (stdout if omitted)");

  auto* cf = app.add_subcommand("cf", "Counterfactual evidence for an inconsistent rule");
  add_common(cf, rc);
  add_rules_dataset(cf, rc);
  add_eps(cf, rc);
  add_search(cf, rc);
  cf->add_option("--rule-id", rc.rule_id, "Target rule (first rule if omitted)");
  cf->add_option("--out", rc.out, "Evidence JSON path (stdout if omitted)");

  auto* refine = app.add_subcommand("refine", "Refine an inconsistent rule and validate the result");
  add_common(refine, rc);
  add_rules_dataset(refine, rc);
  add_eps(refine, rc);
  add_search(refine, rc);
  refine->add_option("--rule-id", rc.rule_id, "Target rule (first rule if omitted)");
  refine->add_option("--generator", rc.generator, "Candidate generator")
      ->check(CLI::IsMember({"local", "llm", "mock"}));
  refine->add_option("--mock-responses", rc.mock_path, "JSON array of scripted responses for --generator mock");
  refine->add_option("--max-attempts", rc.max_attempts, "Refine-validate attempts")->check(CLI::PositiveNumber);
  refine->add_option("--grid-cap", rc.contradiction.grid_cap, "Contradiction witness grid points per pair");
  refine->add_option("--max-depth", rc.contradiction.max_depth, "Contradiction bisection depth")
      ->check(CLI::NonNegativeNumber);
  refine->add_option("--samples", rc.contradiction.samples, "Contradiction random samples per pair");
  refine->add_option("--seed", rc.contradiction.seed, "Contradiction sampling seed");
  refine->add_option("--out-dir", rc.out_dir, "Directory for outcome.json, report.txt and evidence.json")
      ->required();

  auto* metrics = app.add_subcommand("metrics", "DG, GC, SV and CM for a refined rule");
  add_common(metrics, rc);
  add_rules_dataset(metrics, rc);
  add_eps(metrics, rc);
  metrics->add_option("--rule-id", rc.rule_id, "Original rule (first rule if omitted)");
  metrics->add_option("--refined", rc.refined_text, "Refined rule text");
  metrics->add_option("--refined-file", rc.refined_file, "File holding the refined rule text as produced");
  metrics->add_option("--outcome", rc.outcome_path, "outcome.json from refine");
  metrics->add_option("--variant", rc.variant, "Row label in the table");
  metrics->add_option("--out", rc.out, "Metrics JSON path");

  auto* check = app.add_subcommand("check", "Grammar and vocabulary check of a rules file");
  add_common(check, rc);
  check->add_option("--rules", rc.rules_path, "Rules JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    Session(out, err, json_diagnostics).diagnostic("error", "UsageError", e.what(), kExitUsage);
    return kExitUsage;
  }

  Session session(out, err, json_diagnostics);
  auto fail = [&](std::string_view kind, const std::string& message, int code) {
    session.diagnostic("error", kind, message, code);
    return code;
  };
  try {
    CommandResult r;
    if (*sim) r = cmd_sim(session, rc);
    if (*eval) r = cmd_eval(session, rc);
    if (*cf) r = cmd_cf(session, rc);
    if (*refine) r = cmd_refine(session, rc);
    if (*metrics) r = cmd_metrics(session, rc);
    if (*check) r = cmd_check(session, rc);
    return r.code;
  } catch (const UsageError& e) {
    return fail("UsageError", e.what(), kExitUsage);
  } catch (const ConfigError& e) {
    return fail("ConfigError", e.what(), kExitUsage);
  } catch (const NoInconsistency& e) {
    return fail("NoInconsistency", e.what(), kExitRejected);
  } catch (const FormatError& e) {
    return fail("FormatError", e.what(), kExitFormat);
  } catch (const ParseError& e) {
    return fail("ParseError", e.what(), kExitFormat);
  } catch (const RuleError& e) {
    return fail("RuleError", e.what(), kExitFormat);
  } catch (const std::exception& e) {
    return fail("Error", e.what(), kExitFormat);
  }
}

}  // namespace ruleforge
