#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "doctest.h"
#include "ruleforge/cli.hpp"
#include "ruleforge/io.hpp"

using namespace ruleforge;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ruleforge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_command(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Fresh scratch directory holding the 198-run fixture under fx/.
class Scratch {
 public:
  Scratch() {
    static int counter = 0;
    dir_ = fs::temp_directory_path() / ("ruleforge_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    REQUIRE(cli({"sim", "--fixture", "--out-dir", path("fx")}).code == kExitOk);
  }
  ~Scratch() { fs::remove_all(dir_); }

  std::string path(const std::string& rel) const { return (dir_ / rel).string(); }
  std::string write(const std::string& rel, const std::string& content) const {
    write_text_file(dir_ / rel, content);
    return path(rel);
  }
  std::vector<std::string> data() const { return {"--rules", path("fx/rules.json"), "--dataset", path("fx/dataset.csv")}; }

 private:
  fs::path dir_;
};

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const char* kTupleText = "[[('greater_than_func','ARG1','0')]]";

}  // namespace

TEST_CASE("refine with the local generator on the fixture") {
  Scratch s;
  const Run r = cli(cat({"refine", "--generator", "local", "--out-dir", s.path("out")}, s.data()));
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("Refined rule: (dist_front < 4.1) and (ego_speed > 0)") != std::string::npos);
  const RefineResult back = parse_outcome_json(read_text_file(s.path("out/outcome.json")));
  REQUIRE(std::holds_alternative<RefinementOutcome>(back));
  CHECK(std::get<RefinementOutcome>(back).dg_after == 1.0);
  CHECK(fs::exists(s.path("out/report.txt")));
  CHECK(parse_evidence_json(read_text_file(s.path("out/evidence.json"))).pairs.size() == 27);
  const auto refined = parse_rules_json(read_text_file(s.path("out/refined_rules.json")));
  CHECK(refined.size() == 4);
}

TEST_CASE("check on tuple-form text exits 2 and reports gc below 1") {
  Scratch s;
  nlohmann::json rules = nlohmann::json::array();
  rules.push_back({{"id", "tuple"}, {"polarity", "pass"}, {"text", kTupleText}});
  const std::string path = s.write("rules.json", rules.dump());
  const Run r = cli({"check", "--rules", path});
  CHECK(r.code == kExitFormat);
  CHECK(r.out.find("tuple (pass): parse error") != std::string::npos);
  CHECK(r.out.find("gc=1.00") == std::string::npos);
  CHECK(r.out.find("gc=0.") != std::string::npos);

  CHECK(cli({"check", "--rules", s.path("fx/rules.json")}).code == kExitOk);
  const std::string oov = s.write("oov.json", R"([{"id": "x", "polarity": "pass", "text": "ARG3 > 1"}])");
  const Run v = cli({"check", "--rules", oov});
  CHECK(v.code == kExitFormat);
  CHECK(v.out.find("UnknownVariable ARG3") != std::string::npos);
}

TEST_CASE("refine with a scripted bad candidate exits 3") {
  Scratch s;
  const std::string mock = s.write("mock.json", nlohmann::json::array({kTupleText}).dump());
  const Run r = cli(cat({"refine", "--generator", "mock", "--mock-responses", mock, "--max-attempts", "1", "--out-dir",
                         s.path("out")},
                        s.data()));
  CHECK(r.code == kExitRejected);
  CHECK(r.err.find("exhausted after 1 attempt") != std::string::npos);
  const RefineResult back = parse_outcome_json(read_text_file(s.path("out/outcome.json")));
  REQUIRE(std::holds_alternative<Exhausted>(back));
  CHECK(std::get<Exhausted>(back).reports.size() == 1);
  CHECK_FALSE(fs::exists(s.path("out/refined_rules.json")));
}

TEST_CASE("fail-fast: bad inputs write nothing") {
  Scratch s;
  const std::string warn = s.write("warn.json", R"([{"id": "r1", "polarity": "warn", "text": "dist_front < 5"}])");
  Run r = cli({"refine", "--rules", warn, "--dataset", s.path("fx/dataset.csv"), "--out-dir", s.path("o1")});
  CHECK(r.code == kExitFormat);
  CHECK(r.err.find("rules[0].polarity") != std::string::npos);
  CHECK_FALSE(fs::exists(s.path("o1")));

  std::string csv = read_text_file(s.path("fx/dataset.csv"));
  const auto pos = csv.find(",Pass\n");
  REQUIRE(pos != std::string::npos);
  csv.replace(pos, 6, ",Fail\n");
  const std::string flipped = s.write("flipped.csv", csv);
  r = cli({"refine", "--rules", s.path("fx/rules.json"), "--dataset", flipped, "--out-dir", s.path("o2")});
  CHECK(r.code == kExitFormat);
  CHECK(r.err.find("disagrees with the oracle") != std::string::npos);
  CHECK_FALSE(fs::exists(s.path("o2")));

  const std::string out_of_range = s.write("range.csv", "ego_speed,dist_front,lane_offset,outcome\n99,1,0,Pass\n");
  r = cli({"eval", "--rules", s.path("fx/rules.json"), "--dataset", out_of_range, "--out", s.path("o3.json")});
  CHECK(r.code == kExitFormat);
  CHECK_FALSE(fs::exists(s.path("o3.json")));

  r = cli({"cf", "--rules", s.path("missing.json"), "--dataset", s.path("fx/dataset.csv"), "--out", s.path("o4.json")});
  CHECK(r.code == kExitFormat);
  CHECK_FALSE(fs::exists(s.path("o4.json")));

  const std::string oov = s.write("oov.json", R"([{"id": "x", "polarity": "pass", "text": "ARG3 > 1"}])");
  r = cli({"refine", "--rules", oov, "--dataset", s.path("fx/dataset.csv"), "--out-dir", s.path("o5")});
  CHECK(r.code == kExitFormat);
  CHECK_FALSE(fs::exists(s.path("o5")));
}

TEST_CASE("llm mode without configuration is a usage error") {
  Scratch s;
  ::unsetenv("RULEFORGE_LLM_BASE_URL");
  ::unsetenv("RULEFORGE_LLM_API_KEY");
  ::unsetenv("RULEFORGE_LLM_MODEL");
  const Run r = cli(cat({"refine", "--generator", "llm", "--out-dir", s.path("out")}, s.data()));
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("RULEFORGE_LLM_BASE_URL") != std::string::npos);
  CHECK_FALSE(fs::exists(s.path("out")));
}

TEST_CASE("usage errors") {
  Scratch s;
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"refine", "--generator", "cloud", "--out-dir", s.path("o")}).code == kExitUsage);
  CHECK(cli(cat({"refine", "--max-attempts", "0", "--out-dir", s.path("o")}, s.data())).code == kExitUsage);
  CHECK(cli(cat({"metrics", "--refined", "a > 1", "--refined-file", s.path("x")}, s.data())).code == kExitUsage);
  CHECK(cli(cat({"cf", "--rule-id", "nope"}, s.data())).code == kExitUsage);
  CHECK(cli(cat({"refine", "--mock-responses", s.path("x"), "--out-dir", s.path("o")}, s.data())).code == kExitUsage);
  CHECK(cli({"sim", "--fixture", "--config", s.path("x"), "--out-dir", s.path("o")}).code == kExitUsage);
  CHECK_FALSE(fs::exists(s.path("o")));
  const Run help = cli({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("refine") != std::string::npos);
}

TEST_CASE("json diagnostics") {
  Scratch s;
  const Run r = cli({"--json", "check", "--rules", s.path("missing.json")});
  CHECK(r.code == kExitFormat);
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j["kind"] == "FormatError");
  CHECK(j["exit_code"] == 2);
}

TEST_CASE("eval, cf and metrics outputs") {
  Scratch s;
  Run r = cli(cat({"eval", "--out", s.path("eval.json")}, s.data()));
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("r1 (pass): n=198 mismatches=27 dg=0.8636") != std::string::npos);
  const auto ev = nlohmann::json::parse(read_text_file(s.path("eval.json")));
  CHECK(ev["schema_version"] == 1);
  CHECK(ev["rules"][0]["n_mismatch"] == 27);

  r = cli(cat({"cf", "--rule-id", "r1"}, s.data()));
  CHECK(r.code == kExitOk);
  CHECK(parse_evidence_json(r.out).pairs.size() == 27);
  CHECK(cli(cat({"cf", "--rule-id", "h_fail_far"}, s.data())).code == kExitRejected);

  r = cli(cat({"metrics", "--refined", "(dist_front < 4.1) and (ego_speed > 0)", "--out", s.path("m.json")}, s.data()));
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("DG: 0.8636 -> 1") != std::string::npos);
  CHECK(r.out.find("candidate") != std::string::npos);
  const auto m = nlohmann::json::parse(read_text_file(s.path("m.json")));
  CHECK(m["dg_after"] == 1.0);
  CHECK(m["gc"]["gc"] == 1.0);

  const std::string raw = s.write("raw.txt", "(dist_front < 4.1) and and (ego_speed > 0)");
  CHECK(cli(cat({"metrics", "--refined-file", raw}, s.data())).code == kExitFormat);
}

TEST_CASE("fixed seeds give byte-identical artifacts") {
  Scratch a, b;
  for (const Scratch* s : {&a, &b}) {
    REQUIRE(cli({"sim", "--n", "50", "--seed", "9", "--out-dir", s->path("sim")}).code == kExitOk);
    REQUIRE(cli(cat({"refine", "--out-dir", s->path("ref")}, s->data())).code == kExitOk);
  }
  for (const char* f : {"sim/dataset.csv", "sim/config.json", "fx/dataset.csv", "fx/rules.json", "ref/outcome.json",
                        "ref/report.txt", "ref/evidence.json"}) {
    CHECK_MESSAGE(read_text_file(a.path(f)) == read_text_file(b.path(f)), f);
  }
  const std::string csv = read_text_file(a.path("sim/dataset.csv"));
  CHECK(write_dataset_csv(parse_dataset_csv(csv)) == csv);
  const std::string cfg = read_text_file(a.path("sim/config.json"));
  CHECK(write_oracle_config_json(parse_oracle_config_json(cfg)) == cfg);
}
