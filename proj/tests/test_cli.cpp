#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "subgeo/errors.hpp"
#include "subgeo/pipeline.hpp"
#include "subgeo/scenario.hpp"

using namespace subgeo;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = SUBGEO_SCENARIO_DIR;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("subgeo_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SUBGEO_CLI_PATH + "\" " + args + " 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(raw));
  return WEXITSTATUS(raw);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_same_tree(const fs::path& a, const fs::path& b) {
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto other = b / e.path().filename();
    REQUIRE(fs::exists(other));
    CHECK_MESSAGE(slurp(e.path()) == slurp(other), e.path().filename().string());
    ++files;
  }
  CHECK(files == static_cast<std::size_t>(std::distance(fs::directory_iterator(b), {})));
  CHECK(files >= 4);
}

json two_state_json() {
  return json{{"id", "t"},
              {"model", "two_state_symmetric()"},
              {"rate", {{"kind", "polynomial"}, {"alpha", 0.5}}},
              {"lyapunov", {{"values", {1, 4}}}},
              {"estimator", {{"n_paths", 5000}}},
              {"psi_hitting", {{"n_paths", 2000}}}};
}

std::string write_json(const std::string& name, const json& j) {
  const auto p = fs::temp_directory_path() / ("subgeo_test_cli_" + name + ".json");
  std::ofstream(p) << j.dump(2);
  return p.string();
}

}  // namespace

TEST_CASE("validate-rate exit codes") {
  const auto out = scratch("rates");
  CHECK(run_cli("validate-rate --scenario " + (kScenarios / "rate_sqrt.json").string() +
                " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "summary.json"));
  CHECK(fs::exists(out / "rate_checks.csv"));

  // alpha = 1 is outside (0, 1): configuration error
  CHECK(run_cli("validate-rate --scenario " + (kScenarios / "rate_alpha_one.json").string() +
                " --out " + out.string()) == 2);

  // phi(v) = v is not sublinear: the assumptions fail
  CHECK(run_cli("validate-rate --scenario " + (kScenarios / "rate_identity.json").string() +
                " --out " + out.string()) == 1);
  const auto summary = json::parse(slurp(out / "summary.json"));
  CHECK(summary.at("exit_code") == 1);
}

TEST_CASE("argument errors exit 2") {
  CHECK(run_cli("") == 2);
  CHECK(run_cli("pipeline") == 2);
  CHECK(run_cli("pipeline --scenario " + (kScenarios / "missing.json").string()) == 2);
  CHECK(run_cli("frobnicate --scenario x") == 2);
  CHECK(run_cli("--help >/dev/null") == 0);
}

TEST_CASE("two-state demo passes and is reproducible") {
  const auto a = scratch("demo_a"), b = scratch("demo_b"), c = scratch("demo_c");
  const auto sc = (kScenarios / "two_state_demo.json").string();
  REQUIRE(run_cli("pipeline --quiet --scenario " + sc + " --out " + a.string()) == 0);
  REQUIRE(run_cli("pipeline --quiet --scenario " + sc + " --out " + b.string()) == 0);
  REQUIRE(run_cli("pipeline --quiet --jobs 8 --scenario " + sc + " --out " + c.string()) == 0);
  for (const char* f : {"summary.json", "rate_checks.csv", "drift_certificate.csv",
                        "hitting_estimates.csv", "tv_curve.csv"})
    CHECK_MESSAGE(fs::exists(a / f), f);
  require_same_tree(a, b);
  require_same_tree(a, c);

  const auto summary = json::parse(slurp(a / "summary.json"));
  for (const auto& st : summary.at("stages")) CHECK_MESSAGE(st.at("status") == "pass", st.at("name"));
}

TEST_CASE("seed override changes estimates only") {
  const auto a = scratch("seed_a"), b = scratch("seed_b");
  const auto sc = (kScenarios / "constant_v.json").string();
  REQUIRE(run_cli("pipeline --quiet --scenario " + sc + " --out " + a.string()) == 0);
  REQUIRE(run_cli("pipeline --quiet --seed 99 --scenario " + sc + " --out " + b.string()) == 0);
  CHECK(slurp(a / "drift_certificate.csv") == slurp(b / "drift_certificate.csv"));
  CHECK(slurp(a / "tv_curve.csv") == slurp(b / "tv_curve.csv"));
  CHECK(slurp(a / "hitting_estimates.csv") != slurp(b / "hitting_estimates.csv"));
}

TEST_CASE("constant V with C = E passes every stage") {
  const auto s = load_scenario(kScenarios / "constant_v.json");
  PipelineOptions o;
  o.out_dir = scratch("constant_v");
  o.quiet = true;
  const auto res = run_pipeline(s, o);
  CHECK(res.exit_code == 0);
  for (const auto& st : res.stages) CHECK_MESSAGE(st.status == "pass", st.name);
  // the literal psi form is reported but does not gate
  REQUIRE(res.stage("condition2_from_hitting") != nullptr);
}

TEST_CASE("a failing stage skips the rest") {
  // V = 1 everywhere but C = {0}: at state 1 the drift LV + phi(V) = phi(1) > 0
  auto j = two_state_json();
  j["lyapunov"] = {{"values", {1, 1}}};
  j["target"] = {0};
  const auto s = parse_scenario(j);
  PipelineOptions o;
  o.out_dir = scratch("skip");
  o.quiet = true;
  const auto res = run_pipeline(s, o);
  CHECK(res.exit_code == 1);
  REQUIRE(res.stage("drift") != nullptr);
  CHECK(res.stage("drift")->status == "fail");
  for (const char* later : {"rate", "condition2_from_v", "condition1", "condition2_from_hitting",
                            "step_bounds"}) {
    REQUIRE(res.stage(later) != nullptr);
    CHECK_MESSAGE(res.stage(later)->status == "skipped", later);
  }
  CHECK(fs::exists(o.out_dir / "summary.json"));
  CHECK(fs::exists(o.out_dir / "drift_certificate.csv"));

  CHECK(run_cli("pipeline --quiet --scenario " + write_json("skip", j) + " --out " +
                scratch("skip_cli").string()) == 1);
}

TEST_CASE("configuration errors") {
  const auto rejects = [](json j) { CHECK_THROWS_AS(parse_scenario(j), ConfigError); };

  auto j = two_state_json();
  j["colour"] = "blue";
  rejects(j);

  j = two_state_json();
  j["estimator"]["n_path"] = 10;
  rejects(j);

  j = two_state_json();
  j["rate"]["alpha"] = 1.0;
  rejects(j);

  j = two_state_json();
  j["rate"]["alpha"] = 0.0;
  rejects(j);

  j = two_state_json();
  j["rate"]["kind"] = "exponential";
  rejects(j);

  j = two_state_json();
  j["lyapunov"] = {{"power", -1}};
  rejects(j);

  j = two_state_json();
  j["lyapunov"] = {{"values", {0.5, 2}}};
  rejects(j);

  j = two_state_json();
  j["estimator"]["seed"] = -3;
  rejects(j);

  j = two_state_json();
  j["jobs"] = 0;
  rejects(j);

  j = two_state_json();
  j.erase("rate");
  rejects(j);

  j = two_state_json();
  j["convergence"] = {{"burn_in", 1}};
  rejects(j);

  // a model the registry does not know
  j = two_state_json();
  j["model"] = "no_such_chain(1)";
  PipelineOptions o;
  o.out_dir = scratch("bad_model");
  o.quiet = true;
  CHECK_THROWS_AS(run_pipeline(parse_scenario(j), o), ConfigError);
  CHECK(run_cli("pipeline --scenario " + write_json("bad_model", j) + " --out " +
                o.out_dir.string()) == 2);

  // a V table of the wrong length
  j = two_state_json();
  j["lyapunov"] = {{"values", {1, 2, 3}}};
  CHECK_THROWS_AS(run_pipeline(parse_scenario(j), o), ConfigError);

  // malformed JSON
  const auto p = fs::temp_directory_path() / "subgeo_test_cli_broken.json";
  std::ofstream(p) << "{\"id\": ";
  CHECK_THROWS_AS(load_scenario(p), ConfigError);
}
