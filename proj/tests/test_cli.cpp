#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "tasklaw/cli.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kRoot(TASKLAW_SOURCE_DIR);

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = tasklaw::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string model(const char* name) { return (kRoot / "models" / name).string(); }
std::string fixture(const char* name) { return (kRoot / "tests/fixtures" / name).string(); }

fs::path scratch(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "tasklaw_cli_test";
  fs::create_directories(dir);
  std::ofstream(dir / name) << text;
  return dir / name;
}

}  // namespace

TEST_CASE("shipped models check cleanly") {
  for (const auto& e : fs::directory_iterator(kRoot / "models")) {
    CAPTURE(e.path().string());
    const auto r = run({"check", e.path().string()});
    CHECK(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["schema"] == tasklaw::cli::kSchema);
    CHECK(j["exit_status"] == 0);
    CHECK(j["models"][0]["verdict"] == "consistent");
  }
}

TEST_CASE("fixture exit codes") {
  const std::vector<std::pair<const char*, int>> table{
      {"contradiction.ctm", 1},   {"malformed.ctm", 2},     {"static_timer.ctm", 2},
      {"undeclared_task.ctm", 2}, {"partial_step.ctm", 2},  {"single_timer.ctm", 0},
      {"refuted_timer_law.ctm", 1}};
  for (const auto& [name, code] : table) {
    CAPTURE(name);
    CHECK(run({"check", fixture(name)}).code == code);
  }
  const auto bad = run({"check", fixture("malformed.ctm"), "--format", "text"});
  CHECK(bad.err.find("malformed.ctm:3:") != std::string::npos);
  CHECK(run({"check", (kRoot / "missing.ctm").string()}).code == 2);
  CHECK(run({"check"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("contradictions carry both derivations") {
  const auto j = json::parse(run({"check", fixture("contradiction.ctm")}).out);
  const auto& c = j["models"][0]["contradictions"];
  REQUIRE(c.size() == 1);
  CHECK(c[0]["task"] == "x -> z on Q");
  CHECK(c[0]["premises"] == json::array({0, 1}));
  CHECK(j["models"][0]["verdict"] == "contradiction");
}

TEST_CASE("null task is derived from disjoint tasks") {
  const auto j = json::parse(run({"check", model("null_task.ctm")}).out);
  const auto& derived = j["models"][0]["derived"];
  REQUIRE(derived.size() == 1);
  CHECK(derived[0]["status"] == "possible");
  CHECK(derived[0]["declared_support"] == json::array({0, 1}));
}

TEST_CASE("reports are deterministic") {
  for (const char* name : {"timers.ctm", "flip.ctm", "null_task.ctm"}) {
    const auto a = run({"check", model(name)});
    const auto b = run({"check", model(name)});
    CHECK(a.out == b.out);
  }
  const auto timed = json::parse(run({"check", model("flip.ctm"), "--timing"}).out);
  CHECK(timed["models"][0].contains("timing_ms"));
}

TEST_CASE("relative paths fall back to TASKLAW_MODELS") {
  ::setenv("TASKLAW_MODELS", (kRoot / "models").c_str(), 1);
  CHECK(run({"check", "timers.ctm"}).code == 0);
  CHECK(run({"check", "no_such_model.ctm"}).code == 2);
  ::unsetenv("TASKLAW_MODELS");
  if (!fs::exists("timers.ctm")) CHECK(run({"check", "timers.ctm"}).code == 2);
}

TEST_CASE("classify") {
  const auto j = json::parse(run({"classify", model("timers.ctm")}).out);
  const auto& classes = j["models"][0]["classes"];
  REQUIRE(classes.size() == 2);
  CHECK(classes[0]["duration"] == 5);
  CHECK(classes[0]["members"] == json::array({"C5a", "C5b", "K55", "K57", "P5"}));
  CHECK(classes[1]["duration"] == 7);
  CHECK(run({"classify", model("flip.ctm")}).code == 2);
}

TEST_CASE("dynamics") {
  const fs::path csv = fs::temp_directory_path() / "tasklaw_cli_test_ratios.csv";
  const auto r = run({"dynamics", model("rotation.ctm"), "--lambda", "0", "--csv", csv.string()});
  REQUIRE(r.code == 0);
  const auto e = json::parse(r.out)["estimate"];
  const double omega = 2.0 * std::acos(-1.0) / 64.0;
  CHECK(std::abs(e["extrapolated"].get<double>() - omega) / omega < 0.05);
  std::ifstream in(csv);
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "delta,ratio");
  CHECK(rows[1].rfind("8,", 0) == 0);

  const auto linear = json::parse(run({"dynamics", model("drift.ctm"), "--lambda", "3"}).out);
  for (const auto& ratio : linear["estimate"]["ratios"]) CHECK(ratio.get<double>() == 1.0);

  CHECK(run({"dynamics", model("rotation.ctm"), "--lambda", "0", "--schedule", "2"}).code == 2);
  CHECK(run({"dynamics", model("rotation.ctm"), "--lambda", "0", "--schedule", "1,2,4"}).code == 2);
  CHECK(run({"dynamics", model("rotation.ctm"), "--lambda", "0", "--schedule", "16,8,4"}).code == 2);
  CHECK(run({"dynamics", model("rotation.ctm"), "--lambda", "60"}).code == 2);
  CHECK(run({"dynamics", model("rotation.ctm"), "--lambda", "0", "--variable", "w"}).code == 2);
}

TEST_CASE("dynamics refuses a failing transition") {
  // The pointer moves two cells per step but the readings assume one.
  const auto path = scratch("fast.ctm",
                            "substrate ring { states 0..15; step shift 2 }\n"
                            "timer counter C1 { bits 4; threshold 1 }\n"
                            "timer counter C2 { bits 4; threshold 2 }\n"
                            "timer counter C3 { bits 4; threshold 3 }\n"
                            "variable p on ring {\n"
                            "  0: { 0 } = 0; 1: { 1 } = 1; 2: { 2 } = 2; 3: { 3 } = 3; 4: { 4 } = 4\n"
                            "}\n");
  const auto r = run({"dynamics", path.string(), "--lambda", "0", "--schedule", "3,2,1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("lambda=0, delta=3") != std::string::npos);
  CHECK(json::parse(r.out)["transitions"][0]["holds"] == false);
}

TEST_CASE("fmt prints canonical text") {
  const auto r = run({"fmt", model("flip.ctm")});
  REQUIRE(r.code == 0);
  std::ifstream in(model("flip.ctm"));
  std::ostringstream text;
  text << in.rdbuf();
  CHECK(text.str().find(r.out) != std::string::npos);
  CHECK(run({"fmt", fixture("malformed.ctm")}).code == 2);
}
