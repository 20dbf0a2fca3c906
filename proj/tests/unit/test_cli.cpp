#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kToy = fs::path(DCHUB_FIXTURES) / "toy";

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dchub");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dchub::cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("dchub_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

// Rewrites relative file references of the scenario-input document so it can live elsewhere.
void absolutize(json& node) {
  if (node.is_object()) {
    for (auto& [k, v] : node.items()) absolutize(v);
  } else if (node.is_string()) {
    const std::string s = node.get<std::string>();
    if (s.rfind("series/", 0) == 0) node = (kToy / s).string();
  }
}

}  // namespace

TEST_CASE("scenarios then bid on the toy fixture") {
  const auto dir = scratch("bid");
  const auto manifest = (kToy / "manifest.json").string();
  const auto s = cli({"scenarios", "-m", manifest, "-o", dir.string()});
  REQUIRE(s.code == 0);
  const auto set = load(dir / "scenarios.json");
  CHECK(set["scenarios"].size() == 6);

  const auto t0 = std::chrono::steady_clock::now();
  const auto b = cli({"bid", "-m", manifest, "-o", dir.string()});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(b.code == 0);
  CHECK(secs < 60.0);
  CHECK(b.out.find("status: optimal") != std::string::npos);
  for (const char* f : {"bid.json", "bid.csv", "vcc_A100.csv", "model.lp"}) CHECK(fs::exists(dir / f));
  const auto bid = load(dir / "bid.json");
  CHECK(bid["day_ahead_kw"].size() == 24);
  CHECK(bid["audit"]["ok"] == true);
  CHECK(slurp(dir / "bid.csv").rfind("step,day_ahead_kw\n", 0) == 0);

  SUBCASE("json console format") {
    const auto j = cli({"bid", "-m", manifest, "-o", dir.string(), "--format", "json"});
    REQUIRE(j.code == 0);
    CHECK(json::parse(j.out)["status"] == "optimal");
  }
  fs::remove_all(dir);
}

TEST_CASE("k = 1 collapses to a single certain scenario") {
  const auto dir = scratch("k1");
  json in = load(kToy / "scenario_inputs.json");
  in["k"] = 1;
  absolutize(in);
  std::ofstream(dir / "inputs.json") << in.dump(2);
  json m = load(kToy / "manifest.json");
  m["hub"] = (kToy / "hub.json").string();
  m["scenario_inputs"] = (dir / "inputs.json").string();
  m["derating"] = (kToy / "derating.json").string();
  m.erase("evaluation");
  std::ofstream(dir / "manifest.json") << m.dump(2);
  const auto r = cli({"scenarios", "-m", (dir / "manifest.json").string(), "-o", dir.string()});
  REQUIRE(r.code == 0);
  const auto set = load(dir / "scenarios.json");
  REQUIRE(set["scenarios"].size() == 1);
  CHECK(set["scenarios"][0]["probability"] == 1.0);
  fs::remove_all(dir);
}

TEST_CASE("bid outputs are byte-identical across runs") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto manifest = (kToy / "manifest.json").string();
  for (const auto& d : {a, b}) {
    REQUIRE(cli({"scenarios", "-m", manifest, "-o", d.string()}).code == 0);
    REQUIRE(cli({"bid", "-m", manifest, "-o", d.string()}).code == 0);
  }
  for (const char* f : {"scenarios.json", "model.lp", "bid.json", "bid.csv", "vcc_A100.csv"}) {
    INFO(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("evaluate and report") {
  const auto dir = scratch("eval");
  const auto e = cli({"evaluate", "-m", (kToy / "manifest.json").string(), "-o", dir.string(), "--days", "2025-07-18"});
  REQUIRE(e.code == 0);
  const std::string csv = slurp(dir / "outcomes.csv");
  CHECK(csv.rfind("date,scheme,cost_eur,emissions_kg,imbalance_kwh,renshare\n", 0) == 0);
  CHECK(csv.find("2025-07-18,ToU,") != std::string::npos);
  CHECK(csv.find("2025-07-18,Custom no WL flex,") != std::string::npos);
  CHECK(csv.find("2025-07-19") == std::string::npos);
  const auto r = cli({"report", "-i", (dir / "report.json").string()});
  REQUIRE(r.code == 0);
  for (const char* s : {"Q25", "sigma", "ToU", "Custom no WL flex"}) CHECK(r.out.find(s) != std::string::npos);
  CHECK(cli({"evaluate", "-m", (kToy / "manifest.json").string(), "-o", dir.string(), "--days", "1999-01-01"}).code ==
        2);
  fs::remove_all(dir);
}

TEST_CASE("validate-derating") {
  const auto manifest = (kToy / "manifest.json").string();
  const auto ok = cli({"validate-derating", "-m", manifest});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("verdict: PASS") != std::string::npos);
  CHECK(ok.out.find("1025") != std::string::npos);

  const auto dir = scratch("derate");
  json p = load(kToy / "derating.json");
  auto& caps = p["cap_kw"];
  REQUIRE(caps.size() == 24);
  caps[18] = 10.0;
  std::ofstream(dir / "low.json") << p.dump();
  const auto bad = cli({"validate-derating", "-m", manifest, "--profile", (dir / "low.json").string()});
  CHECK(bad.code == 1);
  CHECK(bad.out.find("verdict: FAIL") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  SUBCASE("unattainable renewable target is infeasible with a hint") {
    const auto r = cli({"bid", "-m", (kToy / "manifest_full_renewable.json").string(), "-o", dir.string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("hint: relaxing the renewable-share chance constraint") != std::string::npos);
  }
  SUBCASE("missing residual file") {
    const auto r = cli({"scenarios", "-m", (kToy / "manifest_missing_residuals.json").string(), "-o", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("spot_residuals_missing.csv") != std::string::npos);
  }
  SUBCASE("missing manifest and bad options") {
    CHECK(cli({"bid", "-m", (dir / "nope.json").string()}).code == 2);
    CHECK(cli({"bid"}).code == 2);
    CHECK(cli({"bid", "-m", "x", "--solver", "gurobi"}).code == 2);
    CHECK(cli({}).code == 2);
    CHECK(cli({"--help"}).code == 0);
  }
  SUBCASE("schema version") {
    json m = load(kToy / "manifest.json");
    m["schema_version"] = 2;
    std::ofstream(dir / "m.json") << m.dump();
    const auto r = cli({"bid", "-m", (dir / "m.json").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("schema_version") != std::string::npos);
  }
  SUBCASE("executable propagates the code") {
    const std::string cmd = std::string("\"") + DCHUB_EXE + "\" bid -m \"" +
                            (kToy / "manifest_full_renewable.json").string() + "\" -o \"" + dir.string() +
                            "\" > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 3);
  }
  fs::remove_all(dir);
}
