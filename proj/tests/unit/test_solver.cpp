#include <doctest.h>

#include <Highs.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "dchub/domain/errors.hpp"
#include "dchub/milp/planning.hpp"
#include "dchub/solver/checker.hpp"
#include "dchub/solver/interchange.hpp"
#include "dchub/solver/solver.hpp"
#include "toy_hub.hpp"

using namespace dchub;
namespace fs = std::filesystem;

namespace {

struct Knapsack {
  std::vector<double> weight, value;
  double capacity = 0.0;
};

Knapsack make_knapsack(std::size_t n, std::uint64_t seed) {
  Knapsack k;
  std::uint64_t s = seed;
  auto next = [&] {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return double((s >> 33) % 97 + 3);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    k.weight.push_back(next());
    k.value.push_back(next());
    total += k.weight.back();
  }
  k.capacity = std::floor(total * 0.4);
  return k;
}

MilpModel knapsack_model(const Knapsack& k) {
  MilpModel m;
  LinearExpr cap, obj;
  for (std::size_t i = 0; i < k.weight.size(); ++i) {
    const VarId x = m.add_variable("x(" + std::to_string(i) + ")", VarKind::binary, 0, 1);
    cap.add(x, k.weight[i]);
    obj.add(x, -k.value[i]);
  }
  m.add_constraint("capacity", cap, RowSense::le, k.capacity);
  m.set_objective(obj);
  return m;
}

double brute_force(const Knapsack& k) {
  const std::size_t n = k.weight.size();
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double w = 0, v = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1u) {
        w += k.weight[i];
        v += k.value[i];
      }
    if (w <= k.capacity) best = std::max(best, v);
  }
  return -best;
}

MilpModel boxed_minimum() {
  MilpModel m;
  const VarId x = m.add_variable("x", VarKind::continuous, 0, 1);
  m.set_objective(LinearExpr().add(x, 1.0));
  return m;
}

MilpModel contradiction() {
  MilpModel m;
  const VarId x = m.add_variable("x", VarKind::continuous, -kInf, kInf);
  m.add_constraint("lo", LinearExpr().add(x, 1.0), RowSense::ge, 1.0);
  m.add_constraint("hi", LinearExpr().add(x, 1.0), RowSense::le, 0.0);
  m.set_objective(LinearExpr().add(x, 1.0));
  return m;
}

PlanningModel toy_planning(std::size_t W, std::size_t T, Sos2Encoding enc = Sos2Encoding::binary) {
  const HubSpec h = dchub::testing::toy_hub();
  const auto sc = dchub::testing::toy_scenarios(h, {.scenarios = W, .steps = T});
  ModelOptions mo;
  mo.sos2 = enc;
  return build_planning_model(h, sc, DeratingProfile::flat(300, T), mo);
}

fs::path temp_dir(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("dchub_test_" + tag + "_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

// Reads an interchange file with the HiGHS parser and returns its optimum.
double highs_optimum(const fs::path& file) {
  Highs h;
  h.setOptionValue("output_flag", false);
  h.setOptionValue("mip_rel_gap", 1e-9);
  REQUIRE(h.readModel(file.string()) != HighsStatus::kError);
  h.run();
  REQUIRE(h.getModelStatus() == HighsModelStatus::kOptimal);
  return h.getInfo().objective_function_value;
}

}  // namespace

TEST_CASE("interchange writers") {
  const auto dir = temp_dir("writers");
  SUBCASE("boxed minimum solves to zero in both formats") {
    const auto m = boxed_minimum();
    write_interchange_file(m, dir / "box.lp", InterchangeFormat::lp);
    write_interchange_file(m, dir / "box.mps", InterchangeFormat::mps);
    CHECK(highs_optimum(dir / "box.lp") == doctest::Approx(0.0));
    CHECK(highs_optimum(dir / "box.mps") == doctest::Approx(0.0));
  }
  SUBCASE("knapsack files agree with the model") {
    const auto k = make_knapsack(12, 3);
    const auto m = knapsack_model(k);
    write_interchange_file(m, dir / "k.lp", InterchangeFormat::lp);
    write_interchange_file(m, dir / "k.mps", InterchangeFormat::mps);
    CHECK(highs_optimum(dir / "k.lp") == doctest::Approx(brute_force(k)));
    CHECK(highs_optimum(dir / "k.mps") == doctest::Approx(brute_force(k)));
  }
  SUBCASE("planning model files reproduce the embedded optimum") {
    const auto pm = toy_planning(2, 6);
    SolveOptions o;
    o.mip_gap = 1e-9;
    const auto s = solve(pm.model, o);
    REQUIRE(s.status == SolveStatus::optimal);
    write_interchange_file(pm.model, dir / "toy.lp", InterchangeFormat::lp);
    write_interchange_file(pm.model, dir / "toy.mps", InterchangeFormat::mps);
    CHECK(highs_optimum(dir / "toy.lp") == doctest::Approx(s.objective).epsilon(1e-7));
    CHECK(highs_optimum(dir / "toy.mps") == doctest::Approx(s.objective).epsilon(1e-7));
  }
  SUBCASE("byte-stable output") {
    const auto a = write_interchange(toy_planning(2, 4).model, InterchangeFormat::lp);
    const auto b = write_interchange(toy_planning(2, 4).model, InterchangeFormat::lp);
    CHECK(a == b);
    CHECK(write_interchange(toy_planning(2, 4).model, InterchangeFormat::mps) ==
          write_interchange(toy_planning(2, 4).model, InterchangeFormat::mps));
  }
  SUBCASE("golden LP file of the two-scenario toy hub") {
    const auto text = write_interchange(toy_planning(2, 4).model, InterchangeFormat::lp);
    const fs::path golden = fs::path(DCHUB_FIXTURES) / "golden" / "toy_2scenario_4step.lp";
    if (std::getenv("DCHUB_UPDATE_GOLDEN")) {
      fs::create_directories(golden.parent_path());
      std::ofstream(golden, std::ios::binary) << text;
    }
    std::ifstream in(golden, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing golden file " << golden.string());
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == text);
  }
  SUBCASE("native SOS section") {
    const auto pm = toy_planning(1, 2, Sos2Encoding::native);
    const auto lp = write_interchange(pm.model, InterchangeFormat::lp, {.native_sos2 = true});
    CHECK(lp.find("SOS") != std::string::npos);
    CHECK(lp.find("orc_sos2(w000,t00): S2::") != std::string::npos);
    CHECK_THROWS_AS(write_interchange(pm.model, InterchangeFormat::mps), SerializationError);
    const auto encoded = write_interchange(toy_planning(1, 2).model, InterchangeFormat::lp);
    CHECK(encoded.find("S2::") == std::string::npos);
  }
  SUBCASE("truncation collisions are reported") {
    MilpModel m;
    const std::string stem(kMaxNameLength, 'a');
    m.add_variable(stem + "_one", VarKind::continuous, 0, 1);
    m.add_variable(stem + "_two", VarKind::continuous, 0, 1);
    try {
      write_interchange(m, InterchangeFormat::mps);
      FAIL("expected SerializationError");
    } catch (const SerializationError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("_one") != std::string::npos);
      CHECK(msg.find("_two") != std::string::npos);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("embedded solve") {
  SUBCASE("lower bound") {
    MilpModel m;
    const VarId x = m.add_variable("x", VarKind::continuous, -kInf, kInf);
    m.add_constraint("c", LinearExpr().add(x, 1.0), RowSense::ge, 3.0);
    m.set_objective(LinearExpr().add(x, 1.0));
    const auto s = solve(m, {});
    CHECK(s.status == SolveStatus::optimal);
    CHECK(s.objective == doctest::Approx(3.0));
    CHECK(s.by_name(m).at("x") == doctest::Approx(3.0));
  }
  SUBCASE("knapsack matches brute force") {
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto k = make_knapsack(15, seed);
      const auto m = knapsack_model(k);
      SolveOptions o;
      o.mip_gap = 0.0;
      const auto s = solve(m, o);
      REQUIRE(s.status == SolveStatus::optimal);
      CHECK(s.objective == doctest::Approx(brute_force(k)));
      CHECK(check_solution(m, s.values).ok());
    }
  }
  SUBCASE("contradiction") {
    const auto s = solve(contradiction(), {});
    CHECK(s.status == SolveStatus::infeasible);
    CHECK_FALSE(s.has_values());
  }
  SUBCASE("unbounded") {
    MilpModel m;
    const VarId x = m.add_variable("x", VarKind::continuous, -kInf, kInf);
    m.add_constraint("c", LinearExpr().add(x, 1.0), RowSense::le, 3.0);
    m.set_objective(LinearExpr().add(x, 1.0));
    CHECK(solve(m, {}).status == SolveStatus::unbounded);
  }
  SUBCASE("time limit") {
    const auto pm = toy_planning(20, 24);
    SolveOptions o;
    o.time_limit = 0.001;
    const auto s = solve(pm.model, o);
    CHECK(s.status == SolveStatus::time_limit);
    if (s.has_values()) CHECK(std::isfinite(s.gap));
  }
  SUBCASE("unknown backend") { CHECK_THROWS_AS(make_backend("gurobi"), InputError); }
  SUBCASE("concurrent solves of distinct models") {
    std::vector<PlanningModel> models;
    for (std::size_t w = 1; w <= 4; ++w) models.push_back(toy_planning(w, 6));
    std::vector<double> seq(4), par(4);
    SolveOptions o;
    o.mip_gap = 1e-9;
    for (std::size_t i = 0; i < 4; ++i) seq[i] = solve(models[i].model, o).objective;
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < 4; ++i)
      threads.emplace_back([&, i] { par[i] = solve(models[i].model, o).objective; });
    for (auto& t : threads) t.join();
    for (std::size_t i = 0; i < 4; ++i) CHECK(par[i] == doctest::Approx(seq[i]).epsilon(1e-8));
  }
}

TEST_CASE("independent checker") {
  MilpModel m;
  const VarId x = m.add_variable("x", VarKind::continuous, 0, 2);
  const VarId b = m.add_variable("b", VarKind::binary, 0, 1);
  const VarId l0 = m.add_variable("l0", VarKind::continuous, 0, 1);
  const VarId l1 = m.add_variable("l1", VarKind::continuous, 0, 1);
  const VarId l2 = m.add_variable("l2", VarKind::continuous, 0, 1);
  m.add_constraint("row", LinearExpr().add(x, 1.0).add(b, 1.0), RowSense::le, 2.5);
  m.add_sos2("s", {l0, l1, l2}, {0, 1, 2}, false);
  m.set_objective(LinearExpr().add(x, 2.0).add_constant(1.0));

  const auto good = check_solution(m, {1.0, 1.0, 0.5, 0.5, 0.0});
  CHECK(good.ok());
  CHECK(good.objective == doctest::Approx(3.0));
  CHECK_FALSE(check_solution(m, {2.5, 0.0, 0, 0, 0}).ok());   // bound
  CHECK_FALSE(check_solution(m, {1.0, 0.5, 0, 0, 0}).ok());   // integrality
  CHECK_FALSE(check_solution(m, {2.0, 1.0, 0, 0, 0}).ok());   // row
  CHECK_FALSE(check_solution(m, {0.0, 0.0, 0.5, 0, 0.5}).ok());  // SOS2 adjacency
  CHECK_FALSE(check_solution(m, {NAN, 0.0, 0, 0, 0}).ok());
}

TEST_CASE("CBC subprocess backend") {
  const auto exe = find_cbc_executable();
  if (!exe) {
    MESSAGE("CBC not found; subprocess backend tests skipped");
    return;
  }
  SUBCASE("knapsack matches brute force") {
    const auto k = make_knapsack(15, 7);
    SolveOptions o;
    o.mip_gap = 0.0;
    const auto s = solve(knapsack_model(k), o, "cbc");
    REQUIRE(s.status == SolveStatus::optimal);
    CHECK(s.objective == doctest::Approx(brute_force(k)));
  }
  SUBCASE("contradiction") { CHECK(solve(contradiction(), {}, "cbc").status == SolveStatus::infeasible); }
  SUBCASE("agrees with HiGHS on the toy hub, native SOS2 vs binary encoding") {
    SolveOptions o;
    o.mip_gap = 1e-6;
    const auto binary = toy_planning(2, 6);
    const auto h = solve(binary.model, o, "highs");
    const auto c = solve(binary.model, o, "cbc");
    REQUIRE(h.status == SolveStatus::optimal);
    REQUIRE(c.status == SolveStatus::optimal);
    CHECK(check_solution(binary.model, c.values).ok());
    CHECK(std::abs(c.objective - h.objective) <= 1e-6 * std::abs(h.objective) + 1e-6);

    const auto native = toy_planning(2, 6, Sos2Encoding::native);
    o.native_sos2 = true;
    const auto n = solve(native.model, o, "cbc");
    REQUIRE(n.status == SolveStatus::optimal);
    CHECK(check_solution(native.model, n.values).ok());
    CHECK(std::abs(n.objective - h.objective) <= 1e-6 * std::abs(h.objective) + 1e-6);
  }
  SUBCASE("missing executable") {
    CHECK_THROWS_AS(make_cbc_backend(fs::path("/nonexistent/cbc")), EnvironmentError);
  }
  SUBCASE("kept work directory holds the model and raw output") {
    const auto dir = temp_dir("cbc_work");
    SolveOptions o;
    o.work_dir = dir;
    CHECK(solve(boxed_minimum(), o, "cbc").status == SolveStatus::optimal);
    CHECK(fs::exists(dir / "model.lp"));
    fs::remove_all(dir);
  }
}
