#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "dchub/domain/config_io.hpp"
#include "dchub/domain/derating.hpp"
#include "dchub/domain/errors.hpp"
#include "dchub/domain/timeseries_csv.hpp"
#include "dchub/evaluate/evaluate.hpp"
#include "dchub/scenario/pipeline.hpp"
#include "dchub/solver/interchange.hpp"

namespace dchub::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Typed access to the manifest document with JSON-path error messages.
class Field {
 public:
  Field(const json& j, std::string path) : j_(j), path_(std::move(path)) {}
  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }
  Field at(const char* key) const {
    if (!has(key)) throw InputError(path_ + "." + key + ": missing required field");
    return Field(j_.at(key), path_ + "." + key);
  }
  Field at(std::size_t i) const { return Field(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }
  std::size_t size() const {
    if (!j_.is_array()) throw InputError(path_ + ": expected an array");
    return j_.size();
  }
  std::string str() const {
    if (!j_.is_string()) throw InputError(path_ + ": expected a string");
    return j_.get<std::string>();
  }
  double num() const {
    if (!j_.is_number()) throw InputError(path_ + ": expected a number");
    return j_.get<double>();
  }
  std::uint64_t count() const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<long long>() >= 0))
      throw InputError(path_ + ": expected a non-negative integer");
    return j_.get<std::uint64_t>();
  }
  bool flag() const {
    if (!j_.is_boolean()) throw InputError(path_ + ": expected true or false");
    return j_.get<bool>();
  }
  template <class E>
  E choice(std::initializer_list<std::pair<const char*, E>> options) const {
    const auto s = str();
    for (const auto& [name, value] : options)
      if (s == name) return value;
    std::string list;
    for (const auto& [name, value] : options) list += std::string(list.empty() ? "" : ", ") + name;
    throw InputError(path_ + ": '" + s + "' is not one of " + list);
  }
  const json& raw() const { return j_; }

 private:
  const json& j_;
  std::string path_;
};

}  // namespace

RunManifest load_manifest(const fs::path& path) {
  const json doc = read_json_file(path);
  const Field root(doc, "manifest");
  if (!root.has("schema_version") || root.at("schema_version").count() != kSchemaVersion)
    throw InputError("manifest.schema_version: expected " + std::to_string(kSchemaVersion));
  const fs::path base = path.parent_path();
  auto resolve = [&](const Field& f) {
    fs::path p = f.str();
    return p.is_absolute() ? p : base / p;
  };
  RunManifest m;
  m.hub = resolve(root.at("hub"));
  if (root.has("scenario_inputs")) m.scenario_inputs = resolve(root.at("scenario_inputs"));
  if (root.has("scenarios")) m.scenarios = resolve(root.at("scenarios"));
  if (root.has("derating")) m.derating = resolve(root.at("derating"));
  if (root.has("output_dir")) m.output_dir = resolve(root.at("output_dir"));
  else m.output_dir = base / "out";
  if (root.has("seed")) m.seed = root.at("seed").count();
  if (root.has("write_lp")) m.write_lp = root.at("write_lp").flag();

  auto& so = m.plan.solve;
  if (root.has("solver")) {
    const auto s = root.at("solver");
    if (s.has("backend")) m.plan.backend = s.at("backend").choice<std::string>({{"highs", "highs"}, {"cbc", "cbc"}});
    if (s.has("mip_gap")) so.mip_gap = s.at("mip_gap").num();
    if (s.has("time_limit")) so.time_limit = s.at("time_limit").num();
    if (s.has("threads")) so.threads = static_cast<unsigned>(s.at("threads").count());
    if (s.has("native_sos2")) so.native_sos2 = s.at("native_sos2").flag();
    if (so.mip_gap < 0) throw InputError("manifest.solver.mip_gap: must be >= 0");
    if (!(so.time_limit > 0)) throw InputError("manifest.solver.time_limit: must be > 0");
  }
  if (m.seed) so.seed = *m.seed;
  auto& mo = m.plan.model;
  if (root.has("model")) {
    const auto s = root.at("model");
    if (s.has("scheme"))
      mo.scheme = s.at("scheme").choice<SupplyScheme>({{"custom_ppa", SupplyScheme::custom_ppa}, {"tou", SupplyScheme::tou}});
    if (s.has("sos2"))
      mo.sos2 = s.at("sos2").choice<Sos2Encoding>({{"binary", Sos2Encoding::binary}, {"native", Sos2Encoding::native}});
    if (s.has("renewable_accounting"))
      mo.accounting = s.at("renewable_accounting")
                          .choice<RenewableAccounting>({{"signed_net", RenewableAccounting::signed_net},
                                                        {"imports_only", RenewableAccounting::imports_only}});
    if (s.has("quotas"))
      mo.quotas = s.at("quotas").choice<QuotaGranularity>(
          {{"per_index", QuotaGranularity::per_index}, {"pooled", QuotaGranularity::pooled}});
  }
  if (mo.sos2 == Sos2Encoding::native) so.native_sos2 = true;
  if (root.has("vcc")) {
    const auto v = root.at("vcc");
    m.plan.vcc.kind = v.at("rule").choice<VccRule::Kind>({{"max", VccRule::Kind::max}, {"quantile", VccRule::Kind::quantile}});
    if (v.has("level")) m.plan.vcc.quantile = v.at("level").num();
  }
  if (root.has("evaluation")) {
    const auto e = root.at("evaluation");
    if (e.has("workers")) m.workers = static_cast<unsigned>(std::max<std::uint64_t>(1, e.at("workers").count()));
    const auto days = e.at("days");
    for (std::size_t i = 0; i < days.size(); ++i) {
      const auto d = days.at(i);
      ManifestDay md;
      md.date = d.at("date").str();
      md.scenarios = resolve(d.at("scenarios"));
      md.realized = resolve(d.at("realized"));
      if (d.has("derating")) md.derating = resolve(d.at("derating"));
      m.days.push_back(std::move(md));
    }
  }
  return m;
}

namespace {

enum class Format { text, json, csv };

struct Common {
  std::string manifest;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<std::string> backend;
  std::optional<double> mip_gap;
  std::optional<double> time_limit;
  std::optional<unsigned> threads;
  Format format = Format::text;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-m,--manifest", c.manifest, "Run manifest (JSON)")->required();
  sub->add_option("--seed", c.seed, "Override the manifest seed");
  sub->add_option("-o,--output-dir", c.output_dir, "Override the output directory");
  sub->add_option("--solver", c.backend, "Solver backend")->check(CLI::IsMember({"highs", "cbc"}));
  sub->add_option("--mip-gap", c.mip_gap, "Relative MIP gap")->check(CLI::NonNegativeNumber);
  sub->add_option("--time-limit", c.time_limit, "Solver time limit in seconds")->check(CLI::PositiveNumber);
  sub->add_option("--threads", c.threads, "Solver threads");
  sub->add_option("--format", c.format, "Console output format")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Format>{{"text", Format::text}, {"json", Format::json}, {"csv", Format::csv}}));
}

RunManifest manifest_with_overrides(const Common& c) {
  RunManifest m = load_manifest(c.manifest);
  if (c.seed) {
    m.seed = *c.seed;
    m.plan.solve.seed = *c.seed;
  }
  if (c.output_dir) m.output_dir = *c.output_dir;
  if (c.backend) m.plan.backend = *c.backend;
  if (c.mip_gap) m.plan.solve.mip_gap = *c.mip_gap;
  if (c.time_limit) m.plan.solve.time_limit = *c.time_limit;
  if (c.threads) m.plan.solve.threads = *c.threads;
  return m;
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError(p.string() + ": cannot open for writing");
  out << text;
}

fs::path scenarios_path(const RunManifest& m) { return m.scenarios ? *m.scenarios : m.output_dir / "scenarios.json"; }

DeratingProfile caps_for(const std::optional<fs::path>& path, const HubSpec& hub, const TimeGrid& grid) {
  if (path) return load_derating_profile(*path);
  return DeratingProfile::flat(hub.ppa.p_gcp_rated_kw, grid.steps_per_day);
}

int cmd_scenarios(const Common& c, std::ostream& out) {
  const auto m = manifest_with_overrides(c);
  if (!m.scenario_inputs) throw InputError("manifest.scenario_inputs: missing required field");
  const HubSpec hub = load_hub_spec(m.hub);
  ScenarioInputs in = load_scenario_inputs(*m.scenario_inputs, hub.data_center);
  if (m.seed) in.seed = *m.seed;
  KMeansOptions ko;
  ko.threads = m.plan.solve.threads;
  const auto res = build_scenario_set(in, hub.data_center, ko);
  const auto path = scenarios_path(m);
  fs::create_directories(path.parent_path());
  write_json_file(path, to_json(res.set, hub.data_center));
  double psum = 0.0;
  for (const auto& s : res.set.scenarios) psum += s.probability;
  if (c.format == Format::json) {
    out << json{{"scenarios", res.set.size()}, {"probability_sum", psum}, {"path", path.string()}}.dump() << '\n';
  } else if (c.format == Format::csv) {
    out << "scenario,probability\n";
    for (std::size_t w = 0; w < res.set.size(); ++w)
      out << w << ',' << format_number(res.set.scenarios[w].probability) << '\n';
  } else {
    out << "scenarios: " << res.set.size() << "\nprobability sum: " << std::setprecision(12) << psum
        << "\nwritten: " << path.string() << '\n';
  }
  return kOk;
}

int cmd_bid(const Common& c, std::ostream& out, std::ostream& err) {
  const auto m = manifest_with_overrides(c);
  const HubSpec hub = load_hub_spec(m.hub);
  const ScenarioSet set = load_scenario_set(scenarios_path(m), hub.data_center);
  const DeratingProfile caps = caps_for(m.derating, hub, set.grid);
  if (m.write_lp) {
    const auto pm = build_planning_model(hub, set, caps, m.plan.model);
    write_text(m.output_dir / "model.lp",
               write_interchange(pm.model, InterchangeFormat::lp, WriteOptions{m.plan.solve.native_sos2}));
  }
  const BidResult bid = plan_day(hub, set, caps, m.plan);
  fs::create_directories(m.output_dir);
  write_json_file(m.output_dir / "bid.json", to_json(bid));
  std::ostringstream csv;
  write_bid_csv(csv, bid);
  write_text(m.output_dir / "bid.csv", csv.str());
  for (std::size_t cidx = 0; cidx < bid.vcc.size(); ++cidx) {
    std::ostringstream v;
    write_vcc_csv(v, bid, cidx);
    write_text(m.output_dir / ("vcc_" + bid.cluster_ids[cidx] + ".csv"), v.str());
  }
  if (!bid.audit.ok()) {
    err << "warning: post-solve audit flagged the solution:\n";
    for (const auto& f : bid.audit.failures) err << "  " << f << '\n';
  }
  if (c.format == Format::json) {
    out << to_json(bid).dump(2) << '\n';
  } else if (c.format == Format::csv) {
    out << csv.str();
  } else {
    out << "status: " << to_string(bid.status) << "\nexpected cost (EUR): " << format_number(bid.expected_cost)
        << "\nCVaR (EUR): " << format_number(bid.cvar)
        << "\nexpected emissions (kgCO2eq): " << format_number(bid.expected_emissions)
        << "\nwritten: " << (m.output_dir / "bid.json").string() << '\n';
  }
  return kOk;
}

int cmd_evaluate(const Common& c, const std::vector<std::string>& only_days, std::optional<unsigned> workers,
                 std::ostream& out) {
  const auto m = manifest_with_overrides(c);
  if (m.days.empty()) throw InputError("manifest.evaluation.days: no days to evaluate");
  const HubSpec hub = load_hub_spec(m.hub);
  std::vector<StudyDay> days;
  for (const auto& d : m.days) {
    if (!only_days.empty() && std::find(only_days.begin(), only_days.end(), d.date) == only_days.end()) continue;
    StudyDay sd;
    sd.date = d.date;
    sd.scenarios = load_scenario_set(d.scenarios, hub.data_center);
    const ScenarioSet real = load_scenario_set(d.realized, hub.data_center);
    if (real.size() != 1) throw InputError(d.realized.string() + ": a realized day holds exactly one scenario");
    if (!(real.grid == sd.scenarios.grid)) throw InputError(d.realized.string() + ": grid differs from the scenarios");
    sd.realized = RealizedDay{d.date, real.scenarios[0].exogenous, real.scenarios[0].workload};
    sd.caps = caps_for(d.derating ? d.derating : m.derating, hub, sd.scenarios.grid);
    days.push_back(std::move(sd));
  }
  if (days.empty()) throw InputError("--days selects none of the manifest's days");
  CompareOptions co;
  co.plan = m.plan;
  co.workers = workers ? *workers : m.workers;
  co.include_tou = hub.economics.tou_tariff.has_value();
  const auto cmp = compare_schemes(hub, days, co);
  fs::create_directories(m.output_dir);
  write_json_file(m.output_dir / "report.json", to_json(cmp));
  std::ostringstream csv;
  write_outcomes_csv(csv, cmp.reports);
  write_text(m.output_dir / "outcomes.csv", csv.str());
  if (c.format == Format::json) {
    out << to_json(cmp).dump(2) << '\n';
  } else if (c.format == Format::csv) {
    out << csv.str();
  } else {
    for (const auto& r : cmp.reports)
      out << r.scheme << ": mean ex-post cost " << format_number(r.summary.at("ex_post_cost").mean) << " EUR\n";
    out << "written: " << (m.output_dir / "report.json").string() << '\n';
  }
  return kOk;
}

int cmd_validate_derating(const Common& c, std::optional<std::string> profile_path, std::ostream& out) {
  const auto m = manifest_with_overrides(c);
  const HubSpec hub = load_hub_spec(m.hub);
  fs::path p;
  if (profile_path) p = *profile_path;
  else if (m.derating) p = *m.derating;
  else throw InputError("no de-rating profile given (manifest.derating or --profile)");
  const auto profile = load_derating_profile(p);
  TimeGrid grid;
  grid.step_hours = 1.0;
  grid.steps_per_day = 24;
  const auto v = validate_derating(profile, hub.ppa, grid);
  if (c.format == Format::json) {
    json days = json::array();
    for (const auto& d : v.daily)
      days.push_back({{"energy_kwh", d.derating_energy_kwh}, {"limit_kwh", d.limit_kwh}, {"pass", d.pass}});
    json weeks = json::array();
    for (const auto& d : v.weekly)
      weeks.push_back({{"energy_kwh", d.derating_energy_kwh}, {"limit_kwh", d.limit_kwh}, {"pass", d.pass}});
    out << json{{"verdict", v.pass() ? "PASS" : "FAIL"},
                {"below_minimum_steps", v.below_minimum_steps},
                {"above_rated_steps", v.above_rated_steps},
                {"daily", days},
                {"weekly", weeks}}
               .dump(2)
        << '\n';
  } else {
    out << "verdict: " << (v.pass() ? "PASS" : "FAIL") << '\n';
    out << "minimum capacity: " << (v.minimum_capacity_ok() ? "ok" : "violated") << '\n';
    if (!v.above_rated_steps.empty()) out << "steps above rated: " << v.above_rated_steps.size() << '\n';
    for (std::size_t d = 0; d < v.daily.size(); ++d)
      out << "day " << d << ": " << format_number(v.daily[d].derating_energy_kwh) << " / "
          << format_number(v.daily[d].limit_kwh) << " kWh " << (v.daily[d].pass ? "ok" : "exceeded") << '\n';
    for (std::size_t w = 0; w < v.weekly.size(); ++w)
      out << "week " << w << ": " << format_number(v.weekly[w].derating_energy_kwh) << " / "
          << format_number(v.weekly[w].limit_kwh) << " kWh " << (v.weekly[w].pass ? "ok" : "exceeded") << '\n';
  }
  return v.pass() ? kOk : kVerdictFail;
}

int cmd_report(const Common& c, std::optional<std::string> input, std::ostream& out) {
  fs::path p;
  if (input) {
    p = *input;
  } else {
    const auto m = manifest_with_overrides(c);
    p = m.output_dir / "report.json";
  }
  const json doc = read_json_file(p);
  const Field root(doc, "report");
  const auto reports = root.at("reports");
  static const char* groups[] = {"ex_post_cost", "ex_ante_cost", "ex_post_emissions", "ex_ante_emissions"};
  static const char* stats[] = {"q25", "mean", "q75", "sigma"};
  if (c.format == Format::json) {
    out << doc.dump(2) << '\n';
    return kOk;
  }
  if (c.format == Format::csv) {
    out << "scheme";
    for (auto g : groups)
      for (auto s : stats) out << ',' << g << '_' << s;
    out << '\n';
  } else {
    out << std::left << std::setw(20) << "scheme";
    for (auto g : groups) out << std::setw(36) << g;
    out << '\n' << std::setw(20) << "";
    for (std::size_t i = 0; i < 4; ++i) out << std::setw(9) << "Q25" << std::setw(9) << "mean" << std::setw(9) << "Q75" << std::setw(9) << "sigma";
    out << '\n';
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto r = reports.at(i);
    const auto sum = r.at("summary");
    if (c.format == Format::csv) {
      out << r.at("scheme").str();
      for (auto g : groups)
        for (auto s : stats) out << ',' << format_number(sum.at(g).at(s).num());
      out << '\n';
    } else {
      out << std::left << std::setw(20) << r.at("scheme").str();
      for (auto g : groups)
        for (auto s : stats) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.1f", sum.at(g).at(s).num());
          out << std::setw(9) << buf;
        }
      out << '\n';
    }
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Day-ahead planning for a data-center energy hub"};
  app.require_subcommand(1);
  Common sc, bc, ec, vc, rc;
  auto* s = app.add_subcommand("scenarios", "Bootstrap, combine and reduce scenarios");
  add_common(s, sc);
  auto* b = app.add_subcommand("bid", "Solve the planning problem and write the day-ahead bid and VCCs");
  add_common(b, bc);
  auto* e = app.add_subcommand("evaluate", "Plan and re-optimize ex post for every study day and scheme");
  add_common(e, ec);
  std::vector<std::string> only_days;
  std::optional<unsigned> workers;
  e->add_option("--days", only_days, "Evaluate only these dates (default: all manifest days)")->delimiter(',');
  e->add_option("-j,--workers", workers, "Days evaluated concurrently")->check(CLI::PositiveNumber);
  auto* v = app.add_subcommand("validate-derating", "Check a de-rating request against the PPA limits");
  add_common(v, vc);
  std::optional<std::string> profile;
  v->add_option("--profile", profile, "De-rating profile (JSON or CSV); default: manifest.derating");
  auto* r = app.add_subcommand("report", "Print the summary table of an evaluation report");
  r->add_option("-m,--manifest", rc.manifest, "Run manifest (JSON)");
  std::optional<std::string> input;
  r->add_option("-i,--input", input, "Report JSON (default: <output_dir>/report.json)");
  r->add_option("--format", rc.format, "Console output format")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Format>{{"text", Format::text}, {"json", Format::json}, {"csv", Format::csv}}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*s) return cmd_scenarios(sc, out);
    if (*b) return cmd_bid(bc, out, err);
    if (*e) return cmd_evaluate(ec, only_days, workers, out);
    if (*v) return cmd_validate_derating(vc, profile, out);
    if (*r) {
      if (!input && rc.manifest.empty()) throw InputError("report needs --input or --manifest");
      return cmd_report(rc, input, out);
    }
  } catch (const InfeasibleError& ex) {
    err << "infeasible: " << ex.what() << '\n';
    if (!ex.hint().empty()) err << "hint: " << ex.hint() << '\n';
    return kInfeasible;
  } catch (const SolverFailure& ex) {
    err << "solver failure: " << ex.what() << '\n';
    return kSolverFailure;
  } catch (const BackendError& ex) {
    err << "solver backend error: " << ex.what() << '\n';
    if (!ex.raw_output().empty()) err << ex.raw_output() << '\n';
    return kSolverFailure;
  } catch (const EnvironmentError& ex) {
    err << "solver unavailable: " << ex.what() << '\n';
    return kSolverFailure;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kInputError;
  } catch (const json::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kInputError;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace dchub::cli
