#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <vector>

#include <unistd.h>

#include "dchub/domain/errors.hpp"
#include "dchub/solver/interchange.hpp"
#include "dchub/solver/solver.hpp"

namespace dchub {

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

bool executable(const fs::path& p) { return ::access(p.c_str(), X_OK) == 0 && fs::is_regular_file(p); }

std::optional<fs::path> search_path(const std::string& prog) {
  const char* path = std::getenv("PATH");
  if (!path) return std::nullopt;
  std::stringstream ss(path);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) continue;
    fs::path cand = fs::path(dir) / prog;
    if (executable(cand)) return cand;
  }
  return std::nullopt;
}

// Scratch directory removed on scope exit unless the caller supplied one.
class WorkDir {
 public:
  explicit WorkDir(const std::optional<fs::path>& given) {
    if (given) {
      path_ = *given;
      fs::create_directories(path_);
      return;
    }
    std::string tmpl = (fs::temp_directory_path() / "dchub-cbc-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw EnvironmentError("cannot create a temporary directory for CBC");
    path_ = tmpl;
    owned_ = true;
  }
  ~WorkDir() {
    std::error_code ec;
    if (owned_) fs::remove_all(path_, ec);
  }
  WorkDir(const WorkDir&) = delete;
  WorkDir& operator=(const WorkDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  bool owned_ = false;
};

class CbcBackend final : public SolverBackend {
 public:
  explicit CbcBackend(fs::path exe) : exe_(std::move(exe)) {}
  std::string name() const override { return "cbc"; }
  bool supports_native_sos2() const override { return true; }
  Solution solve(const MilpModel& model, const SolveOptions& options) override;

 private:
  fs::path exe_;
};

struct ParsedSolution {
  SolveStatus status = SolveStatus::error;
  bool has_values = false;
  std::unordered_map<std::string, double> values;
  std::unordered_map<std::string, std::size_t> column_index;
};

// CBC solution file: a status line, then "index name value reduced_cost",
// where rows violating a bound carry a leading "**".
ParsedSolution parse_cbc_solution(const std::string& text, const std::string& log) {
  std::istringstream in(text);
  std::string head;
  if (!std::getline(in, head)) throw BackendError("CBC wrote an empty solution file", log);
  ParsedSolution p;
  auto has = [&](const char* s) { return head.find(s) != std::string::npos; };
  if (head.rfind("Optimal", 0) == 0) {
    p.status = SolveStatus::optimal;
    p.has_values = true;
  } else if (has("Stopped on time") || has("Stopped on iterations") || has("Stopped on solutions")) {
    p.has_values = !has("no integer solution");
    p.status = has("time") ? SolveStatus::time_limit : (p.has_values ? SolveStatus::feasible : SolveStatus::error);
  } else if (has("nfeasible")) {
    p.status = SolveStatus::infeasible;
  } else if (has("nbounded")) {
    p.status = SolveStatus::unbounded;
  } else {
    throw BackendError("unrecognised CBC status line: " + head, log);
  }
  if (!p.has_values) return p;

  // With "printingOptions all" the row activities come first; each block
  // restarts its index at 0 and the columns are the last block.
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok, name;
    double value = 0.0;
    if (!(ls >> tok)) continue;
    if (tok == "**" && !(ls >> tok)) continue;
    if (tok.rfind("**", 0) == 0) tok = tok.substr(2);
    if (!(ls >> name >> value)) throw BackendError("malformed CBC solution line: " + line, log);
    if (tok == "0") {
      p.values.clear();
      p.column_index.clear();
    }
    p.values[name] = value;
    p.column_index[name] = std::stoul(tok);
  }
  return p;
}

// The text solution prints about 8 significant digits, which leaves row
// residuals near 1e-4 on rows with large coefficients. "saveSolution" writes
// the same point as raw doubles: rows, columns, objective, then row primal,
// row dual, column primal and column dual arrays.
std::optional<std::vector<double>> read_saved_columns(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::int32_t rows = 0, cols = 0;
  double objective = 0.0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  in.read(reinterpret_cast<char*>(&objective), sizeof objective);
  if (!in || rows < 0 || cols < 0) return std::nullopt;
  in.seekg(std::streamoff(2 * std::size_t(rows) * sizeof(double)), std::ios::cur);
  std::vector<double> x(std::size_t(cols), 0.0);
  in.read(reinterpret_cast<char*>(x.data()), std::streamsize(x.size() * sizeof(double)));
  if (!in) return std::nullopt;
  return x;
}

Solution CbcBackend::solve(const MilpModel& model, const SolveOptions& options) {
  WorkDir dir(options.work_dir);
  const auto lp = dir.path() / "model.lp";
  const auto solu = dir.path() / "solution.txt";
  const auto logf = dir.path() / "cbc.log";
  const auto saved = dir.path() / "solution.bin";
  std::error_code ec;
  fs::remove(solu, ec);
  fs::remove(saved, ec);
  write_interchange_file(model, lp, InterchangeFormat::lp, WriteOptions{options.native_sos2});

  std::ostringstream cmd;
  cmd << shell_quote(exe_.string()) << ' ' << shell_quote(lp.string()) << " -sec " << options.time_limit
      << " -ratio " << options.mip_gap << " -threads " << std::max(1u, options.threads) << " -randomCbcSeed "
      << (options.seed % 2147483647 + 1) << " -primalT 1e-8 -integerT 1e-8 -solve -printingOptions all -solu "
      << shell_quote(solu.string()) << " -saveSolution " << shell_quote(saved.string()) << " > " << shell_quote(logf.string()) << " 2>&1";

  const auto t0 = std::chrono::steady_clock::now();
  const int rc = std::system(cmd.str().c_str());
  Solution sol;
  sol.backend = name();
  sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto log = slurp(logf);
  if (options.verbose) std::fputs(log.c_str(), stderr);
  if (rc != 0 && !fs::exists(solu)) throw BackendError("CBC exited with status " + std::to_string(rc), log);
  if (!fs::exists(solu)) throw BackendError("CBC produced no solution file", log);

  const auto parsed = parse_cbc_solution(slurp(solu), log);
  sol.status = parsed.status;
  if (!parsed.has_values) return sol;
  const auto exact = read_saved_columns(saved);

  // Unlisted columns are reported as zero; clamp to their bounds.
  sol.values.assign(model.variables().size(), 0.0);
  for (std::size_t j = 0; j < model.variables().size(); ++j) {
    const auto& v = model.variables()[j];
    std::string n = v.name.size() > kMaxNameLength ? v.name.substr(0, kMaxNameLength) : v.name;
    auto it = parsed.values.find(n);
    double x = it == parsed.values.end() ? 0.0 : it->second;
    if (exact && it != parsed.values.end()) {
      const std::size_t k = parsed.column_index.at(n);
      // Guard against an index mismatch: the two must agree to print precision.
      if (k < exact->size() && std::abs((*exact)[k] - x) <= 1e-6 * std::max(1.0, std::abs(x))) x = (*exact)[k];
    }
    if (v.kind == VarKind::binary) x = std::round(x);
    sol.values[j] = std::min(std::max(x, v.lower), v.upper);
  }
  sol.objective = model.objective().constant;
  for (const auto& t : model.objective().terms) sol.objective += t.coef * sol.values[t.var.index];
  if (sol.status == SolveStatus::optimal) sol.gap = options.mip_gap;  // upper bound; CBC does not report it
  return sol;
}

}  // namespace

std::optional<fs::path> find_cbc_executable() {
  if (const char* env = std::getenv("DCHUB_CBC_PATH"); env && *env) {
    if (executable(env)) return fs::path(env);
    return std::nullopt;
  }
#ifdef DCHUB_DEFAULT_CBC
  if (executable(DCHUB_DEFAULT_CBC)) return fs::path(DCHUB_DEFAULT_CBC);
#endif
  return search_path("cbc");
}

std::unique_ptr<SolverBackend> make_cbc_backend(std::optional<fs::path> exe) {
  if (exe) {
    if (!executable(*exe)) throw EnvironmentError("CBC executable not usable: " + exe->string());
    return std::make_unique<CbcBackend>(*exe);
  }
  auto found = find_cbc_executable();
  if (!found)
    throw EnvironmentError("CBC executable not found; set DCHUB_CBC_PATH or put cbc on PATH");
  return std::make_unique<CbcBackend>(*found);
}

}  // namespace dchub
