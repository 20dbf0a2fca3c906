#include "dchub/solver/interchange.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "dchub/domain/errors.hpp"

namespace dchub {

namespace {

constexpr const char* kObjName = "obj";
constexpr const char* kConstName = "obj_constant";
constexpr std::size_t kWrap = 200;

std::string num(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Truncated names, checked for collisions across columns and rows separately.
struct NameTable {
  std::vector<std::string> cols, rows, sets;
};

void unique_or_throw(const std::vector<std::string>& names, const std::vector<std::string>& originals,
                     const char* kind) {
  std::unordered_map<std::string_view, std::size_t> seen;
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto [it, fresh] = seen.emplace(names[i], i);
    if (!fresh)
      throw SerializationError(std::string(kind) + " names collide after truncation to " +
                               std::to_string(kMaxNameLength) + " characters: '" + originals[it->second] +
                               "' and '" + originals[i] + "'");
  }
}

std::string clip(const std::string& s) { return s.size() > kMaxNameLength ? s.substr(0, kMaxNameLength) : s; }

NameTable make_names(const MilpModel& m) {
  NameTable t;
  std::vector<std::string> orig_cols, orig_rows;
  for (const auto& v : m.variables()) {
    orig_cols.push_back(v.name);
    t.cols.push_back(clip(v.name));
  }
  orig_cols.push_back(kConstName);
  t.cols.push_back(kConstName);
  for (const auto& r : m.constraints()) {
    orig_rows.push_back(r.name);
    t.rows.push_back(clip(r.name));
  }
  orig_rows.push_back(kObjName);
  t.rows.push_back(kObjName);
  for (const auto& s : m.sos2_sets()) t.sets.push_back(clip(s.name));
  unique_or_throw(t.cols, orig_cols, "variable");
  unique_or_throw(t.rows, orig_rows, "row");
  t.cols.pop_back();
  t.rows.pop_back();
  return t;
}

bool needs_sos_section(const MilpModel& m, const WriteOptions& o) {
  for (const auto& s : m.sos2_sets())
    if (o.native_sos2 || !s.binary_encoded) return true;
  return false;
}

// Appends tokens, breaking lines before they grow past kWrap.
class LineWriter {
 public:
  explicit LineWriter(std::ostream& os) : os_(os) {}
  void token(const std::string& tok) {
    if (col_ + tok.size() + 1 > kWrap && col_ > 0) {
      os_ << "\n  ";
      col_ = 2;
    }
    os_ << ' ' << tok;
    col_ += tok.size() + 1;
  }
  void end() {
    os_ << '\n';
    col_ = 0;
  }

 private:
  std::ostream& os_;
  std::size_t col_ = 0;
};

void lp_terms(LineWriter& lw, const std::vector<Term>& terms, const NameTable& names) {
  bool first = true;
  for (const auto& t : terms) {
    double c = t.coef;
    std::string sign = c < 0 ? "-" : (first ? "" : "+");
    if (!sign.empty()) lw.token(sign);
    lw.token(num(std::abs(c)) + " " + names.cols[t.var.index]);
    first = false;
  }
  if (first) lw.token("0 " + std::string(kConstName));
}

std::string write_lp(const MilpModel& m, const WriteOptions& o) {
  const auto names = make_names(m);
  std::ostringstream os;
  os << "\\ dchub planning model\n";
  os << "Minimize\n";
  LineWriter lw(os);
  lw.token(std::string(kObjName) + ":");

  // Declare every column in the objective so that unused ones survive parsing.
  std::vector<double> cost(m.variables().size(), 0.0);
  for (const auto& t : m.objective().terms) cost[t.var.index] += t.coef;
  std::vector<Term> obj;
  for (std::uint32_t j = 0; j < cost.size(); ++j) obj.push_back({VarId{j}, cost[j]});
  bool first = true;
  for (const auto& t : obj) {
    if (t.coef < 0)
      lw.token("-");
    else if (!first)
      lw.token("+");
    lw.token(num(std::abs(t.coef)) + " " + names.cols[t.var.index]);
    first = false;
  }
  if (!first) lw.token("+");
  lw.token(num(m.objective().constant) + " " + kConstName);
  lw.end();

  os << "Subject To\n";
  for (std::size_t i = 0; i < m.constraints().size(); ++i) {
    const auto& r = m.constraints()[i];
    lw.token(names.rows[i] + ":");
    lp_terms(lw, r.terms, names);
    const char* op = r.sense == RowSense::le ? "<=" : r.sense == RowSense::ge ? ">=" : "=";
    lw.token(op);
    lw.token(num(r.rhs));
    lw.end();
  }

  os << "Bounds\n";
  for (std::size_t j = 0; j < m.variables().size(); ++j) {
    const auto& v = m.variables()[j];
    const auto& n = names.cols[j];
    const double lo = v.lower, hi = v.upper;
    if (v.kind == VarKind::binary && lo == 0.0 && hi == 1.0) continue;
    if (lo == hi) {
      os << ' ' << n << " = " << num(lo) << '\n';
    } else if (lo == -kInf && hi == kInf) {
      os << ' ' << n << " free\n";
    } else if (lo == -kInf) {
      os << " -inf <= " << n << " <= " << num(hi) << '\n';
    } else if (hi == kInf) {
      if (lo != 0.0) os << ' ' << n << " >= " << num(lo) << '\n';
    } else {
      os << ' ' << num(lo) << " <= " << n << " <= " << num(hi) << '\n';
    }
  }
  os << ' ' << kConstName << " = 1\n";

  bool any_bin = false;
  for (std::size_t j = 0; j < m.variables().size(); ++j) {
    if (m.variables()[j].kind != VarKind::binary) continue;
    if (!any_bin) os << "Binaries\n";
    any_bin = true;
    lw.token(names.cols[j]);
  }
  if (any_bin) lw.end();

  if (needs_sos_section(m, o)) {
    os << "SOS\n";
    for (std::size_t s = 0; s < m.sos2_sets().size(); ++s) {
      const auto& set = m.sos2_sets()[s];
      if (!o.native_sos2 && set.binary_encoded) continue;
      lw.token(names.sets[s] + ": S2::");
      for (std::size_t k = 0; k < set.members.size(); ++k)
        lw.token(names.cols[set.members[k].index] + ":" + num(set.weights[k]));
      lw.end();
    }
  }
  os << "End\n";
  return os.str();
}

std::string write_mps(const MilpModel& m, const WriteOptions& o) {
  if (needs_sos_section(m, o))
    throw SerializationError(
        "MPS output has no SOS section; SOS2 sets must be binary encoded (write LP for native SOS2)");
  const auto names = make_names(m);
  const auto nv = m.variables().size();

  // Column-wise copy of the matrix.
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(nv);
  for (std::size_t i = 0; i < m.constraints().size(); ++i)
    for (const auto& t : m.constraints()[i].terms) cols[t.var.index].push_back({i, t.coef});
  std::vector<double> cost(nv, 0.0);
  for (const auto& t : m.objective().terms) cost[t.var.index] += t.coef;

  std::ostringstream os;
  os << "NAME dchub\nROWS\n N " << kObjName << '\n';
  for (std::size_t i = 0; i < m.constraints().size(); ++i) {
    const auto s = m.constraints()[i].sense;
    os << ' ' << (s == RowSense::le ? 'L' : s == RowSense::ge ? 'G' : 'E') << ' ' << names.rows[i] << '\n';
  }
  os << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  auto set_int = [&](bool want) {
    if (want == in_int) return;
    os << " MARKER" << marker++ << " 'MARKER' " << (want ? "'INTORG'" : "'INTEND'") << '\n';
    in_int = want;
  };
  for (std::size_t j = 0; j < nv; ++j) {
    set_int(m.variables()[j].kind == VarKind::binary);
    const auto& n = names.cols[j];
    os << ' ' << n << ' ' << kObjName << ' ' << num(cost[j]) << '\n';
    for (const auto& [row, c] : cols[j]) os << ' ' << n << ' ' << names.rows[row] << ' ' << num(c) << '\n';
  }
  set_int(false);
  os << ' ' << kConstName << ' ' << kObjName << ' ' << num(m.objective().constant) << '\n';

  os << "RHS\n";
  for (std::size_t i = 0; i < m.constraints().size(); ++i)
    if (m.constraints()[i].rhs != 0.0) os << " RHS " << names.rows[i] << ' ' << num(m.constraints()[i].rhs) << '\n';

  os << "BOUNDS\n";
  for (std::size_t j = 0; j < nv; ++j) {
    const auto& v = m.variables()[j];
    const auto& n = names.cols[j];
    if (v.lower == v.upper) {
      os << " FX BND " << n << ' ' << num(v.lower) << '\n';
    } else if (v.lower == -kInf && v.upper == kInf) {
      os << " FR BND " << n << '\n';
    } else {
      if (v.lower == -kInf)
        os << " MI BND " << n << '\n';
      else if (v.lower != 0.0 || v.kind == VarKind::binary)
        os << " LO BND " << n << ' ' << num(v.lower) << '\n';
      if (v.upper != kInf) os << " UP BND " << n << ' ' << num(v.upper) << '\n';
    }
  }
  os << " FX BND " << kConstName << " 1\n";
  os << "ENDATA\n";
  return os.str();
}

}  // namespace

std::string write_interchange(const MilpModel& model, InterchangeFormat format, const WriteOptions& options) {
  return format == InterchangeFormat::lp ? write_lp(model, options) : write_mps(model, options);
}

void write_interchange_file(const MilpModel& model, const std::filesystem::path& path, InterchangeFormat format,
                            const WriteOptions& options) {
  const auto text = write_interchange(model, format, options);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SerializationError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw SerializationError("write failed: " + path.string());
}

}  // namespace dchub
