#include "corrdetect/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace corrdetect::io {

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols{"n",     "d",    "k",    "rho2",  "detector",     "type1",
                                             "type2", "risk", "ci1",  "ci2",   "trials",       "seed",
                                             "lb_partition",  "lb_closed",     "cond_strong", "cond_sum",
                                             "note"};
  return cols;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double parse_double(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("malformed number '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used);
  if (used != s.size()) throw std::runtime_error("malformed integer '" + s + "'");
  return v;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quote in CSV line");
  fields.push_back(std::move(cur));
  return fields;
}

json versioned(json body) {
  json j;
  j["schema_version"] = kSchemaVersion;
  for (auto& [k, v] : body.items()) j[k] = v;
  return j;
}

}  // namespace

json to_json(const ModelParams& p) {
  return {{"n", p.n}, {"d", p.d}, {"k", p.k}, {"rho", p.rho}, {"rho2", p.rho2()}};
}

ModelParams params_from_json(const json& j) {
  ModelParams p;
  p.n = j.at("n").get<std::size_t>();
  p.d = j.at("d").get<std::size_t>();
  p.k = j.contains("k") ? j.at("k").get<std::size_t>() : p.n;
  if (j.contains("rho")) {
    p.rho = j.at("rho").get<double>();
  } else {
    p = ModelParams::from_rho2(p.n, p.d, p.k, j.at("rho2").get<double>());
  }
  p.validate();
  return p;
}

json to_json(const MomentEstimate& m, const ModelParams& p) {
  json j = versioned({{"kind", "second_moment"}, {"method", m.method}, {"params", to_json(p)}, {"value", num(m.value)}});
  if (m.trials > 0) {
    j["stderr"] = num(m.std_error);
    j["trials"] = m.trials;
    j["seed"] = m.seed;
  } else {
    j["tail_bound"] = num(m.tail_bound);
    j["terms"] = m.terms;
  }
  j["truncated"] = m.truncated;
  return j;
}

json to_json(const ExponentProfile& e) {
  return versioned({{"kind", "exponent_profile"},
                    {"rho", e.rho},
                    {"tau", e.tau},
                    {"E_Q", num(e.E_Q)},
                    {"E_P", num(e.E_P)},
                    {"lambda_star_Q", num(e.lambda_star_Q)},
                    {"lambda_star_P", num(e.lambda_star_P)}});
}

json to_json(const CountTestConfig& c) {
  return versioned({{"kind", "count_test_config"},
                    {"rho", c.rho},
                    {"d", c.d},
                    {"tau", c.tau},
                    {"p_rho_d", c.p_rho_d},
                    {"q_rho_d", c.q_rho_d},
                    {"p_stderr", c.p_stderr},
                    {"q_stderr", c.q_stderr},
                    {"calibration_trials", c.calibration_trials},
                    {"calibration_seed", c.calibration_seed}});
}

CountTestConfig count_config_from_json(const json& j) {
  if (j.value("schema_version", 0) != kSchemaVersion) throw std::runtime_error("unsupported schema_version");
  CountTestConfig c;
  c.rho = j.at("rho").get<double>();
  c.d = j.at("d").get<std::size_t>();
  c.tau = j.at("tau").get<double>();
  c.p_rho_d = j.at("p_rho_d").get<double>();
  c.q_rho_d = j.at("q_rho_d").get<double>();
  c.p_stderr = j.value("p_stderr", 0.0);
  c.q_stderr = j.value("q_stderr", 0.0);
  c.calibration_trials = j.value("calibration_trials", std::size_t{0});
  c.calibration_seed = j.value("calibration_seed", std::uint64_t{0});
  return c;
}

json to_json(const ComparisonTestConfig& c) {
  return versioned({{"kind", "comparison_test_config"},
                    {"theta", c.theta},
                    {"crossing_point", c.crossing_point},
                    {"variance_ratio", c.variance_ratio},
                    {"accept_small", c.accept_small},
                    {"tv", c.tv}});
}

json to_json(const RiskEstimate& r) {
  return versioned({{"kind", "risk_estimate"},
                    {"type1", r.type1},
                    {"type2", r.type2},
                    {"risk", r.risk},
                    {"ci1", num(r.ci1)},
                    {"ci2", num(r.ci2)},
                    {"trials", r.trials_per_hypothesis},
                    {"seed", r.seed}});
}

json to_json(const LowerBound& b) {
  return versioned({{"kind", "risk_lower_bound"},
                    {"value", num(b.value)},
                    {"raw", num(b.raw)},
                    {"second_moment", num(b.second_moment)},
                    {"method", b.method}});
}

json to_json(const ConditionReport& c) {
  return versioned({{"kind", "conditions"},
                    {"cond_strong", num(c.cond_strong)},
                    {"count_rate_gap", num(c.count_rate_gap)},
                    {"cond_sum", num(c.cond_sum)},
                    {"regimes", c.regimes}});
}

json to_json(const SweepRow& r) {
  return {{"n", r.n},
          {"d", r.d},
          {"k", r.k},
          {"rho2", r.rho2},
          {"detector", r.detector},
          {"type1", num(r.type1)},
          {"type2", num(r.type2)},
          {"risk", num(r.risk)},
          {"ci1", num(r.ci1)},
          {"ci2", num(r.ci2)},
          {"trials", r.trials},
          {"seed", r.seed},
          {"lb_partition", num(r.lb_partition)},
          {"lb_closed", num(r.lb_closed)},
          {"cond_strong", num(r.cond_strong)},
          {"cond_sum", num(r.cond_sum)},
          {"note", r.note}};
}

void write_sweep_header(std::ostream& os) {
  const auto& cols = sweep_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

void write_sweep_row(std::ostream& os, const SweepRow& r) {
  os << r.n << ',' << r.d << ',' << r.k << ',' << format_double(r.rho2) << ',' << quote(r.detector) << ','
     << format_double(r.type1) << ',' << format_double(r.type2) << ',' << format_double(r.risk) << ','
     << format_double(r.ci1) << ',' << format_double(r.ci2) << ',' << r.trials << ',' << r.seed << ','
     << format_double(r.lb_partition) << ',' << format_double(r.lb_closed) << ',' << format_double(r.cond_strong)
     << ',' << format_double(r.cond_sum) << ',' << quote(r.note) << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  write_sweep_header(os);
  for (const auto& r : rows) write_sweep_row(os, r);
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) return {};
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  const auto& cols = sweep_columns();
  // The note column is optional on input.
  const bool has_note = header.size() == cols.size();
  if (!(has_note || header.size() == cols.size() - 1) ||
      !std::equal(header.begin(), header.end(), cols.begin())) {
    throw std::runtime_error("sweep CSV header does not match the expected schema");
  }
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw std::runtime_error("sweep CSV line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                               " fields");
    }
    try {
      SweepRow r;
      r.n = parse_u64(f[0]);
      r.d = parse_u64(f[1]);
      r.k = parse_u64(f[2]);
      r.rho2 = parse_double(f[3]);
      r.detector = f[4];
      r.type1 = parse_double(f[5]);
      r.type2 = parse_double(f[6]);
      r.risk = parse_double(f[7]);
      r.ci1 = parse_double(f[8]);
      r.ci2 = parse_double(f[9]);
      r.trials = parse_u64(f[10]);
      r.seed = parse_u64(f[11]);
      r.lb_partition = parse_double(f[12]);
      r.lb_closed = parse_double(f[13]);
      r.cond_strong = parse_double(f[14]);
      r.cond_sum = parse_double(f[15]);
      if (has_note) r.note = f[16];
      rows.push_back(std::move(r));
    } catch (const std::logic_error& e) {
      throw std::runtime_error("sweep CSV line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

std::set<SweepKey> completed_keys(const std::vector<SweepRow>& rows) {
  std::set<SweepKey> keys;
  for (const auto& r : rows) keys.insert(sweep_key(r.n, r.d, r.k, r.rho2, r.detector));
  return keys;
}

json sweep_json(const std::vector<SweepRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) arr.push_back(to_json(r));
  return versioned({{"kind", "sweep"}, {"columns", sweep_columns()}, {"rows", arr}});
}

void write_partition_table_csv(std::ostream& os, const PartitionTable& table) { table.write_csv(os); }

void write_pair_csv(std::ostream& os, const DatabasePair& pair) {
  os << "matrix,i,j,value\n";
  auto dump = [&](const char* name, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows; ++i) {
      for (std::size_t j = 0; j < m.cols; ++j) os << name << ',' << i << ',' << j << ',' << format_double(m(i, j)) << '\n';
    }
  };
  dump("X", pair.X);
  dump("Y", pair.Y);
}

namespace {

template <class T>
void put_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get_le(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("truncated pair dump");
  return v;
}

}  // namespace

void write_pair_binary(std::ostream& os, const DatabasePair& pair) {
  put_le<std::uint64_t>(os, pair.X.rows);
  put_le<std::uint64_t>(os, pair.X.cols);
  for (double v : pair.X.data) put_le(os, v);
  for (double v : pair.Y.data) put_le(os, v);
}

DatabasePair read_pair_binary(std::istream& is) {
  const auto n = get_le<std::uint64_t>(is);
  const auto d = get_le<std::uint64_t>(is);
  if (n > (1u << 24) || d > (1u << 24)) throw std::runtime_error("implausible pair dimensions");
  DatabasePair p{Matrix(n, d), Matrix(n, d)};
  for (double& v : p.X.data) v = get_le<double>(is);
  for (double& v : p.Y.data) v = get_le<double>(is);
  return p;
}

}  // namespace corrdetect::io
