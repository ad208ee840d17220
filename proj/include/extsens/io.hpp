#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "extsens/analysis.hpp"
#include "extsens/calibration.hpp"
#include "extsens/error.hpp"
#include "extsens/paired_data.hpp"
#include "extsens/simulation.hpp"

namespace extsens {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

namespace io {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  if (s.empty())
    throw ValidationError("csv_value", "empty numeric field for " + what);
  if (s == "inf" || s == "Inf" || s == "infinity") return kInf;
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size())
      throw ValidationError("csv_value", "bad number '" + s + "' for " + what);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("csv_value", "bad number '" + s + "' for " + what);
  }
}

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (first) {
      t.header = fields;
      first = false;
    } else {
      t.rows.push_back(fields);
    }
  }
  if (first) throw ValidationError("csv_empty", "no header row");
  return t;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("file_open", "cannot read " + path);
  return read_csv(in);
}

inline void write_csv(std::ostream& out, const CsvTable& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    out << (i ? "," : "") << t.header[i];
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

inline void write_csv_file(const std::string& path, const CsvTable& t) {
  std::ofstream out(path);
  if (!out) throw ValidationError("file_open", "cannot write " + path);
  write_csv(out, t);
}

inline std::string format_number(double v, int precision = 12) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss.precision(precision);
  ss << v;
  return ss.str();
}

/// Wide paired format: pair_id,r1,r2,z1 plus optional per-unit covariate
/// columns x_s<unit>_<k>. z2 is implied by z1.
inline std::vector<PairRecord> parse_paired_records(const CsvTable& t) {
  int c_id = t.column("pair_id"), c_r1 = t.column("r1"), c_r2 = t.column("r2"),
      c_z1 = t.column("z1");
  if (c_id < 0 || c_r1 < 0 || c_r2 < 0 || c_z1 < 0)
    throw ValidationError("csv_header",
                          "need columns pair_id,r1,r2,z1 in the paired file");
  // covariate columns keyed by index
  std::map<int, std::array<int, 2>> cov;  // k -> column per unit
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    const std::string& h = t.header[i];
    if (h.rfind("x_s", 0) != 0) continue;
    std::size_t us = h.find('_', 3);
    if (us == std::string::npos)
      throw ValidationError("csv_header", "malformed covariate column " + h);
    int unit = std::stoi(h.substr(3, us - 3));
    int k = std::stoi(h.substr(us + 1));
    if (unit != 1 && unit != 2)
      throw ValidationError("csv_header", "covariate unit must be 1 or 2: " + h);
    cov[k][unit - 1] = static_cast<int>(i) + 1;  // store 1-based, 0 = missing
  }
  for (auto& [k, cols] : cov)
    if (cols[0] == 0 || cols[1] == 0)
      throw ValidationError("csv_header", "covariate x_s*_" + std::to_string(k) +
                                              " needs both units");

  std::vector<PairRecord> out;
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size())
      throw ValidationError("csv_shape", "row width disagrees with header");
    PairRecord p;
    p.pair_id = row[c_id];
    p.r = {parse_double(row[c_r1], "r1"), parse_double(row[c_r2], "r2")};
    double z1 = parse_double(row[c_z1], "z1");
    if (z1 != 0.0 && z1 != 1.0)
      throw ValidationError("csv_value", "z1 must be 0 or 1");
    p.z = z1 == 1.0 ? std::array<int, 2>{1, 0} : std::array<int, 2>{0, 1};
    for (auto& [k, cols] : cov) {
      p.x[0].push_back(parse_double(row[cols[0] - 1], "covariate"));
      p.x[1].push_back(parse_double(row[cols[1] - 1], "covariate"));
    }
    p.validate();
    out.push_back(p);
  }
  if (out.empty()) throw ValidationError("csv_empty", "no data rows");
  return out;
}

/// Long calibration format: pair_id,unit,z,y,u,adj_1,...,adj_k with two rows
/// per pair.
inline std::vector<CalibrationRecord> parse_calibration_records(
    const CsvTable& t) {
  int c_id = t.column("pair_id"), c_unit = t.column("unit"),
      c_z = t.column("z"), c_y = t.column("y"), c_u = t.column("u");
  if (c_id < 0 || c_unit < 0 || c_z < 0 || c_y < 0 || c_u < 0)
    throw ValidationError(
        "csv_header", "need columns pair_id,unit,z,y,u in the calibration file");
  std::vector<int> adj_cols;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i].rfind("adj_", 0) == 0) adj_cols.push_back(static_cast<int>(i));

  std::map<std::string, CalibrationRecord> by_pair;
  std::vector<std::string> order;
  std::map<std::string, std::array<bool, 2>> seen;
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size())
      throw ValidationError("csv_shape", "row width disagrees with header");
    std::string id = row[c_id];
    int unit = static_cast<int>(parse_double(row[c_unit], "unit"));
    if (unit != 1 && unit != 2)
      throw ValidationError("csv_value", "unit must be 1 or 2");
    if (by_pair.find(id) == by_pair.end()) {
      by_pair[id].pair_id = id;
      order.push_back(id);
    }
    CalibrationUnit& cu = by_pair[id].units[unit - 1];
    if (seen[id][unit - 1])
      throw ValidationError("csv_value", "duplicate unit for pair " + id);
    seen[id][unit - 1] = true;
    cu.z = static_cast<int>(parse_double(row[c_z], "z"));
    cu.y = parse_double(row[c_y], "y");
    cu.u = parse_double(row[c_u], "u");
    for (int c : adj_cols) cu.adjusters.push_back(parse_double(row[c], "adj"));
  }
  std::vector<CalibrationRecord> out;
  for (const auto& id : order) {
    if (!seen[id][0] || !seen[id][1])
      throw ValidationError("csv_value", "pair " + id + " is missing a unit");
    by_pair[id].validate();
    out.push_back(by_pair[id]);
  }
  if (out.empty()) throw ValidationError("csv_empty", "no data rows");
  return out;
}

/// Simulation table in the published layout: one row per gammabar, one column
/// per gamma, blank where gammabar > gamma.
inline CsvTable sim_table_csv(const SimTable& table) {
  CsvTable t;
  t.header.push_back("gammabar");
  for (double g : table.gammas) t.header.push_back(format_number(g, 6));
  for (std::size_t r = 0; r < table.gammabars.size(); ++r) {
    std::vector<std::string> row;
    row.push_back(format_number(table.gammabars[r], 6));
    for (std::size_t c = 0; c < table.gammas.size(); ++c)
      row.push_back(format_number(table.rates[r][c], 6));
    t.rows.push_back(row);
  }
  return t;
}

inline CsvTable curve_csv(const SensitivityCurve& curve,
                          const std::vector<double>& gamma_grid) {
  CsvTable t;
  t.header = {"gamma", "gammabar_star", "saturated", "no_reject", "scanned"};
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const CurvePoint& p = curve.points[i];
    t.rows.push_back({format_number(gamma_grid[i], 10),
                      format_number(p.gammabar_star, 10),
                      p.saturated ? "1" : "0", p.no_reject ? "1" : "0",
                      p.scanned ? "1" : "0"});
  }
  return t;
}

inline CsvTable worst_pi_csv(const std::vector<PairRecord>& pairs,
                             const std::vector<double>& pi) {
  CsvTable t;
  t.header = {"pair_id", "worst_pi"};
  for (std::size_t i = 0; i < pairs.size(); ++i)
    t.rows.push_back({pairs[i].pair_id, format_number(pi[i], 12)});
  return t;
}

inline CsvTable calibration_pairs_csv(
    const std::vector<CalibrationRecord>& records,
    const std::vector<double>& pi_star, const std::vector<double>& odds) {
  CsvTable t;
  t.header = {"pair_id", "pi_star", "odds_ratio"};
  for (std::size_t i = 0; i < records.size(); ++i)
    t.rows.push_back({records[i].pair_id, format_number(pi_star[i], 12),
                      format_number(odds[i], 12)});
  return t;
}

}  // namespace io
}  // namespace extsens
