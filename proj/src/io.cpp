#include "msbridge/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "msbridge/errors.hpp"

namespace msb::io {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& cell, double& out) {
  std::string t = trim(cell);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(path + ": cannot open for writing");
  return f;
}

}  // namespace

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::vector<double>> read_table(const std::string& path, std::size_t columns) {
  std::ifstream f(path);
  if (!f) throw IoError(path + ": cannot open");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    std::vector<double> row;
    bool numeric = cells.size() == columns;
    for (const auto& c : cells) {
      double v = 0.0;
      if (!parse_double(c, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                    " numeric columns");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": no data rows");
  return rows;
}

DiscreteMeasure read_measure(const std::string& path) {
  auto rows = read_table(path, 2);
  std::sort(rows.begin(), rows.end());
  std::vector<double> pts, w;
  for (const auto& r : rows) {
    if (!pts.empty() && pts.back() == r[0]) throw IoError(path + ": duplicate point " + g17(r[0]));
    pts.push_back(r[0]);
    w.push_back(r[1]);
  }
  try {
    return DiscreteMeasure(Grid(std::move(pts)), std::move(w));
  } catch (const DomainError& e) {
    throw IoError(path + ": " + e.what());
  }
}

JointMeasure read_joint(const std::string& path) {
  auto rows = read_table(path, 3);
  std::map<std::pair<double, double>, double> cells;
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (!cells.emplace(std::make_pair(r[0], r[1]), r[2]).second)
      throw IoError(path + ": duplicate cell (" + g17(r[0]) + ", " + g17(r[1]) + ")");
    xs.push_back(r[0]);
    ys.push_back(r[1]);
  }
  for (auto* v : {&xs, &ys}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  std::vector<double> w(xs.size() * ys.size(), 0.0);
  for (const auto& [key, val] : cells) {
    auto i = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), key.first) - xs.begin());
    auto j = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), key.second) - ys.begin());
    w[i * ys.size() + j] = val;
  }
  try {
    return JointMeasure(Grid(std::move(xs)), Grid(std::move(ys)), std::move(w));
  } catch (const DomainError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::vector<CallQuote> read_quotes(const std::string& path) {
  auto rows = read_table(path, 2);
  std::vector<CallQuote> out;
  for (const auto& r : rows) out.push_back({r[0], r[1]});
  return out;
}

std::vector<double> read_function(const std::string& path, const Grid& grid) {
  auto rows = read_table(path, 2);
  std::vector<double> out(grid.size(), 0.0);
  std::vector<bool> seen(grid.size(), false);
  for (const auto& r : rows) {
    auto i = grid.index_of(r[0]);
    if (!i) throw IoError(path + ": point " + g17(r[0]) + " is not on the grid");
    out[*i] = r[1];
    seen[*i] = true;
  }
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!seen[i]) throw IoError(path + ": missing value at point " + g17(grid[i]));
  return out;
}

void write_measure(const std::string& path, const DiscreteMeasure& m) {
  auto f = open_out(path);
  f << "point,weight\n";
  for (std::size_t i = 0; i < m.size(); ++i) f << g17(m.point(i)) << ',' << g17(m.weight(i)) << '\n';
}

void write_joint(const std::string& path, const JointMeasure& j) {
  auto f = open_out(path);
  f << "x,y,weight\n";
  for (std::size_t i = 0; i < j.rows(); ++i)
    for (std::size_t k = 0; k < j.cols(); ++k)
      f << g17(j.xgrid()[i]) << ',' << g17(j.ygrid()[k]) << ',' << g17(j(i, k)) << '\n';
}

void write_function(const std::string& path, const Grid& grid, const std::vector<double>& values,
                    const std::string& value_name) {
  auto f = open_out(path);
  f << "point," << value_name << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) f << g17(grid[i]) << ',' << g17(values[i]) << '\n';
}

void write_text(const std::string& path, const std::string& text) {
  auto f = open_out(path);
  f << text;
}

}  // namespace msb::io
