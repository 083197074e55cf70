#include "msbridge/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "msbridge/errors.hpp"

namespace msb {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& what) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw IoError(what + ": expected a number, got '" + v + "'");
  return x;
}

long long to_int(const std::string& v, const std::string& what) {
  char* end = nullptr;
  long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) throw IoError(what + ": expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& v, const std::string& what) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw IoError(what + ": expected true or false, got '" + v + "'");
}

}  // namespace

IniFile IniFile::parse(const std::string& text, const std::string& origin) {
  IniFile ini;
  ini.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']') throw IoError(where + ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) throw IoError(where + ": expected key = value");
    if (section.empty()) throw IoError(where + ": key outside of a section");
    std::string key = section + "." + trim(t.substr(0, eq));
    if (ini.entries_.count(key)) throw IoError(where + ": duplicate key " + key);
    ini.entries_[key] = {trim(t.substr(eq + 1)), lineno};
  }
  return ini;
}

IniFile IniFile::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError(path + ": cannot open config");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  return entries_.count(section + "." + key) > 0;
}

std::string IniFile::get(const std::string& section, const std::string& key) const {
  auto it = entries_.find(section + "." + key);
  if (it == entries_.end()) throw IoError(origin_ + ": missing key " + section + "." + key);
  read_[it->first] = true;
  return it->second.value;
}

std::vector<std::string> IniFile::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, e] : entries_)
    if (!read_.count(k)) out.push_back(origin_ + ":" + std::to_string(e.line) + ": unknown key " + k);
  return out;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(to_double(trim(cell), what));
  if (out.empty()) throw IoError(what + ": empty list");
  return out;
}

void RunConfig::validate() const {
  solver.validate();
  if (!nu_path.empty() && !quotes_path.empty()) throw DomainError("config: give either nu or quotes, not both");
  for (double g : gammas)
    if (!(g > 0.0)) throw DomainError("config: gamma values must be positive");
  for (double d : deltas)
    if (!(d > 0.0)) throw DomainError("config: delta values must be positive");
  if (!(gap_tol > 0.0) || !(approx_tol > 0.0)) throw DomainError("config: tolerances must be positive");
  if (random_witnesses < 0) throw DomainError("config: random_witnesses must be nonnegative");
  if (!(schedule.ratio > 0.0 && schedule.ratio < 1.0) || schedule.horizon < 1)
    throw DomainError("config: eps_ratio must lie in (0, 1) and horizon must be positive");
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  IniFile ini = IniFile::parse(text, origin);
  RunConfig cfg;
  auto str = [&](const char* s, const char* k, std::string& dst) {
    if (ini.has(s, k)) dst = ini.get(s, k);
  };
  auto num = [&](const char* s, const char* k, double& dst) {
    if (ini.has(s, k)) dst = to_double(ini.get(s, k), origin + ": " + s + "." + k);
  };
  auto integer = [&](const char* s, const char* k, auto& dst) {
    if (ini.has(s, k)) dst = static_cast<std::remove_reference_t<decltype(dst)>>(to_int(ini.get(s, k), origin + ": " + s + "." + k));
  };

  str("input", "joint", cfg.joint_path);
  str("input", "nu", cfg.nu_path);
  str("input", "quotes", cfg.quotes_path);
  str("input", "q", cfg.q_path);
  str("input", "h", cfg.h_path);

  integer("solver", "max_iters", cfg.solver.max_iters);
  num("solver", "marginal_tol", cfg.solver.marginal_tol);
  num("solver", "martingale_tol", cfg.solver.martingale_tol);
  num("solver", "newton_tol", cfg.solver.newton_tol);
  integer("solver", "newton_max_steps", cfg.solver.newton_max_steps);
  num("solver", "damping", cfg.solver.damping);

  if (ini.has("duality", "gammas")) cfg.gammas = parse_number_list(ini.get("duality", "gammas"), origin + ": duality.gammas");
  integer("duality", "random_witnesses", cfg.random_witnesses);
  num("duality", "gap_tol", cfg.gap_tol);

  if (ini.has("approx", "deltas")) cfg.deltas = parse_number_list(ini.get("approx", "deltas"), origin + ": approx.deltas");
  num("approx", "eps_ratio", cfg.schedule.ratio);
  integer("approx", "horizon", cfg.schedule.horizon);
  num("approx", "tol", cfg.approx_tol);
  if (ini.has("approx", "write_q_tilde")) cfg.write_q_tilde = to_bool(ini.get("approx", "write_q_tilde"), origin + ": approx.write_q_tilde");

  str("output", "dir", cfg.output_dir);
  integer("run", "seed", cfg.seed);

  auto unused = ini.unused();
  if (!unused.empty()) throw IoError(unused.front());
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError(path + ": cannot open config");
  std::stringstream ss;
  ss << f.rdbuf();
  RunConfig cfg = parse_run_config(ss.str(), path);
  // Relative input paths are relative to the config file; the output dir is not.
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  for (std::string* p : {&cfg.joint_path, &cfg.nu_path, &cfg.quotes_path, &cfg.q_path, &cfg.h_path})
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  return cfg;
}

}  // namespace msb
