#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "msbridge/approximation.hpp"
#include "msbridge/bridge.hpp"

namespace msb {

/// Sectioned key = value text. Lines starting with '#' or ';' are comments.
class IniFile {
 public:
  static IniFile parse(const std::string& text, const std::string& origin);
  static IniFile load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  /// Keys never read through get(); used to reject typos.
  std::vector<std::string> unused() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::string origin_;
  std::map<std::string, Entry> entries_;  // "section.key"
  mutable std::map<std::string, bool> read_;
};

struct RunConfig {
  std::string joint_path;   ///< reference measure P
  std::string nu_path;      ///< terminal marginal
  std::string quotes_path;  ///< call quotes, alternative to nu_path
  std::string q_path;       ///< measure to approximate (default: the bridge solution)
  std::string h_path;       ///< h over xgrid (default: the bridge's optimal h)
  SolverOptions solver;
  std::vector<double> gammas{1.0};
  int random_witnesses = 4;
  double gap_tol = 1e-6;
  std::vector<double> deltas{1e-1, 1e-2, 1e-3};
  EpsSchedule schedule;
  double approx_tol = 1e-3;
  bool write_q_tilde = false;
  std::string output_dir = ".";
  std::uint64_t seed = 1;

  /// Tolerances positive, at most one of nu/quotes.
  void validate() const;
};

/// Reads [input], [solver], [duality], [approx], [output] and [run].
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text, const std::string& origin);

std::vector<double> parse_number_list(const std::string& text, const std::string& what);

}  // namespace msb
