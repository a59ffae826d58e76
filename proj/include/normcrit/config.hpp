#pragma once

#include "normcrit/domain.hpp"
#include "normcrit/energy.hpp"
#include "normcrit/nonlinearity.hpp"
#include "normcrit/solver.hpp"
#include "normcrit/types.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace normcrit {

/// Parsed node of the block / key=value config grammar.
struct ConfigNode {
  std::string name;
  std::map<std::string, std::string> values;             // key = value
  std::vector<std::pair<std::string, std::shared_ptr<ConfigNode>>> blocks;
  std::string location;  // file:line for error messages

  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  int integer(const std::string& key) const;
  int integer_or(const std::string& key, int fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  std::string text(const std::string& key) const;
  const ConfigNode* block(const std::string& key) const;  // null if absent
  std::vector<const ConfigNode*> all_blocks(const std::string& key) const;
};

ConfigNode parse_config_text(const std::string& text,
                             const std::string& filename = "<string>");
ConfigNode parse_config_file(const std::string& path);

struct MuScan {
  double from = 0.0;
  double to = 0.0;
  int steps = 0;
  bool log = true;
  std::vector<double> grid() const;
};

struct ThresholdOverrides {
  std::optional<double> lambda1;
  std::optional<double> gn_c;        // interior constant
  std::optional<double> gn_c_trace;  // trace constant (Robin)
  std::optional<double> energy_M;
};

/// Validated run configuration.  Unknown keys anywhere are hard errors.
struct RunConfig {
  DomainSpec domain;
  BoundaryMode mode;
  std::vector<PowerTerm> f_terms;
  std::vector<PowerTerm> g_terms;  // Robin only
  std::optional<double> mu;
  std::optional<MuScan> mu_scan;
  int n = 64;
  int eigs = 6;
  uint64_t seed = 1;
  std::string out_dir = "out";
  bool cache = false;
  double shift = 0.0;
  ContinuationSchedule schedule;
  Tolerances tol;
  int multiplicity_m = 1;
  double k_tune = 100.0;
  bool corroborate_mu0 = false;  // run the lambda = 0 Newton scan
  ThresholdOverrides overrides;

  double mu_value() const;  // mu, or the single scan point
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const ConfigNode& root);

}  // namespace normcrit
