#pragma once

// Flat key/value configuration with layered precedence
// (defaults < preset < config file < flags) and its resolution into the
// typed run description used by the sweep engine.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ionlag/params.hpp"
#include "ionlag/thermo.hpp"

namespace ionlag::app {

/// Bad flags, bad config file or parameters that fail validation. Exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Settings = std::map<std::string, std::string>;

/// Keys accepted in config files and on the command line.
const std::vector<std::string>& known_keys();

Settings default_settings();
/// Small-ratio defaults (omega0/nu = 20) for the numeric oracles.
Settings desk_settings();
const std::vector<std::string>& preset_names();
/// Throws UsageError for unknown names.
Settings preset_settings(const std::string& name);

/// Flat "key = value" text; '#' starts a comment. Unknown keys are errors.
Settings parse_config_text(const std::string& text, const std::string& origin);
Settings read_config_file(const std::string& path);

/// Overlays `upper` on `lower`. Setting nbar drops beta (and vice versa),
/// setting phi drops eta, and any key that a lower layer sweeps or sets per
/// panel is pinned: the axis or the panel entry is removed.
Settings overlay(const Settings& lower, const Settings& upper);

/// Parses "1.5", "822e12pi", "2nu" (multiples of the trap frequency).
double parse_quantity(const std::string& text, double nu, const std::string& key);

struct Axis {
  std::string key;  // canonical setting key
  std::vector<double> values;
};

/// "min:max:count" (linear), "min:max:count:log" or "v1,v2,...".
std::vector<double> parse_grid(const std::string& text, const std::string& key);

enum class Format { Csv, Jsonl };

/// Per-branch fixed term counts; nullopt means adaptive.
struct NmaxRule {
  std::optional<int> jc, ajc, carrier;
  std::optional<int> for_branch(Branch b) const;
};
NmaxRule parse_nmax(const std::string& text);

struct RunConfig {
  Settings effective;
  std::vector<Settings> panels;  // at least one (possibly empty) entry
  std::optional<Axis> axis;
  std::optional<Axis> axis2;
  std::vector<Branch> branches;
  std::vector<int> ms;
  NmaxRule nmax;
  double tol = 1e-16;
  bool allow_nonconverged = false;
  bool desk_scale = false;
  bool numeric_oracle = false;
  Format format = Format::Csv;
  std::string out;
  int threads = 1;

  TruncationPolicy policy(Branch b) const;
};

RunConfig resolve(const Settings& merged);

/// One fully specified physical point.
struct PointSpec {
  TrapIonConfig cfg;
  std::optional<ThermalSpec> thermal;
  std::optional<double> eta;
};

/// Resolves physical parameters from a flat map (after panel and axis values
/// have been written into it). Throws UsageError.
PointSpec resolve_point(const Settings& s);

std::string format_double(double v);

}  // namespace ionlag::app
