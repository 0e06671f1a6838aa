#include "settings.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "ionlag/errors.hpp"

namespace ionlag::app {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Axis names accepted on input map onto setting keys.
std::string canonical_axis(const std::string& name) {
  const std::string n = lower(trim(name));
  if (n == "omega_rabi" || n == "rabi") return "omega";
  static const std::set<std::string> ok{"eta", "omega", "nbar", "beta", "nu", "m", "phi", "omega0", "mass"};
  if (!ok.count(n)) throw UsageError("unknown sweep axis '" + name + "'");
  return n;
}

// Keys that a newly set key overrides in lower layers.
std::vector<std::string> pinned_by(const std::string& key) {
  if (key == "nbar" || key == "beta") return {"nbar", "beta"};
  if (key == "eta" || key == "phi") return {"eta", "phi"};
  return {key};
}

std::vector<Settings> parse_panels(const std::string& text) {
  std::vector<Settings> out;
  for (const std::string& p : split(text, ';')) {
    if (p.empty()) continue;
    Settings s;
    for (const std::string& kv : split(p, ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("panel entry '" + kv + "' is not key=value");
      s[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string join_panels(const std::vector<Settings>& panels) {
  std::string out;
  for (std::size_t i = 0; i < panels.size(); ++i) {
    if (i) out += ';';
    bool first = true;
    for (const auto& [k, v] : panels[i]) {
      if (!first) out += ',';
      out += k + '=' + v;
      first = false;
    }
  }
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  const std::string l = lower(v);
  if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
  if (l == "false" || l == "0" || l == "no" || l == "off") return false;
  throw UsageError("'" + key + "' expects true/false, got '" + v + "'");
}

long parse_int(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0') throw UsageError("'" + key + "' expects an integer, got '" + v + "'");
  return x;
}

double plain_number(const std::string& v, const std::string& key) {
  return parse_quantity(v, std::nan(""), key);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "preset", "branch", "m",    "eta",  "phi",   "omega", "omega0", "nu",
      "mass",   "nbar",   "beta", "nmax", "tol",   "format", "out",   "threads",
      "allow-nonconverged", "desk-scale", "numeric-oracle", "axis", "grid", "axis2", "grid2", "panels"};
  return keys;
}

Settings default_settings() {
  // Trap, ion and laser of the reference experiment; angular frequencies.
  return {{"mass", "7e-26"},  {"nu", "5e3"},     {"omega0", "822e12pi"}, {"omega", "1e6pi"},
          {"phi", "0"},       {"nbar", "0.38"},  {"branch", "jc"},       {"m", "1"},
          {"nmax", "0"},      {"tol", "1e-16"},  {"format", "csv"},      {"threads", "1"},
          {"allow-nonconverged", "false"}, {"desk-scale", "false"}, {"numeric-oracle", "false"}};
}

Settings desk_settings() {
  Settings s = default_settings();
  s["nu"] = "1";
  s["omega0"] = "20nu";
  s["omega"] = "2nu";
  s["eta"] = "0.3";
  s["nbar"] = "0.5";
  s["nmax"] = "60";
  s["desk-scale"] = "true";
  return s;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"};
  return names;
}

Settings preset_settings(const std::string& name) {
  // Fixed term counts reproduce the published truncations; tol then only
  // decides the converged flag.
  Settings s{{"preset", name}, {"mass", "7e-26"},  {"nu", "5e3"}, {"omega0", "822e12pi"},
             {"omega", "1e6pi"}, {"nbar", "0.38"}, {"m", "0,1,2"}, {"branch", "ajc,jc"},
             {"nmax", "40"},   {"tol", "1e-10"}};
  if (name == "fig1") {
    s["axis"] = "eta";
    s["grid"] = "0:3.5:36";
  } else if (name == "fig2") {
    s["eta"] = "0.5";
    s["axis"] = "omega";
    s["grid"] = "1e5:1e7:41:log";
  } else if (name == "fig3") {
    s["eta"] = "0.5";
    s["axis"] = "nbar";
    s["grid"] = "0.01:10:41:log";
    s["nmax"] = "ajc:2000,carrier:2000,jc:5000";
  } else if (name == "fig4") {
    s["nu"] = "1.2e8";
    s["omega0"] = "1e8";
    s["branch"] = "jc";
    s["m"] = "1,2";
    s["nmax"] = "50";
    s["panels"] = "eta=1.5,omega=0.5e9;eta=1.0,omega=1e9";
    s["axis"] = "nbar";
    s["grid"] = "0.01:1:41:log";
  } else if (name == "fig5") {
    // Adaptive sum, as for fig6. Temperature fixed at the reference point (nbar = 0.38 at 5 kHz) while
    // nu moves; eta follows from the geometry.
    s.erase("nbar");
    s["beta"] = format_double(bnu_from_nbar(0.38) / (kHbar * 5e3));
    s["branch"] = "carrier";
    s["m"] = "0";
    s["nmax"] = "0";
    s["axis"] = "nu";
    s["grid"] = "5e3:5e4:11:log";
    s["axis2"] = "phi";
    s["grid2"] = "0:" + format_double(std::numbers::pi / 2) + ":16";
  } else if (name == "fig6") {
    // Only the physical parameters are shared with fig1; at m ~ 40 forty
    // terms no longer bound the tail, so the sum is adaptive.
    s["nmax"] = "0";
    s["branch"] = "jc,ajc";
    s["axis"] = "m";
    s["grid"] = "0:40:41";
    s.erase("m");
    s["panels"] = "eta=0.5;eta=1.5;eta=2.5;eta=3.5";
  } else {
    throw UsageError("unknown preset '" + name + "' (expected fig1..fig6)");
  }
  return s;
}

Settings parse_config_text(const std::string& text, const std::string& origin) {
  const auto& keys = known_keys();
  Settings s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw UsageError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (s.count(key)) throw UsageError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    s[key] = trim(line.substr(eq + 1));
  }
  if (s.count("nbar") && s.count("beta")) throw UsageError(origin + ": nbar and beta are mutually exclusive");
  return s;
}

Settings read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str(), path);
}

Settings overlay(const Settings& lower, const Settings& upper) {
  Settings out = lower;
  // Pinning only ever removes entries that came from the lower layer.
  for (const auto& [key, value] : upper) {
    const auto pinned = pinned_by(key);
    for (const std::string& p : pinned) {
      if (p != key) out.erase(p);
      for (const char* ax : {"axis", "axis2"}) {
        if (out.count(ax) && canonical_axis(out[ax]) == p) {
          out.erase(ax);
          out.erase(std::string(ax) == "axis" ? "grid" : "grid2");
        }
      }
    }
    if (out.count("panels") && key != "panels") {
      auto panels = parse_panels(out["panels"]);
      for (Settings& p : panels) {
        for (const std::string& k : pinned) p.erase(k);
      }
      std::erase_if(panels, [](const Settings& p) { return p.empty(); });
      if (panels.empty()) {
        out.erase("panels");
      } else {
        out["panels"] = join_panels(panels);
      }
    }
  }
  for (const auto& [key, value] : upper) out[key] = value;
  return out;
}

double parse_quantity(const std::string& text, double nu, const std::string& key) {
  const std::string t = lower(trim(text));
  const char* begin = t.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin) throw UsageError("'" + key + "' expects a number, got '" + text + "'");
  std::string rest = trim(end);
  for (;;) {
    if (rest.rfind("pi", 0) == 0) {
      v *= std::numbers::pi;
      rest = trim(rest.substr(2));
    } else if (rest.rfind("nu", 0) == 0) {
      if (std::isnan(nu)) throw UsageError("'" + key + "' cannot be given in units of nu");
      v *= nu;
      rest = trim(rest.substr(2));
    } else {
      break;
    }
  }
  if (!rest.empty()) throw UsageError("'" + key + "': trailing '" + rest + "' in '" + text + "'");
  if (!std::isfinite(v)) throw UsageError("'" + key + "' must be finite");
  return v;
}

std::vector<double> parse_grid(const std::string& text, const std::string& key) {
  std::vector<double> v;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3 && parts.size() != 4) throw UsageError("grid '" + text + "' must be min:max:count[:log]");
    const double lo = plain_number(parts[0], key), hi = plain_number(parts[1], key);
    const long n = parse_int(parts[2], key);
    const bool log = parts.size() == 4;
    if (log && lower(parts[3]) != "log" && lower(parts[3]) != "lin") {
      throw UsageError("grid spacing must be 'log' or 'lin'");
    }
    const bool logspace = log && lower(parts[3]) == "log";
    if (n < 1) throw UsageError("grid '" + text + "' needs at least one point");
    if (logspace && (lo <= 0.0 || hi <= 0.0)) throw UsageError("log grid '" + text + "' needs positive bounds");
    for (long i = 0; i < n; ++i) {
      const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
      double x = logspace ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
      if (i == 0) x = lo;
      if (i == n - 1) x = hi;
      v.push_back(x);
    }
  } else {
    for (const std::string& p : split(text, ',')) v.push_back(plain_number(p, key));
  }
  if (v.empty()) throw UsageError("empty grid for '" + key + "'");
  const bool up = v.size() < 2 || v[1] > v[0];
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (up ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])) {
      throw UsageError("grid for '" + key + "' must be strictly monotone");
    }
  }
  return v;
}

std::optional<int> NmaxRule::for_branch(Branch b) const {
  switch (b) {
    case Branch::JC: return jc;
    case Branch::AJC: return ajc;
    default: return carrier;
  }
}

NmaxRule parse_nmax(const std::string& text) {
  auto one = [&](const std::string& v) -> std::optional<int> {
    const long n = parse_int(v, "nmax");
    if (n < 0 || n > 100'000'000) throw UsageError("nmax must be in [0, 1e8]");
    if (n == 0) return std::nullopt;
    return static_cast<int>(n);
  };
  NmaxRule r;
  if (text.find(':') == std::string::npos) {
    r.jc = r.ajc = r.carrier = one(trim(text));
    return r;
  }
  for (const std::string& part : split(text, ',')) {
    const auto c = part.find(':');
    if (c == std::string::npos) throw UsageError("nmax entry '" + part + "' must be branch:count");
    Branch b;
    try {
      b = parse_branch(trim(part.substr(0, c)));
    } catch (const ParameterError& e) {
      throw UsageError(e.what());
    }
    const auto n = one(trim(part.substr(c + 1)));
    (b == Branch::JC ? r.jc : b == Branch::AJC ? r.ajc : r.carrier) = n;
  }
  return r;
}

TruncationPolicy RunConfig::policy(Branch b) const {
  TruncationPolicy p;
  p.fixed_terms = nmax.for_branch(b);
  p.tol = tol;
  // The engine always reports; the exit code carries non-convergence.
  p.allow_nonconverged = true;
  return p;
}

RunConfig resolve(const Settings& merged) {
  RunConfig rc;
  rc.effective = merged;
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    const auto it = merged.find(k);
    if (it == merged.end()) return std::nullopt;
    return it->second;
  };

  rc.panels = merged.count("panels") ? parse_panels(merged.at("panels")) : std::vector<Settings>{};
  if (rc.panels.empty()) rc.panels.emplace_back();
  for (const Settings& p : rc.panels) {
    for (const auto& [k, v] : p) {
      if (std::find(known_keys().begin(), known_keys().end(), k) == known_keys().end()) {
        throw UsageError("unknown key '" + k + "' in panels");
      }
    }
  }

  auto read_axis = [&](const char* ak, const char* gk) -> std::optional<Axis> {
    const auto a = get(ak);
    const auto g = get(gk);
    if (!a && !g) return std::nullopt;
    if (!a || !g) throw UsageError(std::string("'") + ak + "' and '" + gk + "' must be given together");
    Axis ax{canonical_axis(*a), parse_grid(*g, *a)};
    if (ax.key == "m") {
      for (double x : ax.values) {
        if (x < 0 || x != std::floor(x)) throw UsageError("m grid must hold nonnegative integers");
      }
    }
    return ax;
  };
  rc.axis = read_axis("axis", "grid");
  rc.axis2 = read_axis("axis2", "grid2");
  if (rc.axis2 && !rc.axis) throw UsageError("axis2 needs axis");
  if (rc.axis && rc.axis2 && rc.axis->key == rc.axis2->key) throw UsageError("axis and axis2 must differ");

  for (const std::string& b : split(get("branch").value_or("jc"), ',')) {
    try {
      const Branch br = parse_branch(b);
      if (std::find(rc.branches.begin(), rc.branches.end(), br) == rc.branches.end()) rc.branches.push_back(br);
    } catch (const ParameterError& e) {
      throw UsageError(e.what());
    }
  }
  const bool m_swept = (rc.axis && rc.axis->key == "m") || (rc.axis2 && rc.axis2->key == "m");
  if (!m_swept) {
    for (const std::string& m : split(get("m").value_or("0"), ',')) {
      const long v = parse_int(m, "m");
      if (v < 0 || v > 100000) throw UsageError("m must be in [0, 1e5]");
      rc.ms.push_back(static_cast<int>(v));
    }
  }

  rc.nmax = parse_nmax(get("nmax").value_or("0"));
  rc.tol = plain_number(get("tol").value_or("1e-16"), "tol");
  if (!(rc.tol > 0.0 && rc.tol < 1.0)) throw UsageError("tol must be in (0, 1)");
  rc.allow_nonconverged = parse_bool(get("allow-nonconverged").value_or("false"), "allow-nonconverged");
  rc.desk_scale = parse_bool(get("desk-scale").value_or("false"), "desk-scale");
  rc.numeric_oracle = parse_bool(get("numeric-oracle").value_or("false"), "numeric-oracle");
  const std::string fmt = lower(get("format").value_or("csv"));
  if (fmt == "csv") {
    rc.format = Format::Csv;
  } else if (fmt == "jsonl") {
    rc.format = Format::Jsonl;
  } else {
    throw UsageError("format must be csv or jsonl");
  }
  rc.out = get("out").value_or("");
  const long th = parse_int(get("threads").value_or("1"), "threads");
  if (th < 0 || th > 1024) throw UsageError("threads must be in [0, 1024]");
  rc.threads = th == 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency())) : static_cast<int>(th);
  return rc;
}

PointSpec resolve_point(const Settings& s) {
  auto need = [&](const char* k) -> const std::string& {
    const auto it = s.find(k);
    if (it == s.end()) throw UsageError(std::string("missing parameter '") + k + "'");
    return it->second;
  };
  PointSpec p;
  p.cfg.nu = parse_quantity(need("nu"), std::nan(""), "nu");
  const double nu = p.cfg.nu;
  p.cfg.mass = parse_quantity(need("mass"), std::nan(""), "mass");
  p.cfg.omega0 = parse_quantity(need("omega0"), nu, "omega0");
  p.cfg.rabi = parse_quantity(need("omega"), nu, "omega");
  p.cfg.phi = s.count("phi") ? parse_quantity(s.at("phi"), std::nan(""), "phi") : 0.0;
  if (s.count("eta")) p.eta = parse_quantity(s.at("eta"), std::nan(""), "eta");
  try {
    p.cfg.validate();
    const bool has_n = s.count("nbar"), has_b = s.count("beta");
    if (has_n && has_b) throw UsageError("nbar and beta are mutually exclusive");
    if (has_n) {
      p.thermal.emplace(MeanOccupation{parse_quantity(s.at("nbar"), std::nan(""), "nbar")});
    } else if (has_b) {
      p.thermal.emplace(InverseTemperature{parse_quantity(s.at("beta"), std::nan(""), "beta")});
    } else {
      throw UsageError("one of nbar or beta is required");
    }
  } catch (const std::logic_error& e) {
    throw UsageError(e.what());
  }
  if (p.eta && !(*p.eta >= 0.0)) throw UsageError("eta must be nonnegative");
  return p;
}

}  // namespace ionlag::app
