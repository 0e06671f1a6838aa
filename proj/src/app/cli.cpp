#include "cli.hpp"

#include <fstream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "engine.hpp"
#include "output.hpp"
#include "settings.hpp"
#include "verify.hpp"

namespace ionlag::app {

namespace {

struct DataOptions {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::set<std::string> flags;
  std::string config_path;
  CLI::Option* config = nullptr;
};

void add_data_options(CLI::App* sub, DataOptions& d, bool moments) {
  d.config = sub->add_option("--config", d.config_path, "flat key = value file (keys as the long flags)");
  auto opt = [&](const std::string& key, const std::string& help) {
    d.options[key] = sub->add_option("--" + key, d.values[key], help);
  };
  auto flag = [&](const std::string& key, const std::string& help) {
    d.options[key] = sub->add_flag("--" + key, help);
    d.flags.insert(key);
  };

  opt("preset", "fig1 .. fig6");
  opt("branch", "jc, ajc, carrier (comma list)");
  opt("m", "sideband order(s), comma list");
  opt("eta", "Lamb-Dicke parameter (overrides the geometric value)");
  opt("phi", "laser/trap-axis angle in rad");
  opt("omega", "Rabi frequency, rad/s; suffix 'nu' for multiples of nu, 'pi' for factors of pi");
  opt("omega0", "transition frequency, rad/s");
  opt("nu", "trap frequency, rad/s");
  opt("mass", "ion mass, kg");
  opt("nbar", "initial mean phonon number");
  opt("beta", "inverse temperature, 1/J");
  opt("nmax", "block terms: 0 adaptive, N fixed, or jc:N,ajc:N,carrier:N");
  opt("tol", "relative tail tolerance for the converged flag");
  opt("format", "csv or jsonl");
  opt("out", "output file (default stdout)");
  opt("threads", "worker threads, 0 = all cores");
  opt("axis", "swept key: eta, omega, nbar, beta, nu, m, phi, omega0, mass");
  opt("grid", "min:max:count[:log] or v1,v2,...");
  opt("axis2", "second swept key (inner loop)");
  opt("grid2", "grid of axis2");
  opt("panels", "per-panel overrides, e.g. eta=1.5,omega=0.5e9;eta=1.0,omega=1e9");
  flag("allow-nonconverged", "exit 0 even when some rows did not converge");
  flag("desk-scale", "small-ratio defaults (omega0 = 20 nu); rejects omega0/nu > 1e3");
  if (moments) flag("numeric-oracle", "add dense-matrix moments and deviations");
  d.options["nbar"]->excludes(d.options["beta"]);
}

Settings layered(const DataOptions& d) {
  Settings flags;
  for (const auto& [key, o] : d.options) {
    if (!o->count()) continue;
    flags[key] = d.flags.count(key) ? "true" : d.values.at(key);
  }
  const Settings file = d.config->count() ? read_config_file(d.config_path) : Settings{};
  auto pick = [&](const std::string& k) -> std::optional<std::string> {
    if (flags.count(k)) return flags.at(k);
    if (file.count(k)) return file.at(k);
    return std::nullopt;
  };
  const auto desk = pick("desk-scale");
  Settings merged = (desk && *desk != "false" && *desk != "0") ? desk_settings() : default_settings();
  if (const auto p = pick("preset")) merged = overlay(merged, preset_settings(*p));
  merged = overlay(merged, file);
  return overlay(merged, flags);
}

template <class Fn>
int emit(const RunConfig& rc, std::ostream& out, Fn&& write) {
  if (rc.out.empty()) {
    write(out);
    return kOk;
  }
  std::ofstream f(rc.out, std::ios::binary);
  if (!f) throw UsageError("cannot open output file '" + rc.out + "'");
  write(f);
  if (!f) throw UsageError("write to '" + rc.out + "' failed");
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonequilibrium lag and work statistics of a laser-quenched trapped ion", "ionlag"};
  app.require_subcommand(1);

  DataOptions lag_o, sweep_o, mom_o, spec_o;
  CLI::App* lag = app.add_subcommand("lag", "lag per grid point, branch and m");
  add_data_options(lag, lag_o, false);
  CLI::App* sweep = app.add_subcommand("sweep", "same as lag, but a sweep axis is required");
  add_data_options(sweep, sweep_o, false);
  CLI::App* mom = app.add_subcommand("moments", "closed-form work moments in units of hbar*nu");
  add_data_options(mom, mom_o, true);
  CLI::App* spec = app.add_subcommand("spectrum", "eigenvalues of the sideband Hamiltonian in units of hbar*nu");
  add_data_options(spec, spec_o, false);

  std::string level;
  std::uint64_t seed = 1;
  std::string verify_out;
  CLI::App* ver = app.add_subcommand("verify", "run the self-check suite");
  ver->add_option("level", level, "fast or full")->required()->check(CLI::IsMember({"fast", "full"}));
  ver->add_option("--seed", seed, "seed for the randomized cases");
  ver->add_option("--out", verify_out, "also write the report to this file");

  std::vector<std::string> argv_store{"ionlag"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (ver->parsed()) {
      const VerifyReport r = run_verify(level, seed);
      print_report(out, r);
      if (!verify_out.empty()) {
        std::ofstream f(verify_out, std::ios::binary);
        if (!f) throw UsageError("cannot open output file '" + verify_out + "'");
        print_report(f, r);
      }
      return r.passed() ? kOk : kVerifyFailed;
    }
    if (lag->parsed() || sweep->parsed()) {
      const DataOptions& d = lag->parsed() ? lag_o : sweep_o;
      const RunConfig rc = resolve(layered(d));
      if (sweep->parsed() && !rc.axis) throw UsageError("sweep needs --axis and --grid (or a preset)");
      const LagRun run = run_lag(rc);
      emit(rc, out, [&](std::ostream& os) { write_table(os, run.table, rc.format, lag->parsed() ? "lag" : "sweep", rc.effective); });
      if (run.any_nonconverged && !rc.allow_nonconverged) {
        err << "ionlag: some rows did not converge (converged=false); rerun with larger --nmax or --nmax 0\n";
        return kNonConverged;
      }
      return kOk;
    }
    if (mom->parsed()) {
      const RunConfig rc = resolve(layered(mom_o));
      const Table t = run_moments(rc);
      return emit(rc, out, [&](std::ostream& os) { write_table(os, t, rc.format, "moments", rc.effective); });
    }
    const RunConfig rc = resolve(layered(spec_o));
    const Table t = run_spectrum(rc);
    return emit(rc, out, [&](std::ostream& os) { write_table(os, t, rc.format, "spectrum", rc.effective); });
  } catch (const UsageError& e) {
    err << "ionlag: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "ionlag: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace ionlag::app
