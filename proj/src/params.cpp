#include "ionlag/params.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "ionlag/errors.hpp"

namespace ionlag {

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::JC:
      return "jc";
    case Branch::AJC:
      return "ajc";
    case Branch::Carrier:
      return "carrier";
  }
  return "?";
}

Branch parse_branch(std::string_view s) {
  std::string lower(s);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "jc") return Branch::JC;
  if (lower == "ajc") return Branch::AJC;
  if (lower == "carrier") return Branch::Carrier;
  throw ParameterError("unknown branch '" + std::string(s) + "' (expected jc, ajc or carrier)");
}

void TrapIonConfig::validate() const {
  auto bad = [](const char* what) { throw ParameterError(std::string("invalid trap config: ") + what); };
  if (!(mass > 0.0) || !std::isfinite(mass)) bad("mass must be positive");
  if (!(nu > 0.0) || !std::isfinite(nu)) bad("nu must be positive");
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) bad("omega0 must be positive");
  if (!(rabi >= 0.0) || !std::isfinite(rabi)) bad("Omega must be nonnegative");
  if (!(phi >= 0.0 && phi <= std::numbers::pi / 2)) bad("phi must lie in [0, pi/2]");
}

QuenchSpec::QuenchSpec(int m, Branch branch) : m_(m), branch_(branch) {
  if (m < 0) throw ParameterError("sideband index m must be nonnegative");
  if (branch == Branch::Carrier && m != 0) throw ParameterError("carrier quench requires m = 0");
  if (m == 0) branch_ = Branch::Carrier;
}

int QuenchSpec::detuning_sign() const {
  switch (branch_) {
    case Branch::JC:
      return -1;
    case Branch::AJC:
      return +1;
    case Branch::Carrier:
      return 0;
  }
  return 0;
}

double nbar_from_bnu(double b_nu) {
  if (!(b_nu > 0.0)) throw DomainError("beta*hbar*nu must be positive");
  return 1.0 / std::expm1(b_nu);
}

double bnu_from_nbar(double nbar) {
  if (!(nbar > 0.0)) throw DomainError("mean occupation nbar must be positive");
  return std::log1p(1.0 / nbar);
}

ThermalSpec::ThermalSpec(InverseTemperature beta) : value_(beta) {
  if (!(beta.value > 0.0) || !std::isfinite(beta.value)) throw DomainError("beta must be positive and finite");
}

ThermalSpec::ThermalSpec(MeanOccupation nbar) : value_(nbar) {
  if (!(nbar.value > 0.0) || !std::isfinite(nbar.value)) throw DomainError("nbar must be positive and finite");
}

double ThermalSpec::b_nu(double nu) const {
  if (!(nu > 0.0)) throw DomainError("nu must be positive");
  if (const auto* b = std::get_if<InverseTemperature>(&value_)) return b->value * kHbar * nu;
  return bnu_from_nbar(std::get<MeanOccupation>(value_).value);
}

double ThermalSpec::nbar(double nu) const {
  if (const auto* n = std::get_if<MeanOccupation>(&value_)) return n->value;
  return nbar_from_bnu(b_nu(nu));
}

double ThermalSpec::beta(double nu) const {
  if (const auto* b = std::get_if<InverseTemperature>(&value_)) return b->value;
  return b_nu(nu) / (kHbar * nu);
}

double laser_frequency(const TrapIonConfig& cfg, const QuenchSpec& q) {
  return cfg.omega0 + q.detuning_sign() * q.m() * cfg.nu;
}

double eta_from_geometry(const TrapIonConfig& cfg, const QuenchSpec& q) {
  cfg.validate();
  const double wL = laser_frequency(cfg, q);
  // cos(pi/2) is not exactly zero in double.
  const double c = cfg.phi == std::numbers::pi / 2 ? 0.0 : std::cos(cfg.phi);
  return std::abs(wL) / kSpeedOfLight * std::sqrt(kHbar / (2.0 * cfg.mass * cfg.nu)) * c;
}

double ReducedParams::wL() const {
  switch (branch) {
    case Branch::JC:
      return w0 - m;
    case Branch::AJC:
      return w0 + m;
    case Branch::Carrier:
      return w0;
  }
  return w0;
}

double ReducedParams::abs_wL_minus_w0() const {
  switch (branch) {
    case Branch::JC:
      return w0 >= m ? -static_cast<double>(m) : m - 2.0 * w0;
    case Branch::AJC:
      return static_cast<double>(m);
    case Branch::Carrier:
      return 0.0;
  }
  return 0.0;
}

namespace {

ReducedParams assemble(double b_nu, double w0, double rabi, double eta, QuenchSpec q) {
  ReducedParams rp;
  rp.b_nu = b_nu;
  rp.w0 = w0;
  rp.rabi = rabi;
  rp.eta = eta;
  rp.m = q.m();
  rp.branch = q.branch();
  rp.b_w0 = b_nu * w0;
  rp.b_Om = b_nu * rabi;
  rp.b_wL = rp.b_w0 + q.detuning_sign() * q.m() * b_nu;
  for (double v : {rp.b_nu, rp.b_w0, rp.b_Om, rp.b_wL, rp.w0, rp.rabi, rp.eta}) {
    if (!std::isfinite(v)) throw ParameterError("dimensionless group is not finite");
  }
  if (!(rp.b_nu > 0.0) || !(rp.b_w0 > 0.0)) throw ParameterError("beta*hbar*nu and beta*hbar*omega0 must be positive");
  if (!(rp.eta >= 0.0)) throw ParameterError("Lamb-Dicke parameter must be nonnegative");
  if (!(rp.rabi >= 0.0)) throw ParameterError("Omega must be nonnegative");
  return rp;
}

}  // namespace

ReducedParams ReducedParams::dimensionless(double w0_over_nu, double rabi_over_nu, double eta, double nbar,
                                           QuenchSpec q) {
  return assemble(bnu_from_nbar(nbar), w0_over_nu, rabi_over_nu, eta, q);
}

ReducedParams reduce(const TrapIonConfig& cfg, const QuenchSpec& q, const ThermalSpec& t,
                     std::optional<double> eta_override) {
  cfg.validate();
  const double eta = eta_override ? *eta_override : eta_from_geometry(cfg, q);
  return assemble(t.b_nu(cfg.nu), cfg.omega0 / cfg.nu, cfg.rabi / cfg.nu, eta, q);
}

}  // namespace ionlag
