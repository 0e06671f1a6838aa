#pragma once

// Physical parameters of a single trapped ion driven by a classical laser, and
// their reduction to the dimensionless groups consumed everywhere else.
//
// All frequencies are angular (rad/s). Energies inside the library are
// measured in units of hbar*nu.

#include <optional>
#include <string_view>
#include <variant>

namespace ionlag {

inline constexpr double kHbar = 1.054571817e-34;        // J s
inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

enum class Branch { JC, AJC, Carrier };

std::string_view to_string(Branch b);
/// Accepts "jc", "ajc", "carrier" (case-insensitive).
Branch parse_branch(std::string_view s);

struct TrapIonConfig {
  double mass = 0.0;    // kg
  double nu = 0.0;      // trap frequency
  double omega0 = 0.0;  // electronic transition frequency
  double rabi = 0.0;    // classical Rabi frequency Omega
  double phi = 0.0;     // laser / trap-axis angle, [0, pi/2]

  /// Throws ParameterError if any invariant is violated.
  void validate() const;
};

class QuenchSpec {
 public:
  /// m == 0 with JC or AJC is normalized to Carrier; Carrier with m > 0 throws.
  QuenchSpec(int m, Branch branch);

  static QuenchSpec carrier() { return {0, Branch::Carrier}; }

  int m() const { return m_; }
  Branch branch() const { return branch_; }

  /// Laser detuning sign: -1 for JC (w_L = w0 - m nu), +1 for AJC, 0 for carrier.
  int detuning_sign() const;

  friend bool operator==(const QuenchSpec&, const QuenchSpec&) = default;

 private:
  int m_;
  Branch branch_;
};

struct InverseTemperature {
  double value;  // 1/J
};
struct MeanOccupation {
  double value;
};

class ThermalSpec {
 public:
  explicit ThermalSpec(InverseTemperature beta);
  explicit ThermalSpec(MeanOccupation nbar);

  /// beta * hbar * nu for the given trap frequency.
  double b_nu(double nu) const;
  double nbar(double nu) const;
  double beta(double nu) const;

  bool holds_beta() const { return std::holds_alternative<InverseTemperature>(value_); }

 private:
  std::variant<InverseTemperature, MeanOccupation> value_;
};

/// nbar = 1/(exp(b) - 1) with b = beta*hbar*nu.
double nbar_from_bnu(double b_nu);
/// b = ln(1 + 1/nbar).
double bnu_from_nbar(double nbar);

/// Lamb-Dicke parameter for the laser frequency fixed by the quench choice.
double eta_from_geometry(const TrapIonConfig& cfg, const QuenchSpec& q);

/// Laser frequency w_L = w0 -/+ m nu (rad/s).
double laser_frequency(const TrapIonConfig& cfg, const QuenchSpec& q);

/// Dimensionless groups. The b_* fields are beta*hbar*(frequency); w0 and rabi
/// are the same frequencies divided by nu and are what the kernels use, so the
/// large ratio w0/nu never needs to be recovered by division.
struct ReducedParams {
  double b_nu = 0.0;
  double b_w0 = 0.0;
  double b_Om = 0.0;
  double b_wL = 0.0;
  double eta = 0.0;
  int m = 0;
  Branch branch = Branch::Carrier;

  double w0 = 0.0;    // omega0 / nu
  double rabi = 0.0;  // Omega / nu

  QuenchSpec quench() const { return {m, branch}; }
  double nbar() const { return nbar_from_bnu(b_nu); }
  /// w_L / nu, exact for the detuning part.
  double wL() const;
  /// |w_L|/nu - w0/nu evaluated without cancellation.
  double abs_wL_minus_w0() const;

  /// Dimensionless construction used by desk-scale tests and oracles.
  static ReducedParams dimensionless(double w0_over_nu, double rabi_over_nu, double eta,
                                     double nbar, QuenchSpec q);
};

ReducedParams reduce(const TrapIonConfig& cfg, const QuenchSpec& q, const ThermalSpec& t,
                     std::optional<double> eta_override = std::nullopt);

}  // namespace ionlag
