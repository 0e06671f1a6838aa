#pragma once

// Partition functions, the nonequilibrium lag and its asymptotic regimes.
//
// Every log-partition is stored shifted by b_w0/2 (beta*hbar*omega0/2), which
// is ~3e11 at optical frequencies; the shift is never added back.

#include <optional>
#include <span>
#include <vector>

#include "ionlag/errors.hpp"
#include "ionlag/params.hpp"

namespace ionlag {

struct TruncationPolicy {
  /// When set, exactly this many block terms are summed.
  std::optional<int> fixed_terms;
  double tol = 1e-16;
  int window = 64;
  long max_terms = 200'000'000;
  /// Report instead of throwing when the sum has not converged.
  bool allow_nonconverged = false;

  static TruncationPolicy fixed(int n) {
    TruncationPolicy p;
    p.fixed_terms = n;
    return p;
  }
};

struct TruncationReport {
  long n_used = 0;
  double tail_bound_log = 0.0;  // ln(estimated tail / sum)
  bool converged = false;
};

class TruncationError : public RangeError {
 public:
  TruncationError(const std::string& what, TruncationReport r) : RangeError(what), report_(r) {}
  const TruncationReport& report() const { return report_; }

 private:
  TruncationReport report_;
};

struct LogPartition {
  double shifted_log = 0.0;      // ln Z - b_w0/2
  double shift_reference = 0.0;  // b_w0/2
  TruncationReport truncation;
};

LogPartition ln_partition_initial(const ReducedParams& rp);
LogPartition ln_partition_final(const ReducedParams& rp, const TruncationPolicy& policy = {});

struct RegimeFlags {
  bool divergence_predicted = false;
  bool low_temperature_finite = false;
  double low_temperature_limit = 0.0;  // meaningful when low_temperature_finite
};

struct LagResult {
  double value = 0.0;
  TruncationReport truncation;
  RegimeFlags regime_flags;
};

/// ln Z_i - ln Z_f summed block by block as log1p(sum_n P_n (R_n - 1)), where
/// P_n is the initial weight of block n and R_n >= 1 its cosh ratio.
LagResult nonequilibrium_lag(const ReducedParams& rp, const TruncationPolicy& policy = {});

/// Same as calling nonequilibrium_lag on each point; up to four points share
/// one vectorized Laguerre recurrence. Results are bit-identical to the
/// single-point call.
std::vector<LagResult> nonequilibrium_lag_batch(std::span<const ReducedParams> points,
                                                const TruncationPolicy& policy = {});

/// Angular frequencies (rad/s) that fix Phi and the divergence rule.
struct Frequencies {
  double nu = 0.0;
  double omega0 = 0.0;
  double rabi = 0.0;

  static Frequencies from(const TrapIonConfig& cfg) { return {cfg.nu, cfg.omega0, cfg.rabi}; }
};

struct PhiValue {
  int n = 0;
  int m = 0;
  Branch branch = Branch::Carrier;
  double phi = 0.0;  // rad/s
};

/// nu(2n+m) + omega0 - sqrt(wL^2 + Omega^2 |f_n^m|^2).
PhiValue phi(int n, const QuenchSpec& q, const Frequencies& f, double eta);
/// Same quantity divided by nu, from reduced parameters.
double phi_reduced(int n, const ReducedParams& rp);

/// |Phi| <= kPhiZeroTol * (nu(2n+m) + ||w_L| - omega0| + excess) counts as a zero;
/// the pieces are the ones Phi is actually summed from.
inline constexpr double kPhiZeroTol = 1e-9;

inline int default_scan_max(int m) { return 10 * m + 100; }

struct DivergenceVerdict {
  bool diverges = false;
  std::vector<int> witnesses;  // 0-based n with Phi_n^m < 0
};

/// JC: diverges iff |f_n^m| > (2/Omega) sqrt(nu (omega0 + n nu)(n + m)) for some
/// n <= n_scan_max. AJC and carrier: Phi_0 < 0 whenever the n = 0 block couples.
DivergenceVerdict divergence_predicate(const QuenchSpec& q, const Frequencies& f, double eta, int n_scan_max);

struct LowTemperatureLimit {
  bool finite = false;
  std::optional<double> limit_value;
  int zero_count = 0;
};

LowTemperatureLimit low_temperature_limit(const QuenchSpec& q, const Frequencies& f, double eta, int n_scan_max);

struct SmallEtaExpansion {
  double second_order = 0.0;  // keeps the eta^2 correction
  double leading = 0.0;       // only the m in {0, 1} terms up to eta^2
};

/// Small-eta approximation of |f_n^m|^2. Requires eta < 0.3.
SmallEtaExpansion small_eta_expansion(int n, int m, double eta);

/// ln[ sech(b w0/2) sum_n cosh(b sqrt(w0^2 + rabi^2 |f_n^m|^2)/2) ], the
/// nu -> 0 form at fixed eta. Every summand tends to 1, so the report is
/// non-converged unless the policy fixes the term count.
LogPartition nu_to_zero_limit(const ReducedParams& rp, const TruncationPolicy& policy);

}  // namespace ionlag
