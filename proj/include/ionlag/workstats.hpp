#pragma once

// Moments of the sudden-quench work distribution: closed forms, the dense
// trace-formula oracle, and the two-point-measurement distribution of a
// sideband quench. Work is in units of hbar*nu.

#include <utility>
#include <vector>

#include "ionlag/params.hpp"

namespace ionlag {

struct WorkMoments {
  double mean = 0.0;
  double second = 0.0;
  double third = 0.0;
  double skewness = 0.0;  // third / second^{3/2}; 0 when second == 0
};

/// Closed-form moments for the full-Hamiltonian quench.
WorkMoments moments_analytic(const ReducedParams& rp);

struct NumericMoment {
  double value = 0.0;
  /// max |term| / |value| over the binomial sum.
  double cancellation_ratio = 0.0;
  /// Set when cancellation_ratio > 1e6.
  bool cancellation_warning = false;
  bool thermal_tail_warning = false;
};

enum class QuenchTarget { Full, Sideband };

/// sum_k (-1)^k C(n,k) Tr[H_f^{n-k} H_i^k rho_i] on dense matrices; order <= 4.
NumericMoment moments_numeric(const ReducedParams& rp, int n_trunc, int order, QuenchTarget target);

struct WorkPMF {
  std::vector<std::pair<double, double>> points;  // (work, probability), ascending
  double collation_tolerance = 0.0;
  /// Initial Gibbs mass not represented (states beyond the truncation).
  double tail_probability = 0.0;
  bool tail_warning = false;

  double total() const;
  double moment(int order) const;
};

/// Two-point-measurement distribution for a sideband quench, from the analytic
/// block eigenpairs. Work values within 1e-9 * max|E| are merged.
WorkPMF work_pmf_sideband(const ReducedParams& rp, int n_trunc);

}  // namespace ionlag
