#pragma once

// Special functions and summation primitives used by the partition sums:
// associated Laguerre polynomials, the sideband coupling f_n^m in log form,
// log-cosh, log-sum-exp and cancellation-free square-root differences.

#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ionlag/kernels.hpp"

namespace ionlag {

/// L_n^m(x) by forward three-term recurrence. Throws RangeError on overflow.
double laguerre_assoc(int n, int m, double x);

/// Sign and natural log of |L_n^m(x)|, with exponent tracking (never overflows).
/// log_abs is -inf when the value is exactly zero.
struct SignedLog {
  int sign = 1;
  double log_abs = 0.0;
};
SignedLog laguerre_assoc_log(int n, int m, double x);

/// f_n^m = (i eta)^m sqrt(n!/(n+m)!) exp(-eta^2/2) L_n^m(eta^2), kept as
/// i^phase * sign * exp(log_mag).
struct CouplingValue {
  int phase = 0;  // power of i, mod 4
  int sign = 1;   // sign of the Laguerre factor
  double log_mag = 0.0;

  bool is_zero() const { return log_mag == -std::numeric_limits<double>::infinity(); }
  double magnitude() const;
  std::complex<double> value() const;
};

CouplingValue coupling_f(int n, int m, double eta);

/// Produces f_n^m for n = 0, 1, 2, ... for up to kernels::kLanes independent
/// (m, eta) pairs, sharing one SIMD Laguerre recurrence.
class CouplingStream {
 public:
  struct Lane {
    int m = 0;
    double eta = 0.0;
  };

  explicit CouplingStream(std::span<const Lane> lanes);
  explicit CouplingStream(Lane lane) : CouplingStream(std::span<const Lane>(&lane, 1)) {}

  std::size_t lanes() const { return lanes_.size(); }
  /// Index n of the next coupling to be produced.
  std::size_t position() const { return position_; }

  /// Appends the next `count` couplings of each lane to out[lane].
  void next(std::size_t count, std::span<std::vector<CouplingValue>> out);
  /// Single-lane convenience.
  std::vector<CouplingValue> next(std::size_t count);

 private:
  std::vector<Lane> lanes_;
  kernels::LaguerreState state_;
  std::size_t position_ = 0;
  std::vector<double> mant_, scale_;
};

/// ln cosh(x), exact for all finite x.
double lncosh(double x);

/// ln(sum exp(t_i)) by max shift; -inf for empty or all -inf input. Summation
/// runs in ascending index order. Throws RangeError if any term is +inf or NaN.
double log_sum_exp(std::span<const double> terms);

/// Streaming counterpart of log_sum_exp with the same conventions.
class LogSumExp {
 public:
  void add(double t);
  double value() const;
  double max() const { return max_; }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

/// sqrt(w^2 + u^2) - |w|, without cancellation.
double sqrt_excess(double w, double u);

/// sqrt(wL^2 + u^2) - w0, evaluated as (|wL| - w0) + sqrt_excess(wL, u). Exact
/// only when |wL| - w0 itself is exact; callers that know the detuning use it directly.
double sqrt_shift(double wL, double u, double w0);

/// ln(1 + e^x).
double log1p_exp(double x);
/// ln(1 - e^{-x}) for x > 0.
double log1m_exp(double x);
/// ln(e^x - 1) for x > 0.
double log_expm1(double x);

}  // namespace ionlag
