#pragma once

// Data-parallel inner loops with a scalar reference implementation and
// runtime-selected SIMD variants. Every variant performs the same IEEE
// operations in the same order (no FMA contraction), so all of them are
// bit-identical to the scalar reference; the equivalence tests rely on that.

#include <cstddef>
#include <span>
#include <string_view>

namespace ionlag::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);
bool available(Isa isa);
/// Best ISA supported by the running CPU.
Isa detect();
/// ISA used by the dispatching entry points below. Defaults to detect().
Isa active();
/// Overrides dispatch (tests and benchmarks). Throws if unavailable.
void set_active(Isa isa);

inline constexpr int kLanes = 4;
/// Rescale threshold and step for the Laguerre recurrence (powers of two).
inline constexpr int kScaleBits = 600;

/// Lockstep state of up to kLanes associated-Laguerre recurrences
/// L_{k+1}^m(x) = ((2k+m+1-x) L_k^m(x) - (k+m) L_{k-1}^m(x)) / (k+1).
/// Each lane carries its own (m, x). Values are stored as mantissa * 2^scale,
/// where scale is a multiple of kScaleBits. Unused lanes are inert.
struct LaguerreState {
  alignas(32) double m[kLanes] = {0, 0, 0, 0};
  alignas(32) double x[kLanes] = {0, 0, 0, 0};
  alignas(32) double prev[kLanes] = {0, 0, 0, 0};
  alignas(32) double cur[kLanes] = {1, 1, 1, 1};
  alignas(32) double scale[kLanes] = {0, 0, 0, 0};
  double k = 0;  // index of cur
};

/// Emits L_k .. L_{k+count-1} for every lane and advances the state by count.
/// Output is interleaved: mantissa[i*kLanes + lane], scale[i*kLanes + lane].
using LaguerreAdvanceFn = void (*)(LaguerreState&, std::size_t count, double* mantissa, double* scale);

/// out[i] = u[i]^2 / (sqrt(w^2 + u[i]^2) + w), i.e. sqrt(w^2+u^2) - w without cancellation. w >= 0.
using SqrtExcessFn = void (*)(double w, const double* u, double* out, std::size_t n);

namespace scalar {
void laguerre_advance(LaguerreState& s, std::size_t count, double* mantissa, double* scale);
void sqrt_excess(double w, const double* u, double* out, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void laguerre_advance(LaguerreState& s, std::size_t count, double* mantissa, double* scale);
void sqrt_excess(double w, const double* u, double* out, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
void laguerre_advance(LaguerreState& s, std::size_t count, double* mantissa, double* scale);
void sqrt_excess(double w, const double* u, double* out, std::size_t n);
}  // namespace neon
#endif

// Dispatching entry points.
void laguerre_advance(LaguerreState& s, std::size_t count, double* mantissa, double* scale);
void sqrt_excess(double w, std::span<const double> u, std::span<double> out);

}  // namespace ionlag::kernels
