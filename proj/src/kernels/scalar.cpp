#include <cmath>

#include "ionlag/kernels.hpp"

namespace ionlag::kernels::scalar {

void laguerre_advance(LaguerreState& s, std::size_t count, double* mantissa, double* scale) {
  constexpr double kBig = 0x1p600;
  constexpr double kShrink = 0x1p-600;
  double k = s.k;
  for (std::size_t i = 0; i < count; ++i) {
    const double two_k = 2.0 * k;
    const double k1 = k + 1.0;
    for (int l = 0; l < kLanes; ++l) {
      mantissa[i * kLanes + l] = s.cur[l];
      scale[i * kLanes + l] = s.scale[l];
      const double a = ((two_k + s.m[l]) + 1.0) - s.x[l];
      const double c = k + s.m[l];
      double next = (a * s.cur[l] - c * s.prev[l]) / k1;
      double cur = s.cur[l];
      const bool big = std::fabs(next) > kBig;
      const double f = big ? kShrink : 1.0;
      next *= f;
      cur *= f;
      s.scale[l] += big ? static_cast<double>(kScaleBits) : 0.0;
      s.prev[l] = cur;
      s.cur[l] = next;
    }
    k = k1;
  }
  s.k = k;
}

void sqrt_excess(double w, const double* u, double* out, std::size_t n) {
  const double w2 = w * w;
  for (std::size_t i = 0; i < n; ++i) {
    const double u2 = u[i] * u[i];
    out[i] = u2 == 0.0 ? 0.0 : u2 / (std::sqrt(w2 + u2) + w);
  }
}

}  // namespace ionlag::kernels::scalar
