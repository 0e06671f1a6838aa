// AArch64 only; NEON is part of the base ISA there.
#if defined(__aarch64__)
#include <arm_neon.h>

#include "ionlag/kernels.hpp"

namespace ionlag::kernels::neon {

void laguerre_advance(LaguerreState& s, std::size_t count, double* mantissa, double* scale) {
  float64x2_t m[2] = {vld1q_f64(s.m), vld1q_f64(s.m + 2)};
  float64x2_t x[2] = {vld1q_f64(s.x), vld1q_f64(s.x + 2)};
  float64x2_t prev[2] = {vld1q_f64(s.prev), vld1q_f64(s.prev + 2)};
  float64x2_t cur[2] = {vld1q_f64(s.cur), vld1q_f64(s.cur + 2)};
  float64x2_t sc[2] = {vld1q_f64(s.scale), vld1q_f64(s.scale + 2)};

  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t big = vdupq_n_f64(0x1p600);
  const float64x2_t shrink = vdupq_n_f64(0x1p-600);
  const float64x2_t step = vdupq_n_f64(static_cast<double>(kScaleBits));
  const float64x2_t zero = vdupq_n_f64(0.0);

  double k = s.k;
  for (std::size_t i = 0; i < count; ++i) {
    const float64x2_t two_k = vdupq_n_f64(2.0 * k);
    const float64x2_t kk = vdupq_n_f64(k);
    const float64x2_t k1 = vdupq_n_f64(k + 1.0);
    for (int h = 0; h < 2; ++h) {
      vst1q_f64(mantissa + i * kLanes + 2 * h, cur[h]);
      vst1q_f64(scale + i * kLanes + 2 * h, sc[h]);
      const float64x2_t a = vsubq_f64(vaddq_f64(vaddq_f64(two_k, m[h]), one), x[h]);
      const float64x2_t c = vaddq_f64(kk, m[h]);
      float64x2_t next = vdivq_f64(vsubq_f64(vmulq_f64(a, cur[h]), vmulq_f64(c, prev[h])), k1);
      const uint64x2_t is_big = vcgtq_f64(vabsq_f64(next), big);
      const float64x2_t f = vbslq_f64(is_big, shrink, one);
      next = vmulq_f64(next, f);
      prev[h] = vmulq_f64(cur[h], f);
      sc[h] = vaddq_f64(sc[h], vbslq_f64(is_big, step, zero));
      cur[h] = next;
    }
    k += 1.0;
  }
  for (int h = 0; h < 2; ++h) {
    vst1q_f64(s.prev + 2 * h, prev[h]);
    vst1q_f64(s.cur + 2 * h, cur[h]);
    vst1q_f64(s.scale + 2 * h, sc[h]);
  }
  s.k = k;
}

void sqrt_excess(double w, const double* u, double* out, std::size_t n) {
  const float64x2_t w2 = vdupq_n_f64(w * w);
  const float64x2_t wv = vdupq_n_f64(w);
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t uv = vld1q_f64(u + i);
    const float64x2_t u2 = vmulq_f64(uv, uv);
    const float64x2_t r = vdivq_f64(u2, vaddq_f64(vsqrtq_f64(vaddq_f64(w2, u2)), wv));
    vst1q_f64(out + i, vbslq_f64(vceqq_f64(u2, zero), zero, r));
  }
  scalar::sqrt_excess(w, u + i, out + i, n - i);
}

}  // namespace ionlag::kernels::neon
#endif
