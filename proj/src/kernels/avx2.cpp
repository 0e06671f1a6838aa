// Compiled with -mavx2; only reached after a runtime CPU check.
#include <immintrin.h>

#include "ionlag/kernels.hpp"

namespace ionlag::kernels::avx2 {

void laguerre_advance(LaguerreState& s, std::size_t count, double* mantissa, double* scale) {
  const __m256d m = _mm256_load_pd(s.m);
  const __m256d x = _mm256_load_pd(s.x);
  __m256d prev = _mm256_load_pd(s.prev);
  __m256d cur = _mm256_load_pd(s.cur);
  __m256d sc = _mm256_load_pd(s.scale);

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d big = _mm256_set1_pd(0x1p600);
  const __m256d shrink = _mm256_set1_pd(0x1p-600);
  const __m256d step = _mm256_set1_pd(static_cast<double>(kScaleBits));
  const __m256d zero = _mm256_setzero_pd();
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));

  double k = s.k;
  for (std::size_t i = 0; i < count; ++i) {
    _mm256_storeu_pd(mantissa + i * kLanes, cur);
    _mm256_storeu_pd(scale + i * kLanes, sc);

    const __m256d two_k = _mm256_set1_pd(2.0 * k);
    const __m256d kk = _mm256_set1_pd(k);
    const __m256d k1 = _mm256_set1_pd(k + 1.0);

    const __m256d a = _mm256_sub_pd(_mm256_add_pd(_mm256_add_pd(two_k, m), one), x);
    const __m256d c = _mm256_add_pd(kk, m);
    __m256d next = _mm256_div_pd(_mm256_sub_pd(_mm256_mul_pd(a, cur), _mm256_mul_pd(c, prev)), k1);

    const __m256d is_big = _mm256_cmp_pd(_mm256_and_pd(next, abs_mask), big, _CMP_GT_OQ);
    const __m256d f = _mm256_blendv_pd(one, shrink, is_big);
    next = _mm256_mul_pd(next, f);
    prev = _mm256_mul_pd(cur, f);
    sc = _mm256_add_pd(sc, _mm256_blendv_pd(zero, step, is_big));
    cur = next;
    k += 1.0;
  }
  _mm256_store_pd(s.prev, prev);
  _mm256_store_pd(s.cur, cur);
  _mm256_store_pd(s.scale, sc);
  s.k = k;
}

void sqrt_excess(double w, const double* u, double* out, std::size_t n) {
  const double w2s = w * w;
  const __m256d w2 = _mm256_set1_pd(w2s);
  const __m256d wv = _mm256_set1_pd(w);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d uv = _mm256_loadu_pd(u + i);
    const __m256d u2 = _mm256_mul_pd(uv, uv);
    const __m256d r = _mm256_div_pd(u2, _mm256_add_pd(_mm256_sqrt_pd(_mm256_add_pd(w2, u2)), wv));
    const __m256d is_zero = _mm256_cmp_pd(u2, zero, _CMP_EQ_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(r, zero, is_zero));
  }
  scalar::sqrt_excess(w, u + i, out + i, n - i);
}

}  // namespace ionlag::kernels::avx2
