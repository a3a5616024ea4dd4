#include <immintrin.h>

#include <cstddef>
#include <span>

// AVX2 + FMA kernels, 4 doubles per lane group. Tails fall back to scalar.
namespace pgcut::simd::detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hprod(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d p = _mm_mul_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_mul_sd(p, _mm_unpackhi_pd(p, p)));
}

}  // namespace

double sum_avx2(std::span<const double> x) {
  const std::size_t n = x.size();
  const double* p = x.data();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(p + i));
  double out = hsum(acc);
  for (; i < n; ++i) out += p[i];
  return out;
}

double dot_avx2(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const double* pa = a.data();
  const double* pb = b.data();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc);
  }
  double out = hsum(acc);
  for (; i < n; ++i) out += pa[i] * pb[i];
  return out;
}

double sq_dev_avx2(std::span<const double> x, double mu) {
  const std::size_t n = x.size();
  const double* p = x.data();
  const __m256d vmu = _mm256_set1_pd(mu);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(p + i), vmu);
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double out = hsum(acc);
  for (; i < n; ++i) {
    const double d = p[i] - mu;
    out += d * d;
  }
  return out;
}

double weighted_sq_dev_avx2(std::span<const double> w, std::span<const double> x, double mu) {
  const std::size_t n = x.size();
  const double* pw = w.data();
  const double* px = x.data();
  const __m256d vmu = _mm256_set1_pd(mu);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(px + i), vmu);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(pw + i), d), d, acc);
  }
  double out = hsum(acc);
  for (; i < n; ++i) {
    const double d = px[i] - mu;
    out += pw[i] * d * d;
  }
  return out;
}

double product_affine_avx2(std::span<const double> alpha, std::span<const double> u) {
  const std::size_t n = alpha.size();
  const double* pa = alpha.data();
  const double* pu = u.data();
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = one;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(pa + i);
    // 1 - a + a*u == fma(a, u, 1 - a)
    const __m256d f = _mm256_fmadd_pd(a, _mm256_loadu_pd(pu + i), _mm256_sub_pd(one, a));
    acc = _mm256_mul_pd(acc, f);
  }
  double out = hprod(acc);
  for (; i < n; ++i) out *= 1.0 - pa[i] + pa[i] * pu[i];
  return out;
}

}  // namespace pgcut::simd::detail
