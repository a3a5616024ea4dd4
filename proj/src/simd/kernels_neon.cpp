#include <arm_neon.h>

#include <cstddef>
#include <span>

// NEON kernels, 2 doubles per vector. Tails fall back to scalar.
namespace pgcut::simd::detail {

double sum_neon(std::span<const double> x) {
  const std::size_t n = x.size();
  const double* p = x.data();
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(p + i));
  double out = vaddvq_f64(acc);
  for (; i < n; ++i) out += p[i];
  return out;
}

double dot_neon(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const double* pa = a.data();
  const double* pb = b.data();
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(pa + i), vld1q_f64(pb + i));
  double out = vaddvq_f64(acc);
  for (; i < n; ++i) out += pa[i] * pb[i];
  return out;
}

double sq_dev_neon(std::span<const double> x, double mu) {
  const std::size_t n = x.size();
  const double* p = x.data();
  const float64x2_t vmu = vdupq_n_f64(mu);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(p + i), vmu);
    acc = vfmaq_f64(acc, d, d);
  }
  double out = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = p[i] - mu;
    out += d * d;
  }
  return out;
}

double weighted_sq_dev_neon(std::span<const double> w, std::span<const double> x, double mu) {
  const std::size_t n = x.size();
  const double* pw = w.data();
  const double* px = x.data();
  const float64x2_t vmu = vdupq_n_f64(mu);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(px + i), vmu);
    acc = vfmaq_f64(acc, vmulq_f64(vld1q_f64(pw + i), d), d);
  }
  double out = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = px[i] - mu;
    out += pw[i] * d * d;
  }
  return out;
}

double product_affine_neon(std::span<const double> alpha, std::span<const double> u) {
  const std::size_t n = alpha.size();
  const double* pa = alpha.data();
  const double* pu = u.data();
  const float64x2_t one = vdupq_n_f64(1.0);
  float64x2_t acc = one;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t a = vld1q_f64(pa + i);
    const float64x2_t f = vfmaq_f64(vsubq_f64(one, a), a, vld1q_f64(pu + i));
    acc = vmulq_f64(acc, f);
  }
  double out = vgetq_lane_f64(acc, 0) * vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) out *= 1.0 - pa[i] + pa[i] * pu[i];
  return out;
}

}  // namespace pgcut::simd::detail
