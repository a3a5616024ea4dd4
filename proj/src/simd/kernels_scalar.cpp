#include <cstddef>
#include <span>

// Scalar reference kernels. These define the semantics the SIMD variants
// are tested against.
namespace pgcut::simd::detail {

double sum_scalar(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

double dot_scalar(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sq_dev_scalar(std::span<const double> x, double mu) {
  double acc = 0.0;
  for (double v : x) {
    const double d = v - mu;
    acc += d * d;
  }
  return acc;
}

double weighted_sq_dev_scalar(std::span<const double> w, std::span<const double> x, double mu) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mu;
    acc += w[i] * d * d;
  }
  return acc;
}

double product_affine_scalar(std::span<const double> alpha, std::span<const double> u) {
  double acc = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    acc *= 1.0 - alpha[i] + alpha[i] * u[i];
  }
  return acc;
}

}  // namespace pgcut::simd::detail
