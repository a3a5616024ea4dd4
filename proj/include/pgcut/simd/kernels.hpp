#pragma once

#include <cstddef>
#include <span>

// Data-parallel reduction kernels over vertex/coordinate arrays. A scalar
// reference implementation always exists; AVX2 (x86-64) and NEON (aarch64)
// variants are selected at runtime from CPU features. The PGCUT_SIMD
// environment variable ("scalar", "avx2", "neon") overrides detection.
// SIMD results may differ from scalar by reassociation only; equivalence
// is tested to tight relative tolerance.
namespace pgcut::simd {

enum class Isa { scalar, avx2, neon };

const char* isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
// Selects the given instruction set for all kernels. Throws
// std::invalid_argument if unsupported on this machine. Not thread-safe;
// intended for tests and startup configuration.
void force_isa(Isa isa);

// sum of x
double sum(std::span<const double> x);
// dot product <a, b>; sizes must match
double dot(std::span<const double> a, std::span<const double> b);
// sum of (x_i - mu)^2
double sq_dev(std::span<const double> x, double mu);
// sum of w_i * (x_i - mu)^2
double weighted_sq_dev(std::span<const double> w, std::span<const double> x, double mu);
// product of (1 - a_i + a_i * u_i); the probability-generating-function
// inner loop with u_i = t^{beta_i} precomputed
double product_affine(std::span<const double> alpha, std::span<const double> u);

}  // namespace pgcut::simd
