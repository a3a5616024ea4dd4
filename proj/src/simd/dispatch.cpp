#include "pgcut/simd/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace pgcut::simd {

namespace detail {
double sum_scalar(std::span<const double>);
double dot_scalar(std::span<const double>, std::span<const double>);
double sq_dev_scalar(std::span<const double>, double);
double weighted_sq_dev_scalar(std::span<const double>, std::span<const double>, double);
double product_affine_scalar(std::span<const double>, std::span<const double>);

#ifdef PGCUT_HAVE_AVX2_KERNELS
double sum_avx2(std::span<const double>);
double dot_avx2(std::span<const double>, std::span<const double>);
double sq_dev_avx2(std::span<const double>, double);
double weighted_sq_dev_avx2(std::span<const double>, std::span<const double>, double);
double product_affine_avx2(std::span<const double>, std::span<const double>);
#endif

#ifdef PGCUT_HAVE_NEON_KERNELS
double sum_neon(std::span<const double>);
double dot_neon(std::span<const double>, std::span<const double>);
double sq_dev_neon(std::span<const double>, double);
double weighted_sq_dev_neon(std::span<const double>, std::span<const double>, double);
double product_affine_neon(std::span<const double>, std::span<const double>);
#endif
}  // namespace detail

namespace {

struct KernelTable {
  double (*sum)(std::span<const double>);
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*sq_dev)(std::span<const double>, double);
  double (*weighted_sq_dev)(std::span<const double>, std::span<const double>, double);
  double (*product_affine)(std::span<const double>, std::span<const double>);
};

constexpr KernelTable kScalarTable = {
    detail::sum_scalar, detail::dot_scalar, detail::sq_dev_scalar,
    detail::weighted_sq_dev_scalar, detail::product_affine_scalar};

#ifdef PGCUT_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2Table = {
    detail::sum_avx2, detail::dot_avx2, detail::sq_dev_avx2,
    detail::weighted_sq_dev_avx2, detail::product_affine_avx2};
#endif

#ifdef PGCUT_HAVE_NEON_KERNELS
constexpr KernelTable kNeonTable = {
    detail::sum_neon, detail::dot_neon, detail::sq_dev_neon,
    detail::weighted_sq_dev_neon, detail::product_affine_neon};
#endif

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &kScalarTable;
    case Isa::avx2:
#ifdef PGCUT_HAVE_AVX2_KERNELS
      return &kAvx2Table;
#else
      return nullptr;
#endif
    case Isa::neon:
#ifdef PGCUT_HAVE_NEON_KERNELS
      return &kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(PGCUT_HAVE_AVX2_KERNELS) && (defined(__x86_64__) || defined(_M_X64))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#ifdef PGCUT_HAVE_NEON_KERNELS
      return true;  // NEON is baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

Isa detect() {
  if (const char* env = std::getenv("PGCUT_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_supports(Isa::avx2)) return Isa::avx2;
    if (std::strcmp(env, "neon") == 0 && cpu_supports(Isa::neon)) return Isa::neon;
    return Isa::scalar;
  }
  if (cpu_supports(Isa::avx2)) return Isa::avx2;
  if (cpu_supports(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

struct Dispatch {
  Isa isa;
  const KernelTable* table;
  Dispatch() : isa(detect()), table(table_for(isa)) {}
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "?";
}

bool isa_supported(Isa isa) { return cpu_supports(isa) && table_for(isa) != nullptr; }

Isa active_isa() { return dispatch().isa; }

void force_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument(std::string("simd: instruction set not available: ") + isa_name(isa));
  }
  dispatch().isa = isa;
  dispatch().table = table_for(isa);
}

double sum(std::span<const double> x) { return dispatch().table->sum(x); }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("simd::dot: size mismatch");
  return dispatch().table->dot(a, b);
}

double sq_dev(std::span<const double> x, double mu) { return dispatch().table->sq_dev(x, mu); }

double weighted_sq_dev(std::span<const double> w, std::span<const double> x, double mu) {
  if (w.size() != x.size()) throw std::invalid_argument("simd::weighted_sq_dev: size mismatch");
  return dispatch().table->weighted_sq_dev(w, x, mu);
}

double product_affine(std::span<const double> alpha, std::span<const double> u) {
  if (alpha.size() != u.size()) throw std::invalid_argument("simd::product_affine: size mismatch");
  return dispatch().table->product_affine(alpha, u);
}

}  // namespace pgcut::simd
