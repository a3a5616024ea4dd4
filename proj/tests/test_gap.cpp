#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pgcut/envelope.hpp"
#include "pgcut/gap.hpp"
#include "pgcut/gpb_oracle.hpp"
#include "pgcut/quadrature.hpp"
#include "pgcut/rng.hpp"
#include "test_util.hpp"

using namespace pgcut;
namespace tu = pgcut::testutil;

namespace {

const OmegaSpec kPlain{OmegaKind::plain, 1.0};
const OmegaSpec kLinear{OmegaKind::power, 1.0};
const OmegaSpec kBernoulli{OmegaKind::bernoulli_variance, 1.0};

// Quadrature oracle for the closed-form gap kernels:
// int_0^1 t^{q-1} (1 - a + a t^b)^m (1 - t^b)^2 t^{-s*b} dt, s in {0, 2}.
double kernel_quadrature(double q, double beta, double abar, int m, double shift) {
  return integrate_adaptive(
             [&](double t) {
               const double tb = std::pow(t, beta);
               const double base = 1.0 - abar + abar * tb;
               const double one_minus = 1.0 - tb;
               return std::pow(t, q - 1.0) * std::pow(base, m) * one_minus * one_minus *
                      std::pow(t, -shift * beta);
             },
             1e-12, 1.0, 1e-11)
      .value;
}

double direct_loop_var(const std::vector<double>& a, const OmegaSpec& omega, double* mu_out) {
  double big = 0.0, num = 0.0;
  for (double x : a) {
    big += omega.weight(x);
    num += omega.weight(x) * x;
  }
  if (big == 0.0) {
    if (mu_out) *mu_out = 0.0;
    return 0.0;
  }
  const double mu = num / big;
  double var = 0.0;
  for (double x : a) var += omega.weight(x) * (x - mu) * (x - mu);
  if (mu_out) *mu_out = mu;
  return var / big;
}

}  // namespace

TEST_CASE("weighted_stats: conventions and a hand-checked instance") {
  const std::vector<double> zeros = {0.0, 0.0, 0.0};
  for (const OmegaSpec& omega : {kLinear, kBernoulli}) {
    const ZeroAwareStats s = weighted_stats(zeros, omega);
    CHECK(s.Omega == 0.0);
    CHECK(s.mu == 0.0);
    CHECK(s.var == 0.0);
  }

  // binary alphas with omega = x(1-x): the weight vanishes everywhere
  const std::vector<double> binary = {0.0, 1.0, 1.0, 0.0};
  const ZeroAwareStats sb = weighted_stats(binary, kBernoulli);
  CHECK(sb.Omega == 0.0);
  CHECK(sb.var == 0.0);

  const std::vector<double> pair = {0.2, 0.8};
  const ZeroAwareStats sp = weighted_stats(pair, kLinear);
  CHECK(sp.Omega == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sp.mu == doctest::Approx(0.68).epsilon(1e-15));
  CHECK(sp.var == doctest::Approx(0.0576).epsilon(1e-13));

  // direct-loop cross-check over random draws and omega choices
  SplitMix64 rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(1 + rng.next_below(10));
    for (double& x : a) x = rng.next_unit();
    for (const OmegaSpec& omega : {kPlain, kLinear, kBernoulli, OmegaSpec{OmegaKind::power, 1.7}}) {
      double mu = 0.0;
      const double var = direct_loop_var(a, omega, &mu);
      const ZeroAwareStats s = weighted_stats(a, omega);
      CHECK(tu::close_rel(s.mu, mu, 1e-12));
      CHECK(std::abs(s.var - var) < 1e-13);
    }
  }
  CHECK_THROWS_AS(weighted_stats(pair, OmegaSpec{OmegaKind::power, 2.5}), std::invalid_argument);
}

TEST_CASE("weighted_stats_grad: trivial zeros and finite differences") {
  const std::vector<double> flat = {0.5, 0.5, 0.5};
  const WeightedStatsGrad g0 = weighted_stats_grad(flat, kLinear, 1);
  CHECK(g0.dvar == doctest::Approx(0.0).epsilon(1e-15));

  const std::vector<double> single = {0.37};
  CHECK(weighted_stats_grad(single, kLinear, 0).dvar == doctest::Approx(0.0));

  const std::vector<double> binary = {0.0, 1.0};
  CHECK_THROWS_AS(weighted_stats_grad(binary, kBernoulli, 0), std::domain_error);
  CHECK_THROWS_AS(weighted_stats_grad(flat, kLinear, 7), std::invalid_argument);

  SplitMix64 rng(13);
  for (int t = 0; t < 60; ++t) {
    std::vector<double> a(2 + rng.next_below(8));
    for (double& x : a) x = 0.05 + 0.9 * rng.next_unit();
    for (const OmegaSpec& omega : {kPlain, kLinear, kBernoulli, OmegaSpec{OmegaKind::power, 1.5}}) {
      const int i = static_cast<int>(rng.next_below(a.size()));
      const WeightedStatsGrad g = weighted_stats_grad(a, omega, i);
      auto mu_of = [&](double x) {
        std::vector<double> b = a;
        b[i] = x;
        return weighted_stats(b, omega).mu;
      };
      auto var_of = [&](double x) {
        std::vector<double> b = a;
        b[i] = x;
        return weighted_stats(b, omega).var;
      };
      CHECK(tu::rel_err(g.dmu, tu::central_diff(mu_of, a[i], 1e-6), 1e-9) < 1e-7);
      CHECK(tu::rel_err(g.dvar, tu::central_diff(var_of, a[i], 1e-6), 1e-9) < 1e-7);
    }
  }
}

TEST_CASE("amgm_gap_bounds_quadrature: equality and sandwich") {
  const std::vector<double> flat = {0.4, 0.4, 0.4};
  const auto [lo0, hi0] = amgm_gap_bounds_quadrature(2.0, flat, 1.0, 1e-10);
  CHECK(std::abs(lo0) < 1e-10);
  CHECK(std::abs(hi0) < 1e-10);

  // pinned instance: gap H - I = 0.5833... - 0.5533... = 0.03
  const std::vector<double> pair = {0.2, 0.8};
  const auto [lo, hi] = amgm_gap_bounds_quadrature(1.0, pair, 1.0, 1e-10);
  const double gap = 0.03;
  CHECK(lo <= gap + 1e-9);
  CHECK(hi >= gap - 1e-9);
  CHECK(lo > 0.0);

  const std::vector<double> p2 = {0.3, 0.7};
  const auto [lo2, hi2] = amgm_gap_bounds_quadrature(3.0, p2, 1.0, 1e-10);
  GPBInstance inst{3.0, p2, {1.0, 1.0}};
  const double gap2 = h_envelope(3.0, 1.0, 0.5, 2) - expected_reciprocal_exact(inst).value;
  CHECK(lo2 < gap2);
  CHECK(gap2 < hi2);

  // random sandwich
  SplitMix64 rng(17);
  for (int t = 0; t < 150; ++t) {
    const int m = 1 + static_cast<int>(rng.next_below(10));
    const double q = 0.25 + 8.0 * rng.next_unit();
    const double beta = 0.2 + 3.0 * rng.next_unit();
    std::vector<double> a(m);
    double mean = 0.0;
    for (double& x : a) {
      x = rng.next_unit();
      mean += x;
    }
    mean /= m;
    GPBInstance gi{q, a, std::vector<double>(m, beta)};
    const double g = h_envelope(q, beta, mean, m) - expected_reciprocal_exact(gi).value;
    const auto [l, h] = amgm_gap_bounds_quadrature(q, a, beta, 1e-10);
    CHECK(l - 1e-9 <= g);
    CHECK(g <= h + 1e-9);
  }
}

TEST_CASE("second_diff_backward: pinned values, quadrature oracle, domain") {
  // abar = 0 collapses each envelope to 1/(q - r beta)
  CHECK(tu::close_rel(second_diff_backward(3.0, 1.0, 0.0, 5), 1.0 - 1.0 + 1.0 / 3.0, 1e-13));
  // m = 1, abar = 1: int t (1-t)^2 dt = 1/12
  CHECK(tu::close_rel(second_diff_backward(3.0, 1.0, 1.0, 1), 1.0 / 12.0, 1e-12));
  // quadrature agreement at fractional beta
  CHECK(std::abs(second_diff_backward(2.0, 0.5, 0.5, 4) - kernel_quadrature(2.0, 0.5, 0.5, 4, 2.0)) <
        1e-9);
  CHECK_THROWS_AS(second_diff_backward(2.0, 1.0, 0.5, 3), std::domain_error);
  CHECK_THROWS_AS(second_diff_backward(1.0, 0.5, 0.5, 3), std::domain_error);
}

TEST_CASE("second_diff_forward: pinned values, quadrature oracle, nonnegativity") {
  const double q = 1.7, beta = 0.9;
  CHECK(tu::close_rel(second_diff_forward(q, beta, 0.0, 4),
                      1.0 / q - 2.0 / (q + beta) + 1.0 / (q + 2.0 * beta), 1e-13));
  CHECK(tu::close_rel(second_diff_forward(1.0, 1.0, 1.0, 1), 1.0 / 12.0, 1e-12));
  CHECK(std::abs(second_diff_forward(2.0, 1.0, 0.5, 3) - kernel_quadrature(2.0, 1.0, 0.5, 3, 0.0)) <
        1e-10);
  SplitMix64 rng(23);
  for (int t = 0; t < 100; ++t) {
    const double qq = 0.2 + 6.0 * rng.next_unit();
    const double bb = 0.2 + 3.0 * rng.next_unit();
    CHECK(second_diff_forward(qq, bb, rng.next_unit(), 1 + static_cast<int>(rng.next_below(12))) >=
          0.0);
  }
}

TEST_CASE("a_tilde: hand value and finite differences of the forward kernel") {
  CHECK(a_tilde(4.0, 1.0, 0.3, 0) == 0.0);
  CHECK(tu::close_rel(a_tilde(3.0, 1.0, 0.0, 1), -1.0 / 60.0, 1e-12));

  for (double q : {0.5, 1.0, 2.0, 5.0}) {
    for (double beta : {0.5, 1.0, 2.0}) {
      for (int m : {1, 3, 8}) {
        for (double abar : {0.0, 0.2, 0.6, 1.0}) {
          auto f = [&](double x) { return second_diff_forward(q, beta, x, m); };
          const double h = abar == 0.0 || abar == 1.0 ? 1e-7 : 1e-6;
          const double fd = (f(std::min(1.0, abar + h)) - f(std::max(0.0, abar - h))) /
                            (std::min(1.0, abar + h) - std::max(0.0, abar - h));
          CHECK(tu::rel_err(a_tilde(q, beta, abar, m), fd, 1e-10) < 1e-5);
        }
      }
    }
  }
}

TEST_CASE("zero_aware_penalty: pinned composition and trivial zeros") {
  // binary alphas with the Bernoulli weight: zero dispersion, certified kernel
  const std::vector<double> binary = {0.0, 1.0, 1.0};
  const GapCoefficient gb = zero_aware_penalty(5.0, binary, 1.0, 3, kBernoulli);
  CHECK(gb.value == 0.0);
  CHECK(gb.certified_upper);
  CHECK(gb.kind == GapKernelKind::backward_diff);

  const std::vector<double> flat = {0.6, 0.6, 0.6, 0.6};
  CHECK(zero_aware_penalty(1.0, flat, 1.0, 4, kLinear).value == 0.0);

  // (m/2) * Var_omega * backward kernel at the mean Sum(alpha)/m
  const std::vector<double> pair = {0.2, 0.8};
  const GapCoefficient gp = zero_aware_penalty(5.0, pair, 1.0, 2, kLinear);
  const double want = 1.0 * 0.0576 * second_diff_backward(5.0, 1.0, 0.5, 2);
  CHECK(tu::close_rel(gp.value, want, 1e-12));
  CHECK(gp.certified_upper);
  GPBInstance inst{5.0, pair, {1.0, 1.0}};
  const double gap = h_envelope(5.0, 1.0, 0.5, 2) - expected_reciprocal_exact(inst).value;
  CHECK(gap <= gp.value + 1e-12);

  // q <= 2 beta downgrades to the forward kernel, uncertified
  const GapCoefficient gf = zero_aware_penalty(1.0, pair, 1.0, 2, kLinear);
  CHECK(gf.kind == GapKernelKind::forward_diff);
  CHECK_FALSE(gf.certified_upper);
  CHECK(gf.value >= 0.0);
}

TEST_CASE("certified penalty dominates the gap for q > 2 beta") {
  SplitMix64 rng(29);
  for (int t = 0; t < 150; ++t) {
    const int m = 1 + static_cast<int>(rng.next_below(10));
    const double beta = 0.2 + 1.5 * rng.next_unit();
    const double q = 2.0 * beta + 0.1 + 5.0 * rng.next_unit();
    std::vector<double> a(m);
    double mean = 0.0;
    for (double& x : a) {
      x = rng.next_unit();
      mean += x;
    }
    mean /= m;
    GPBInstance gi{q, a, std::vector<double>(m, beta)};
    const double gap = h_envelope(q, beta, mean, m) - expected_reciprocal_exact(gi).value;
    const GapCoefficient pen = zero_aware_penalty(q, a, beta, m, kPlain);
    CHECK(pen.certified_upper);
    CHECK(gap <= pen.value + 1e-12);
  }
}

TEST_CASE("zero-awareness: padding is inert, plain variance is not") {
  SplitMix64 rng(37);
  for (int t = 0; t < 40; ++t) {
    const int m = 2 + static_cast<int>(rng.next_below(8));
    const double beta = 0.3 + 1.5 * rng.next_unit();
    const double q = rng.next_unit() < 0.5 ? 2.0 * beta + 1.0 : 0.5 * beta;
    std::vector<double> a(m);
    for (double& x : a) x = 0.1 + 0.8 * rng.next_unit();
    std::vector<double> padded = a;
    padded.insert(padded.end(), 10, 0.0);

    for (const OmegaSpec& omega : {kLinear, kBernoulli}) {
      const GapCoefficient base = zero_aware_penalty(q, a, beta, m, omega);
      const GapCoefficient same = zero_aware_penalty(q, padded, beta, m, omega);
      // inert up to summation-order rounding in the kernels
      CHECK(std::abs(base.value - same.value) < 1e-13 * std::max(1.0, std::abs(base.value)));
    }

    // the plain-variance coefficient grows strictly under padding
    const double plain_before = zero_aware_penalty(q, a, beta, m, kPlain).value;
    const double plain_after = zero_aware_penalty(q, padded, beta, m + 10, kPlain).value;
    if (weighted_stats(a, kPlain).var > 1e-6) {
      CHECK(plain_after > plain_before);
    }
  }
}

TEST_CASE("penalty vanishes under hardening") {
  // alphas = sigmoid(z / tau) sharpen toward {0,1} as tau drops; the penalty
  // is eventually nonincreasing and collapses to zero
  const std::vector<double> z = {-2.0, -0.5, 0.7, 1.5, 2.5};
  std::vector<double> values;
  for (double tau : {1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.01}) {
    std::vector<double> a(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) a[i] = 1.0 / (1.0 + std::exp(-z[i] / tau));
    values.push_back(zero_aware_penalty(1.0, a, 1.0, static_cast<int>(a.size()), kBernoulli).value);
    CHECK(values.back() >= 0.0);
  }
  for (std::size_t i = values.size() - 3; i + 1 < values.size(); ++i) {
    CHECK(values[i + 1] <= values[i] + 1e-15);
  }
  CHECK(values.back() < 1e-8);
}
