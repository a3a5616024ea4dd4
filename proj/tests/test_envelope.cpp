#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pgcut/envelope.hpp"
#include "pgcut/gpb_oracle.hpp"
#include "pgcut/rng.hpp"
#include "test_util.hpp"

using namespace pgcut;
namespace tu = pgcut::testutil;

namespace {

GPBInstance random_common_beta(SplitMix64& rng, int max_m) {
  GPBInstance inst;
  const int m = 1 + static_cast<int>(rng.next_below(max_m));
  inst.q = 0.25 + 9.75 * rng.next_unit();
  const double beta = 0.1 + 4.9 * rng.next_unit();
  inst.alphas.resize(m);
  inst.betas.assign(m, beta);
  for (double& a : inst.alphas) a = rng.next_unit();
  return inst;
}

double plain_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

}  // namespace

TEST_CASE("h_envelope: pinned values against oracles") {
  // 2F1 at z = 0 is 1, so the envelope is 1/q
  CHECK(h_envelope(4.0, 2.3, 0.0, 7) == doctest::Approx(0.25).epsilon(1e-15));

  // all alphas equal: envelope equals the exact expectation (enumeration)
  GPBInstance ones{1.0, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
  CHECK(tu::close_rel(h_envelope(1.0, 1.0, 1.0, 3), 0.25, 1e-14));
  CHECK(tu::close_rel(h_envelope(1.0, 1.0, 1.0, 3), expected_reciprocal_exact(ones).value, 1e-13));

  GPBInstance mixed{1.0, {0.2, 0.8}, {1.0, 1.0}};
  const double h = h_envelope(1.0, 1.0, 0.5, 2);
  CHECK(tu::close_rel(h, 1.0 - 0.5 + 1.0 / 12.0, 1e-14));
  CHECK(h >= expected_reciprocal_exact(mixed).value);
}

TEST_CASE("h_envelope_grad: closed forms and finite differences") {
  // F2(0) = 1 gives -m beta / (q (q + beta))
  const double q = 2.0, beta = 0.5;
  const int m = 4;
  CHECK(tu::close_rel(h_envelope_grad(q, beta, 0.0, m), -m * beta / (q * (q + beta)), 1e-14));
  CHECK(h_envelope_grad(1.0, 1.0, 0.7, 0) == 0.0);

  auto f = [](double a) { return h_envelope(1.0, 1.0, a, 5); };
  const double fd = tu::central_diff(f, 0.4, 1e-5);
  CHECK(tu::rel_err(h_envelope_grad(1.0, 1.0, 0.4, 5), fd) < 1e-7);

  SplitMix64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const double qq = 0.3 + 5.0 * rng.next_unit();
    const double bb = 0.2 + 3.0 * rng.next_unit();
    const int mm = 1 + static_cast<int>(rng.next_below(20));
    const double a = 0.05 + 0.9 * rng.next_unit();
    const double g = h_envelope_grad(qq, bb, a, mm);
    CHECK(g <= 0.0);
    auto fq = [&](double x) { return h_envelope(qq, bb, x, mm); };
    CHECK(tu::rel_err(g, tu::central_diff(fq, a, 1e-6), 1e-12) < 1e-6);
  }
}

TEST_CASE("make_bins: strategies, representatives, errors") {
  const std::vector<double> same = {2.0, 2.0, 2.0};
  const BinPartition one = make_bins(same, 1, BinStrategy::distinct_values);
  CHECK(one.bin_count() == 1);
  CHECK(one.representatives[0] == 2.0);

  const std::vector<double> two = {1.0, 1.0, 2.0, 2.0};
  const BinPartition dv = make_bins(two, 2, BinStrategy::distinct_values);
  CHECK(dv.bin_count() == 2);
  CHECK(dv.sizes == std::vector<int>{2, 2});
  CHECK(dv.representatives == std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(make_bins(two, 3, BinStrategy::distinct_values), std::invalid_argument);

  SplitMix64 rng(9);
  std::vector<double> uniform(31);
  for (double& b : uniform) b = 1.0 + 9.0 * rng.next_unit();
  const BinPartition ec = make_bins(uniform, 3, BinStrategy::equal_count);
  CHECK(ec.bin_count() == 3);
  int total = 0;
  for (int j = 0; j < ec.bin_count(); ++j) {
    total += ec.sizes[j];
    CHECK(ec.sizes[j] >= 10);  // near-balanced chunks of 31 into 3
    CHECK(ec.sizes[j] <= 11);
  }
  CHECK(total == 31);
  ec.validate_for(uniform);  // representatives are in-bin minima

  // equal_width drops empty bins
  const std::vector<double> gap = {1.0, 1.01, 9.99, 10.0};
  const BinPartition ew = make_bins(gap, 5, BinStrategy::equal_width);
  CHECK(ew.bin_count() == 2);
  CHECK(ew.total() == 4);

  CHECK_THROWS_AS(make_bins(std::vector<double>{}, 1, BinStrategy::equal_width),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_bins(two, 0, BinStrategy::equal_count), std::invalid_argument);

  // default rule: distinct values when few, equal_count(8) otherwise
  CHECK(make_default_bins(two).bin_count() == 2);
  std::vector<double> many(100);
  for (double& b : many) b = 1.0 + rng.next_unit();
  CHECK(make_default_bins(many).bin_count() == 8);
}

TEST_CASE("holder_bound: single-bin reduction, zeros, oracle validity") {
  SplitMix64 rng(22);
  for (int t = 0; t < 30; ++t) {
    GPBInstance inst = random_common_beta(rng, 10);
    const BinPartition bins = make_default_bins(inst.betas);
    REQUIRE(bins.bin_count() == 1);
    const EnvelopeValue ev = holder_bound(inst.q, inst.alphas, inst.betas, bins);
    const double direct = h_envelope(inst.q, inst.betas[0], plain_mean(inst.alphas), inst.size());
    CHECK(tu::close_rel(ev.value, direct, 1e-15));
    CHECK(tu::close_rel(ev.value, std::exp(ev.log_value), 1e-15));
    CHECK(ev.value > 0.0);
    CHECK(ev.value <= 1.0 / inst.q + 1e-15);
  }

  // all alphas zero: every per-bin envelope is 1/q
  GPBInstance zeros{2.5, {0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 3.0, 3.0}};
  BinPartition bins = make_default_bins(zeros.betas);
  const EnvelopeValue ev = holder_bound(zeros.q, zeros.alphas, zeros.betas, bins);
  CHECK(ev.value == doctest::Approx(0.4).epsilon(1e-14));

  // heterogeneous-beta instances dominate the enumeration oracle
  SplitMix64 rng2(23);
  for (int t = 0; t < 50; ++t) {
    GPBInstance inst;
    inst.q = 0.5 + 3.0 * rng2.next_unit();
    inst.alphas.resize(6);
    inst.betas = {1.0, 1.0, 1.0, 3.0, 3.0, 3.0};
    for (double& a : inst.alphas) a = rng2.next_unit();
    const BinPartition b2 = make_default_bins(inst.betas);
    REQUIRE(b2.bin_count() == 2);
    const double bound = holder_bound(inst.q, inst.alphas, inst.betas, b2).value;
    CHECK(bound >= expected_reciprocal_exact(inst).value - 1e-12);
  }
}

TEST_CASE("holder linear-domain and log-domain agree") {
  SplitMix64 rng(31);
  for (int t = 0; t < 30; ++t) {
    GPBInstance inst;
    const int m = 4 + static_cast<int>(rng.next_below(9));
    inst.q = 0.3 + 6.0 * rng.next_unit();
    inst.alphas.resize(m);
    inst.betas.resize(m);
    for (int i = 0; i < m; ++i) {
      inst.alphas[i] = rng.next_unit();
      inst.betas[i] = 0.2 + 4.0 * rng.next_unit();
    }
    const BinPartition bins = make_bins(inst.betas, 3, BinStrategy::equal_count);
    const EnvelopeValue ev = holder_bound(inst.q, inst.alphas, inst.betas, bins);
    double linear = 1.0;
    for (int j = 0; j < bins.bin_count(); ++j) {
      linear *= std::pow(ev.per_bin_H[j], static_cast<double>(bins.sizes[j]) / m);
    }
    CHECK(tu::close_rel(ev.value, linear, 1e-12));
  }
}

TEST_CASE("relaxed_c2_bound: boundary equality, domination, violations") {
  // q equal to every representative: c_j = 2 already, bit-for-bit equal
  GPBInstance inst;
  inst.q = 1.5;
  inst.alphas = {0.2, 0.9, 0.4, 0.6};
  inst.betas = {1.5, 1.5, 1.5, 1.5};
  BinPartition bins = make_default_bins(inst.betas);
  populate_bin_means(bins, inst.alphas);
  const EnvelopeValue hb = holder_bound(inst.q, inst.alphas, inst.betas, bins);
  CHECK(relaxed_c2_bound(inst.q, bins, inst.size()) == hb.value);

  // the uniform-c relaxation dominates the Holder value when q <= beta*
  SplitMix64 rng(41);
  for (int t = 0; t < 50; ++t) {
    GPBInstance h;
    const int m = 4 + static_cast<int>(rng.next_below(7));
    h.alphas.resize(m);
    h.betas.resize(m);
    for (int i = 0; i < m; ++i) {
      h.alphas[i] = rng.next_unit();
      h.betas[i] = 1.0 + 4.0 * rng.next_unit();
    }
    h.q = 0.2 + 0.8 * rng.next_unit();  // q <= 1 <= every beta
    BinPartition b = make_bins(h.betas, 2, BinStrategy::equal_count);
    populate_bin_means(b, h.alphas);
    const double holder = holder_bound(h.q, h.alphas, h.betas, b).value;
    const double relaxed = relaxed_c2_bound(h.q, b, m);
    CHECK(relaxed >= holder - 1e-12);
    CHECK(holder >= expected_reciprocal_exact(h).value - 1e-12);
  }

  // all means 1, q = 1: single factor 2F1(-3,1;2;1) = 1/4
  BinPartition unit;
  unit.edges = {1.0, 1.0};
  unit.representatives = {1.0};
  unit.membership = {0, 0, 0};
  unit.sizes = {3};
  unit.means = {1.0};
  CHECK(tu::close_rel(relaxed_c2_bound(1.0, unit, 3), 0.25, 1e-13));

  // q above a representative is rejected with the offending bin listed
  CHECK_THROWS_WITH_AS(relaxed_c2_bound(2.0, unit, 3), doctest::Contains("bins {0}"),
                       std::invalid_argument);
  BinPartition no_means = unit;
  no_means.means.clear();
  CHECK_THROWS_AS(relaxed_c2_bound(1.0, no_means, 3), std::invalid_argument);
}

TEST_CASE("decoupled_q_bound: prefactor structure and validity") {
  GPBInstance inst;
  inst.q = 1.0;
  inst.alphas = {0.3, 0.8, 0.5, 0.2, 0.9, 0.1};
  inst.betas = {0.5, 0.5, 2.0, 2.0, 2.0, 0.5};
  const BinPartition bins = make_default_bins(inst.betas);

  const double at_one = decoupled_q_bound(1.0, inst, bins);
  GPBInstance half = inst;
  half.q = 0.5;
  CHECK(decoupled_q_bound(0.5, half, bins) == 2.0 * at_one);

  SplitMix64 rng(51);
  for (int t = 0; t < 50; ++t) {
    GPBInstance r;
    const int m = 8;
    r.q = 0.3 + 5.0 * rng.next_unit();
    r.alphas.resize(m);
    r.betas.resize(m);
    for (int i = 0; i < m; ++i) {
      r.alphas[i] = rng.next_unit();
      r.betas[i] = 0.3 + 3.0 * rng.next_unit();
    }
    const BinPartition b = make_bins(r.betas, 2, BinStrategy::equal_count);
    CHECK(decoupled_q_bound(r.q, r, b) >= expected_reciprocal_exact(r).value - 1e-12);
  }
}

TEST_CASE("envelope soundness and equal-alpha tightness on random instances") {
  SplitMix64 rng(61);
  for (int t = 0; t < 300; ++t) {
    GPBInstance inst = random_common_beta(rng, 12);
    const double mean = plain_mean(inst.alphas);
    const double h = h_envelope(inst.q, inst.betas[0], mean, inst.size());
    const double exact = expected_reciprocal_exact(inst).value;
    CHECK(h >= exact - 1e-12);
    // equal-alpha instances achieve the bound
    GPBInstance eq = inst;
    for (double& a : eq.alphas) a = mean;
    const double exact_eq = expected_reciprocal_exact(eq).value;
    CHECK(tu::close_rel(h, exact_eq, 1e-12));
  }
}

TEST_CASE("colinearity diagnostic: slack shrinks as bin means equalize") {
  // Same beta in both (artificial) bins; per-bin-constant alphas mu +/- delta.
  const int m = 6;
  BinPartition bins;
  bins.edges = {1.0, 1.0, 1.0};
  bins.representatives = {1.0, 1.0};
  bins.membership = {0, 0, 0, 1, 1, 1};
  bins.sizes = {3, 3};
  const double mu = 0.5;
  double prev_slack = -1.0;
  for (double delta : {0.3, 0.2, 0.1, 0.05, 0.0}) {
    GPBInstance inst;
    inst.q = 1.0;
    inst.betas.assign(m, 1.0);
    inst.alphas = {mu + delta, mu + delta, mu + delta, mu - delta, mu - delta, mu - delta};
    const double bound = holder_bound(inst.q, inst.alphas, inst.betas, bins).value;
    const double slack = bound - expected_reciprocal_exact(inst).value;
    CHECK(slack >= -1e-12);
    if (prev_slack >= 0.0) CHECK(slack <= prev_slack + 1e-12);
    prev_slack = slack;
  }
  CHECK(prev_slack <= 1e-12);  // equal means: equality case
}

TEST_CASE("prcut_baseline_bound: pinned values and errors") {
  {
    const std::vector<GraphEdge> e = {{0, 1, 1.0}};
    const Graph g = Graph::from_edges(2, e, WeightMode::ratio);
    const std::vector<double> p = {0.5, 0.5};
    CHECK(prcut_baseline_bound(g, p) == doctest::Approx(1.0).epsilon(1e-14));
  }
  {
    // triangle, constant column of ones: numerator vanishes
    const std::vector<GraphEdge> e = {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}};
    const Graph g = Graph::from_edges(3, e, WeightMode::ratio);
    const std::vector<double> ones = {1.0, 1.0, 1.0};
    CHECK(prcut_baseline_bound(g, ones) == 0.0);
    const std::vector<double> zeros = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(prcut_baseline_bound(g, zeros), std::domain_error);
    const Graph norm = g.with_mode(WeightMode::normalized);
    CHECK_THROWS_AS(prcut_baseline_bound(norm, ones), std::invalid_argument);
  }
  {
    // two disconnected triangles, binary membership of one of them
    std::vector<GraphEdge> e = {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0},
                                {3, 4, 1.0}, {4, 5, 1.0}, {3, 5, 1.0}};
    const Graph g = Graph::from_edges(6, e, WeightMode::ratio);
    const std::vector<double> p = {1.0, 1.0, 1.0, 0.0, 0.0, 0.0};
    CHECK(prcut_baseline_bound(g, p) == 0.0);
  }
}

TEST_CASE("prcut_reciprocal_bound: domain and domination") {
  GPBInstance ok{1.0, {0.2, 0.8}, {1.0, 1.0}};
  REQUIRE(prcut_reciprocal_bound(ok).has_value());
  CHECK(*prcut_reciprocal_bound(ok) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*prcut_reciprocal_bound(ok) >= expected_reciprocal_exact(ok).value);

  GPBInstance hetero{1.0, {0.2, 0.8}, {1.0, 2.0}};
  CHECK_FALSE(prcut_reciprocal_bound(hetero).has_value());
  GPBInstance small_q{0.5, {0.2, 0.8}, {1.0, 1.0}};
  CHECK_FALSE(prcut_reciprocal_bound(small_q).has_value());

  SplitMix64 rng(71);
  for (int t = 0; t < 50; ++t) {
    GPBInstance r;
    const int m = 1 + static_cast<int>(rng.next_below(10));
    r.q = 1.0 + 4.0 * rng.next_unit();
    r.alphas.resize(m);
    r.betas.assign(m, 1.0);
    for (double& a : r.alphas) a = 0.05 + 0.95 * rng.next_unit();
    CHECK(*prcut_reciprocal_bound(r) >= expected_reciprocal_exact(r).value - 1e-12);
  }
}
