#include "chipfire/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "../support.hpp"
#include "doctest.h"

using namespace chipfire;
using testutil::rat;

namespace {

Graph ex1() {
  return Graph::parse("base a\nedge a b 1/2\nedge b c 1/3\n");
}

// max |(1/m) Delta psi - lambda psi| in doubles
double rayleigh_residual(const Graph& g, const Eigen::VectorXd& psi, double lambda) {
  double worst = 0;
  for (int x = 0; x < g.order(); ++x) {
    double acc = 0;
    for (const auto& [y, w] : g.neighbors(x)) acc += w.to_double() * (psi(x) - psi(y));
    worst = std::max(worst, std::abs(acc / g.mass()(x).to_double() - lambda * psi(x)));
  }
  return worst;
}

}  // namespace

TEST_CASE("energy and measure primitives are exact") {
  Graph g = ex1();
  VecQ f(3);
  f << rat(1), rat(0), rat(-3, 2);
  CHECK(dirichlet_energy(g, f) == rat(5, 4));
  CHECK(dirichlet_energy(g, f, {0, 1}) == rat(1, 2));
  CHECK(dirichlet_energy(g, f, {1, 2}) == rat(3, 4));
  CHECK(dirichlet_energy(g, f, {0, 2}) == rat(0));
  CHECK(mu_norm_sq(g, f) == rat(3, 4));
  CHECK(mu_mean(g, f) == rat(0));

  VecQ ones = VecQ::Constant(3, rat(1));
  CHECK(dirichlet_energy(g, ones) == rat(0));
  CHECK(mu_mean(g, ones) == rat(1));

  // induced-subgraph normalization: only the a-b edge, masses 1/2 each
  CHECK(dirichlet_energy_normalized(g, f, {0, 1}) == rat(1, 2));
}

TEST_CASE("three-vertex paths always have spectrum {0, 1, 2}") {
  Graph g = ex1();
  SpectralResult s = spectral_gap(g);
  REQUIRE(s.eigenvalues.size() == 3);
  CHECK(s.eigenvalues[0] == 0.0);
  CHECK(s.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.eigenvalues[2] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s.gap == doctest::Approx(1.0).epsilon(1e-9));

  // eigenvector contract: mu-mean zero, mu-norm one, sign-fixed, small residual
  VecQ mu = g.mu();
  double mean = 0, norm = 0;
  for (int x = 0; x < 3; ++x) {
    mean += mu(x).to_double() * s.gap_vector(x);
    norm += mu(x).to_double() * s.gap_vector(x) * s.gap_vector(x);
  }
  CHECK(std::abs(mean) < 1e-9);
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
  int lead = 0;
  while (lead < 3 && s.gap_vector(lead) == 0.0) ++lead;
  CHECK(s.gap_vector(lead) > 0);
  CHECK(rayleigh_residual(g, s.gap_vector, s.gap) <= 1e-9);

  SplitMix64 rng(61);
  for (int t = 0; t < 6; ++t) {
    Graph p = testutil::random_connected_graph(rng, 3, 3, 4, 4);
    if (p.edge_count() != 2) continue;  // keep only paths, not triangles
    SpectralResult sp = spectral_gap(p);
    CHECK(sp.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sp.eigenvalues[2] == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("single edges and unit 4-cycles") {
  SplitMix64 rng(62);
  for (int t = 0; t < 5; ++t) {
    Graph g = Graph::from_edges({{"u", "v", testutil::random_weight(rng)}}, "u");
    SpectralResult s = spectral_gap(g);
    CHECK(s.gap == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(s.eigenvalues[0] == 0.0);
  }

  Graph c4 = Graph::parse(
      "base a\nedge a b 1\nedge b c 1\nedge c d 1\nedge a d 1\n");
  SpectralResult s = spectral_gap(c4);
  CHECK(s.gap == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.eigenvalues[2] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.eigenvalues[3] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("gap eigenpairs on random graphs satisfy the Rayleigh identity") {
  SplitMix64 rng(63);
  for (int t = 0; t < 15; ++t) {
    Graph g = testutil::random_connected_graph(rng, 2, 7);
    SpectralResult s = spectral_gap(g);
    CHECK(s.eigenvalues[0] == 0.0);
    CHECK(s.gap > 0);
    CHECK(rayleigh_residual(g, s.gap_vector, s.gap) <= 1e-9);

    // Poincare inequality with the computed gap
    for (int probe = 0; probe < 5; ++probe) {
      VecQ f = testutil::random_mean_zero(rng, g);
      double lhs = mu_norm_sq(g, f).to_double();
      double rhs = dirichlet_energy(g, f).to_double() /
                   (s.gap * g.total_mass().to_double());
      CHECK(lhs <= rhs + 1e-9);
    }
  }
}

TEST_CASE("resolvent: fixed point, exact residual, norm bound") {
  Graph g = ex1();
  VecQ fixed(3);
  fixed << rat(1), rat(0), rat(-3, 2);  // eigenfunction of L at lambda = 1
  VecQ u = resolvent_solve(g, fixed);
  CHECK(u == fixed);

  VecQ biased = VecQ::Constant(3, rat(1));
  CHECK_THROWS_AS(resolvent_solve(g, biased), ValidationError);

  SplitMix64 rng(64);
  for (int t = 0; t < 30; ++t) {
    Graph h = testutil::random_connected_graph(rng, 2, 6);
    VecQ rhs = testutil::random_mean_zero(rng, h);
    VecQ v = resolvent_solve(h, rhs);
    CHECK(mu_mean(h, v) == rat(0));
    for (int x = 0; x < h.order(); ++x)  // L v = rhs, exactly
      CHECK(laplacian_apply(h, v)(x) == h.mass()(x) * rhs(x));
    double gap = spectral_gap(h).gap;
    CHECK(std::sqrt(mu_norm_sq(h, v).to_double()) <=
          std::sqrt(mu_norm_sq(h, rhs).to_double()) / gap + 1e-9);
  }
}

TEST_CASE("threshold constant and the vanishing root at u = 2") {
  CHECK(poincare_b_exp(2.0).first == 0.0);
  CHECK(poincare_b(std::log(2.0)).first == doctest::Approx(0.0).epsilon(1e-12));

  for (double u : {2.5, 3.0, 4.0, 7.0}) {
    auto [lo, hi] = poincare_b_exp(u);
    CHECK(lo > 0);
    CHECK(lo < hi);
    // both roots satisfy the quadratic
    double a = u - 1 / u;
    double b = -2 * (u - 2 / u + 1);
    double c = 1 - 2 / u;
    CHECK(std::abs(a * lo * lo + b * lo + c) < 1e-12);
    CHECK(std::abs(a * hi * hi + b * hi + c) < 1e-12);
  }

  PoincareThreshold th = poincare_threshold();
  CHECK(th.A == doctest::Approx(0.056905).epsilon(1e-4));
  CHECK(th.argmax_a > 1.30);
  CHECK(th.argmax_a < 1.50);
  // the maximum dominates nearby evaluations
  CHECK(th.A >= poincare_b(th.argmax_a - 0.01).first);
  CHECK(th.A >= poincare_b(th.argmax_a + 0.01).first);
}

TEST_CASE("subset inequalities hold exactly and report their pieces") {
  SplitMix64 rng(65);
  for (int t = 0; t < 60; ++t) {
    Graph g = testutil::random_connected_graph(rng, 3, 6);
    VecQ f(g.order());
    for (int x = 0; x < g.order(); ++x)
      f(x) = rat(static_cast<long>(rng.below(9)) - 4, 1 + static_cast<long>(rng.below(3)));
    Rational eps = testutil::random_weight(rng, 5, 3);

    // a metric ball half the time, otherwise an arbitrary nonempty subset
    std::vector<int> subset;
    if (t % 2 == 0) {
      int radius = static_cast<int>(rng.below(std::max(1, g.metric().diameter)));
      for (int x = 0; x < g.order(); ++x)
        if (g.metric().dist(x) <= radius) subset.push_back(x);
    } else {
      for (int x = 0; x < g.order(); ++x)
        if (rng.below(2) == 0) subset.push_back(x);
      if (subset.empty()) subset.push_back(0);
    }

    InequalityProbe p = inequality_probe(g, subset, f, eps);
    CHECK(p.cross_holds);
    CHECK(p.cross_lhs == dirichlet_energy(g, f, subset) / g.total_mass());
    CHECK(p.cross_rhs == eps / rat(2) * mu_norm_sq(g, f) +
                             dirichlet_energy(g, f) / (eps * g.total_mass()));
    if (t % 2 == 0) {
      CHECK(p.is_ball);
      CHECK(p.escape_holds);
      CHECK(p.escape_rhs == p.rho_n * g.total_mass() * mu_norm_sq(g, f));
    }
  }

  Graph g = ex1();
  VecQ f = VecQ::Constant(3, rat(1));
  CHECK_THROWS_AS(inequality_probe(g, {}, f, rat(1)), ValidationError);
  CHECK_THROWS_AS(inequality_probe(g, {0}, f, rat(0)), ValidationError);
  // {a, c} is not a ball: the escape part is skipped
  InequalityProbe p = inequality_probe(g, {0, 2}, f, rat(1));
  CHECK_FALSE(p.is_ball);
  CHECK(p.cross_holds);
}

TEST_CASE("harmonic extension: worked cases and the floor bounds") {
  Graph g = ex1();

  // data only at the base: the extension is the constant
  VecZ c0(1);
  c0 << Int(3);
  HarmonicExtension h0 = harmonic_extension(g, {0}, c0);
  CHECK(h0.h(1) == rat(3));
  CHECK(h0.h(2) == rat(3));
  CHECK(h0.max_principle_ok);
  CHECK(h0.floor_ratio_max == rat(0));

  // ball of radius 1: one harmonic unknown, h(c) = h(b)
  VecZ c1(2);
  c1 << Int(2), Int(-1);
  HarmonicExtension h1 = harmonic_extension(g, {0, 1}, c1);
  CHECK(h1.h(2) == rat(-1));
  CHECK(h1.max_inner == rat(2));
  CHECK(h1.max_all == rat(2));
  CHECK(h1.l1_ok);

  VecZ bad(2);
  bad << Int(1), Int(1);
  CHECK_THROWS_AS(harmonic_extension(g, {0, 2}, bad), ValidationError);  // not a ball
  CHECK_THROWS_AS(harmonic_extension(g, {0, 1, 2}, VecZ(3)), ValidationError);
  CHECK_THROWS_AS(harmonic_extension(g, {0}, bad), ValidationError);  // size

  SplitMix64 rng(66);
  int done = 0;
  while (done < 40) {
    Graph h = testutil::random_connected_graph(rng, 3, 7);
    if (h.metric().diameter < 1) continue;
    int radius = static_cast<int>(rng.below(h.metric().diameter));
    std::vector<int> inner;
    for (int x = 0; x < h.order(); ++x)
      if (h.metric().dist(x) <= radius) inner.push_back(x);
    VecZ data(inner.size());
    for (Eigen::Index i = 0; i < data.size(); ++i)
      data(i) = Int(static_cast<long>(rng.below(13)) - 6);

    HarmonicExtension ext = harmonic_extension(h, inner, data);
    CHECK(ext.max_principle_ok);
    CHECK(ext.floor_bound_ok);
    CHECK(ext.l1_ok);
    CHECK(ext.floor_ratio_max <= rat(2));

    VecQ dh = laplacian_apply(h, ext.h);
    VecQ dfloor = laplacian_apply(h, ext.gfloor);
    Rational l1 = 0, annulus_mass = 0;
    for (int x = 0; x < h.order(); ++x) {
      if (h.metric().dist(x) <= radius) {
        CHECK(ext.h(x) == Rational(data(
            static_cast<Eigen::Index>(std::find(inner.begin(), inner.end(), x) -
                                      inner.begin()))));
        continue;
      }
      CHECK(dh(x) == rat(0));                      // exact harmonicity
      CHECK(abs(ext.h(x)) <= ext.max_inner);       // max principle, pointwise
      CHECK(abs(dfloor(x)) <= rat(2) * h.mass()(x));
      CHECK(ext.gfloor(x) == ext.h(x).floor_int());
      l1 += abs(dfloor(x));
      annulus_mass += h.mass()(x);
    }
    CHECK(l1 == ext.annulus_l1);
    CHECK(ext.annulus_l1_bound == rat(2) * annulus_mass);
    ++done;
  }
}
