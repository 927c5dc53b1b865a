#pragma once

// Helpers shared by the unit and acceptance suites: seeded random graphs and
// divisors, the complete <=4-vertex shape corpus, and small brute-force
// oracles kept deliberately independent of the library code paths they check.

#include <cstdlib>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "chipfire/divisor.hpp"
#include "chipfire/graph.hpp"
#include "chipfire/rng.hpp"

namespace testutil {

using chipfire::Divisor;
using chipfire::Graph;
using chipfire::Int;
using chipfire::Rational;
using chipfire::SplitMix64;
using chipfire::VecQ;
using chipfire::VecZ;

inline Rational rat(long p, long q = 1) { return Rational(p, q); }

/// Positive weight p/q with 1 <= p <= pmax, 1 <= q <= qmax.
inline Rational random_weight(SplitMix64& rng, long pmax = 4, long qmax = 4) {
  long p = 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(pmax)));
  long q = 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(qmax)));
  return Rational(p, q);
}

/// Connected graph on n in [nmin, nmax] vertices: a random spanning tree
/// (vertex k attaches below k) plus ~n/2 random extra edges, random base.
inline Graph random_connected_graph(SplitMix64& rng, int nmin, int nmax,
                                    long pmax = 4, long qmax = 4) {
  int n = nmin + static_cast<int>(rng.below(static_cast<std::uint64_t>(nmax - nmin + 1)));
  auto vname = [](int k) { return "v" + std::to_string(k); };
  std::set<std::pair<int, int>> seen;
  std::vector<std::tuple<std::string, std::string, Rational>> edges;
  auto add = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    if (a == b || !seen.insert({a, b}).second) return;
    edges.emplace_back(vname(a), vname(b), random_weight(rng, pmax, qmax));
  };
  for (int k = 1; k < n; ++k) add(k, static_cast<int>(rng.below(k)));
  for (int t = 0; t < n / 2; ++t)
    add(static_cast<int>(rng.below(n)), static_cast<int>(rng.below(n)));
  return Graph::from_edges(edges, vname(static_cast<int>(rng.below(n))));
}

/// Divisor with every multiplier uniform in [-bound, bound].
inline Divisor random_divisor(SplitMix64& rng, const Graph& g, long bound) {
  VecZ ell(g.order());
  for (int x = 0; x < g.order(); ++x)
    ell(x) = Int(static_cast<long>(rng.below(2 * bound + 1)) - bound);
  return Divisor(g, std::move(ell));
}

/// Random divisor with a prescribed degree (must lie in i_gcd * Z): a random
/// start is corrected along an extended-gcd combination of the scaled quanta.
inline Divisor random_divisor_of_degree(SplitMix64& rng, const Graph& g,
                                        const Rational& target) {
  const int n = g.order();
  std::vector<Int> coef(n, 0);
  Int gcur = g.quantum_scaled()(0);
  coef[0] = 1;
  for (int x = 1; x < n; ++x) {
    Int gnew, s, t;
    mpz_gcdext(gnew.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), gcur.get_mpz_t(),
               g.quantum_scaled()(x).get_mpz_t());
    for (int y = 0; y < x; ++y) coef[y] *= s;
    coef[x] = t;
    gcur = gnew;
  }
  Divisor d = random_divisor(rng, g, 3);
  Rational deficit = target - d.degree();
  Int k = (deficit / g.quantum_gcd()).num();
  VecZ ell = d.ell();
  for (int x = 0; x < n; ++x) ell(x) += k * coef[x];
  return Divisor(g, std::move(ell));
}

/// mu-mean-zero rational vector built from small integers.
inline VecQ random_mean_zero(SplitMix64& rng, const Graph& g) {
  VecQ f(g.order());
  for (int x = 0; x < g.order(); ++x)
    f(x) = rat(static_cast<long>(rng.below(11)) - 5);
  Rational mean = 0;
  const VecQ mu = g.mu();
  for (int x = 0; x < g.order(); ++x) mean += mu(x) * f(x);
  for (int x = 0; x < g.order(); ++x) f(x) -= mean;
  return f;
}

/// Every connected graph on at most 4 vertices, up to isomorphism:
/// edge, 3-path, triangle, 4-path, star, paw, 4-cycle, diamond, K4.
inline const std::vector<std::vector<std::pair<int, int>>>& small_shapes() {
  static const std::vector<std::vector<std::pair<int, int>>> shapes = {
      {{0, 1}},
      {{0, 1}, {1, 2}},
      {{0, 1}, {1, 2}, {0, 2}},
      {{0, 1}, {1, 2}, {2, 3}},
      {{0, 1}, {0, 2}, {0, 3}},
      {{0, 1}, {1, 2}, {0, 2}, {2, 3}},
      {{0, 1}, {1, 2}, {2, 3}, {0, 3}},
      {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}},
      {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}},
  };
  return shapes;
}

/// Deterministic weight palette with denominators <= 4.
inline std::vector<Rational> palette_weights(std::size_t count, int variant) {
  static const Rational palette[] = {Rational(1, 2), Rational(1, 3), Rational(1, 4),
                                     Rational(3, 4), Rational(2, 3), Rational(1)};
  std::vector<Rational> w(count);
  for (std::size_t e = 0; e < count; ++e)
    w[e] = variant == 0 ? Rational(1) : palette[(e + variant) % 6];
  return w;
}

inline Graph shape_graph(const std::vector<std::pair<int, int>>& shape,
                         const std::vector<Rational>& weights, int base = 0) {
  std::vector<std::tuple<std::string, std::string, Rational>> edges;
  for (std::size_t e = 0; e < shape.size(); ++e)
    edges.emplace_back("v" + std::to_string(shape[e].first),
                       "v" + std::to_string(shape[e].second), weights[e]);
  return Graph::from_edges(edges, "v" + std::to_string(base));
}

/// Independent (P1) and (P2) check by exhaustive subset firing: reduced means
/// nonnegative off base and every nonempty S avoiding the base has a vertex
/// that goes negative when S fires once. Graphs of at most ~12 vertices.
inline bool is_reduced_brute(const Divisor& d, int base) {
  const Graph& g = d.graph();
  const int n = g.order();
  for (int x = 0; x < n; ++x)
    if (x != base && d.value(x).sign() < 0) return false;
  std::vector<int> others;
  for (int x = 0; x < n; ++x)
    if (x != base) others.push_back(x);
  const int k = static_cast<int>(others.size());
  for (unsigned long mask = 1; mask < (1ul << k); ++mask) {
    std::vector<char> in(n, 0);
    for (int b = 0; b < k; ++b)
      if (mask & (1ul << b)) in[others[b]] = 1;
    bool some_negative = false;
    for (int b = 0; b < k && !some_negative; ++b) {
      if (!(mask & (1ul << b))) continue;
      int x = others[b];
      Rational out = 0;  // weight from x to the complement of S
      for (const auto& [y, w] : g.neighbors(x))
        if (!in[y]) out += w;
      if (d.value(x) < out) some_negative = true;
    }
    if (!some_negative) return false;
  }
  return true;
}

/// Smallest positive |(Delta f)(x)| over integer f with |f| <= box; equals
/// the vertex quantum i(x) once the box is large enough for the Bezout
/// coefficients of the incident weights.
inline Rational brute_vertex_quantum(const Graph& g, int x, long box = 6) {
  const int n = g.order();
  std::vector<long> f(n, -box);
  Rational best = 0;
  while (true) {
    Rational dfx = 0;
    for (const auto& [y, w] : g.neighbors(x)) dfx += w * rat(f[x] - f[y]);
    if (dfx.sign() < 0) dfx = -dfx;
    if (!dfx.is_zero() && (best.is_zero() || dfx < best)) best = dfx;
    int k = 0;
    while (k < n && f[k] == box) f[k++] = -box;
    if (k == n) break;
    ++f[k];
  }
  return best;
}

inline std::string data_dir() {
  const char* env = std::getenv("CHIPFIRE_DATA_DIR");
  return env ? env : "data";
}

}  // namespace testutil
