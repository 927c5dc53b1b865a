#include "chipfire/reduce.hpp"

#include <algorithm>
#include <numeric>

#include "chipfire/errors.hpp"
#include "chipfire/rng.hpp"

namespace chipfire {

namespace {

int resolve_base(const Graph& g, int base) {
  if (base < 0) return g.base();
  if (base >= g.order()) throw ValidationError("bad base vertex index");
  return base;
}

// All internal accounting uses values scaled by graph.scale(), which turns
// every weight, quantum and divisor value into a plain integer.
VecZ scaled_values(const Divisor& d) {
  const Graph& g = d.graph();
  VecZ vs = VecZ::Constant(g.order(), Int(0));
  for (int x = 0; x < g.order(); ++x) vs(x) = d.ell(x) * g.quantum_scaled()(x);
  return vs;
}

Divisor from_scaled(const Graph& g, const VecZ& vs) {
  VecZ ell = VecZ::Constant(g.order(), Int(0));
  for (int x = 0; x < g.order(); ++x)
    mpz_divexact(ell(x).get_mpz_t(), vs(x).get_mpz_t(),
                 g.quantum_scaled()(x).get_mpz_t());
  return Divisor(g, std::move(ell));
}

// Shell sweep: returns the number of shells that fired. `extra` may inject
// additional firings per shell (overshoot probe); the end state still has
// every value off base nonnegative since shell k is only credited by later
// (smaller-k) steps of the sweep.
int phase1(const Graph& g, const MetricProfile& mp, VecZ& vs, VecZ& f,
           SplitMix64* overshoot) {
  int rounds = 0;
  for (int k = mp.diameter; k >= 1; --k) {
    Int t(0);
    for (int z : mp.shells[k]) {
      if (vs(z) >= 0) continue;
      Int inflow(0);
      for (const auto& [y, w] : g.adjacency_scaled()[z])
        if (mp.dist(y) == k - 1) inflow += w;
      Int deficit = -vs(z), tz;
      mpz_cdiv_q(tz.get_mpz_t(), deficit.get_mpz_t(), inflow.get_mpz_t());
      if (tz > t) t = tz;
    }
    if (overshoot) t += Int(static_cast<unsigned long>(overshoot->below(3)));
    if (t == 0) continue;
    ++rounds;
    for (int z : mp.shells[k])
      for (const auto& [y, w] : g.adjacency_scaled()[z])
        if (mp.dist(y) == k - 1) {
          vs(z) += t * w;
          vs(y) -= t * w;
        }
    for (int x = 0; x < g.order(); ++x)
      if (mp.dist(x) < k) f(x) += t;
  }
  return rounds;
}

// Burning closure. The result is independent of the candidate order (the
// burnt set is the least fixpoint), so `order` only scrambles the schedule.
std::vector<char> burn(const Graph& g, int base, const VecZ& vs,
                       const std::vector<int>& order) {
  std::vector<char> burnt(g.order(), 0);
  burnt[base] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int x : order) {
      if (burnt[x]) continue;
      Int inflow(0);
      for (const auto& [y, w] : g.adjacency_scaled()[x])
        if (burnt[y]) inflow += w;
      if (vs(x) < inflow) {
        burnt[x] = 1;
        changed = true;
      }
    }
  }
  return burnt;
}

void check_p1(const Graph& g, int base, const VecZ& vs) {
  for (int x = 0; x < g.order(); ++x)
    if (x != base && vs(x) < 0)
      throw ValidationError("burning test requires nonnegative values off the base");
}

ReductionResult reduce_impl(const Divisor& d, int base_arg, SplitMix64* rng) {
  const Graph& g = d.graph();
  const int n = g.order();
  const int base = resolve_base(g, base_arg);
  MetricProfile local;
  const MetricProfile* mp = &g.metric();
  if (base != g.base()) {
    local = metric_profile(g, base);
    mp = &local;
  }

  VecZ vs = scaled_values(d);
  VecZ f = VecZ::Constant(n, Int(0));
  ReductionResult out{Divisor(g), f, 0, 0};
  out.phase1_rounds = phase1(g, *mp, vs, f, rng);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  while (true) {
    if (rng) rng->shuffle(order);
    std::vector<char> burnt = burn(g, base, vs, order);
    bool all = true;
    for (char b : burnt) all = all && b;
    if (all) break;

    // Fire the unburnt set; every member can afford its boundary weight, and
    // t-fold firing is legal up to the least floor(value / boundary weight).
    Int t(0);
    bool have = false;
    for (int x = 0; x < n; ++x) {
      if (burnt[x]) continue;
      Int outflow(0);
      for (const auto& [y, w] : g.adjacency_scaled()[x])
        if (burnt[y]) outflow += w;
      if (outflow == 0) continue;
      Int tx;
      mpz_fdiv_q(tx.get_mpz_t(), vs(x).get_mpz_t(), outflow.get_mpz_t());
      if (!have || tx < t) {
        t = tx;
        have = true;
      }
    }
    if (!have || t < 1) t = 1;
    if (rng && rng->below(2) == 0 && mpz_fits_ulong_p(t.get_mpz_t())) {
      // Any multiplicity in [1, t] is legal; undershoot on purpose.
      t = Int(static_cast<unsigned long>(1 + rng->below(std::max(1ul, t.get_ui()))));
    }
    for (int x = 0; x < n; ++x) {
      if (burnt[x]) continue;
      for (const auto& [y, w] : g.adjacency_scaled()[x])
        if (burnt[y]) {
          vs(x) -= t * w;
          vs(y) += t * w;
        }
      f(x) += t;
    }
    ++out.phase2_fires;
  }

  Int shift = f(base);
  for (int x = 0; x < n; ++x) f(x) -= shift;
  out.reduced = from_scaled(g, vs);
  out.firing = std::move(f);
  return out;
}

}  // namespace

std::pair<Divisor, FiringFunction> make_nonneg_off_base(const Divisor& d, int base_arg) {
  const Graph& g = d.graph();
  const int base = resolve_base(g, base_arg);
  MetricProfile local;
  const MetricProfile* mp = &g.metric();
  if (base != g.base()) {
    local = metric_profile(g, base);
    mp = &local;
  }
  VecZ vs = scaled_values(d);
  VecZ f = VecZ::Constant(g.order(), Int(0));
  phase1(g, *mp, vs, f, nullptr);
  return {from_scaled(g, vs), std::move(f)};
}

std::vector<int> dhar_burnt_set(const Divisor& d, int base_arg) {
  const Graph& g = d.graph();
  const int base = resolve_base(g, base_arg);
  VecZ vs = scaled_values(d);
  check_p1(g, base, vs);
  std::vector<int> order(g.order());
  std::iota(order.begin(), order.end(), 0);
  std::vector<char> burnt = burn(g, base, vs, order);
  std::vector<int> out;
  for (int x = 0; x < g.order(); ++x)
    if (burnt[x]) out.push_back(x);
  return out;
}

ReductionResult reduce_divisor(const Divisor& d, int base) {
  return reduce_impl(d, base, nullptr);
}

ReductionResult reduce_divisor_randomized(const Divisor& d, std::uint64_t seed, int base) {
  SplitMix64 rng(seed);
  return reduce_impl(d, base, &rng);
}

bool is_winnable(const Divisor& d, WinnableMode mode, int bound, int base_arg) {
  const Graph& g = d.graph();
  const int base = resolve_base(g, base_arg);
  if (mode == WinnableMode::reduced) {
    ReductionResult rr = reduce_divisor(d, base);
    return rr.reduced.ell(base) >= 0;
  }
  const int n = g.order();
  if (n > 5) throw ValidationError("brute winnability is limited to 5 vertices");
  if (bound < 0) throw ValidationError("brute winnability needs a nonnegative bound");
  std::vector<int> free_vertices;
  for (int x = 0; x < n; ++x)
    if (x != base) free_vertices.push_back(x);
  const int span = 2 * bound + 1;
  FiringFunction f = FiringFunction::Constant(n, Int(0));
  std::vector<int> digit(free_vertices.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < free_vertices.size(); ++i)
      f(free_vertices[i]) = digit[i] - bound;
    if (apply_firing(d, f).is_effective()) return true;
    std::size_t i = 0;
    for (; i < digit.size(); ++i) {
      if (++digit[i] < span) break;
      digit[i] = 0;
    }
    if (i == digit.size()) break;
  }
  return false;
}

}  // namespace chipfire
