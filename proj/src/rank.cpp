#include "chipfire/rank.hpp"

#include <algorithm>
#include <numeric>

namespace chipfire {

namespace {

long long units_of(const Rational& value, const Rational& igcd) {
  Rational ratio = value / igcd;
  return static_cast<long long>(ratio.num().get_si());
}

struct Knapsack {
  const Graph& g;
  Budget& budget;
  const std::function<bool(const Divisor&)>& visit;
  std::vector<int> order;   // vertex indices, quantum descending
  std::vector<Int> unit;    // quantum / i_gcd per order slot
  VecZ ell;
  bool stopped = false;

  Knapsack(const Graph& gg, Budget& b, const std::function<bool(const Divisor&)>& v)
      : g(gg), budget(b), visit(v), ell(VecZ::Constant(gg.order(), Int(0))) {
    order.resize(g.order());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int c) {
      return g.quantum()(a) > g.quantum()(c);
    });
    unit.reserve(order.size());
    for (int x : order) {
      Rational u = g.quantum()(x) / g.quantum_gcd();
      unit.push_back(u.num());
    }
  }

  void dfs(std::size_t pos, const Int& remaining) {
    if (stopped) return;
    budget.charge();
    if (remaining == 0) {
      if (!visit(Divisor(g, ell))) stopped = true;
      return;
    }
    if (pos == order.size()) return;
    const int x = order[pos];
    const Int& u = unit[pos];
    for (Int c(0); c * u <= remaining; ++c) {
      ell(x) = c;
      dfs(pos + 1, remaining - c * u);
      if (stopped) break;
    }
    ell(x) = 0;
  }
};

}  // namespace

void for_each_effective(const Graph& g, const Rational& s, Budget& budget,
                        const std::function<bool(const Divisor&)>& visit) {
  if (s.sign() < 0) throw ValidationError("effective enumeration needs degree >= 0");
  Rational units = s / g.quantum_gcd();
  if (!units.is_integer())
    throw ValidationError("degree " + s.str() + " is not a multiple of the global quantum");
  Knapsack ks(g, budget, visit);
  ks.dfs(0, units.num());
}

std::vector<Divisor> enumerate_effective(const Graph& g, const Rational& s,
                                         long long budget_limit) {
  std::vector<Divisor> out;
  Budget budget(budget_limit);
  for_each_effective(g, s, budget, [&out](const Divisor& e) {
    out.push_back(e);
    return true;
  });
  return out;
}

RankResult rank(const Divisor& d, int base, long long budget_limit) {
  const Graph& g = d.graph();
  const Rational igcd = g.quantum_gcd();
  RankResult res;

  if (d.degree().sign() < 0) {
    // Degree is preserved by firing, so the class has no effective member:
    // the zero divisor already obstructs.
    res.rank = -igcd;
    res.k = -1;
    res.obstruction = Divisor(g);
    return res;
  }

  Budget budget(budget_limit);
  Rational verified = -igcd;  // all degrees <= this are known obstruction-free
  try {
    for (Rational s(0);; s += igcd) {
      std::optional<Divisor> obstruction;
      for_each_effective(g, s, budget, [&](const Divisor& e) {
        ++res.tested;
        Divisor w = d - e;
        // deg(w) < 0 is an instant obstruction and also caps the scan.
        bool winnable =
            w.degree().sign() >= 0 && is_winnable(w, WinnableMode::reduced, 6, base);
        if (!winnable) obstruction = e;
        return !obstruction.has_value();
      });
      if (obstruction) {
        res.rank = s - igcd;
        res.k = units_of(res.rank, igcd);
        res.obstruction = std::move(obstruction);
        res.nodes = budget.used;
        return res;
      }
      verified = s;
    }
  } catch (const BudgetError&) {
    res.exact = false;
    res.rank = verified;
    res.k = units_of(verified, igcd);
    res.nodes = budget.used;
    return res;
  }
}

Rational rank_via_orders(const Divisor& d, long long budget_limit) {
  const Graph& g = d.graph();
  const int n = g.order();
  if (n > 6) throw ValidationError("rank_via_orders is limited to 6 vertices");
  const Rational igcd = g.quantum_gcd();
  Budget budget(budget_limit);

  std::optional<Rational> best;  // min over orders of deg+(D' - nu_O) over the class
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    TotalOrder o(perm);
    Divisor w = d - nu_divisor(g, o);
    const Rational degw = w.degree();
    // min over the class of W of deg+ = deg(W) + min{deg E : |W + E| nonempty}.
    std::optional<Rational> cap;
    if (best) cap = *best - degw;
    if (auto s = min_winnable_topup(w, budget, cap)) best = degw + *s;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return *best - igcd;
}

std::optional<Rational> min_winnable_topup(const Divisor& w, Budget& budget,
                                           const std::optional<Rational>& cap) {
  const Graph& g = w.graph();
  const Rational igcd = g.quantum_gcd();
  // Halts by s = deg-(w): adding the negative part of w gives an effective
  // divisor, which is winnable from itself.
  for (Rational s(0);; s += igcd) {
    if (cap && s >= *cap) return std::nullopt;
    bool winnable_found = false;
    for_each_effective(g, s, budget, [&](const Divisor& e) {
      if (is_winnable(w + e, WinnableMode::reduced)) {
        winnable_found = true;
        return false;
      }
      return true;
    });
    if (winnable_found) return s;
  }
}

Rational rank_greedy(const Divisor& d, int base_arg) {
  const Graph& g = d.graph();
  const int base = base_arg < 0 ? g.base() : base_arg;
  if (base >= g.order()) throw ValidationError("bad base vertex index");
  const Rational ibase = g.quantum()(base);

  Divisor probe = d;
  long long t = 0;
  while (probe.degree().sign() >= 0 && is_winnable(probe, WinnableMode::reduced, 6, base)) {
    ++t;
    probe.ell(base) -= 1;
  }
  if (t == 0) return -g.quantum_gcd();
  return Rational(t - 1) * ibase;
}

RRCheck rr_check(const Divisor& d, int base, long long budget_limit) {
  const Graph& g = d.graph();
  RRCheck out;
  out.d_side = rank(d, base, budget_limit);
  out.k_side = rank(canonical_divisor(g) - d, base, budget_limit);
  out.lhs = out.d_side.rank - out.k_side.rank;
  out.rhs = d.degree() + g.euler();
  out.exact = out.d_side.exact && out.k_side.exact;
  out.holds = out.exact && out.lhs == out.rhs;
  return out;
}

}  // namespace chipfire
