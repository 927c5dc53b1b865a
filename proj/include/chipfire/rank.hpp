#pragma once

#include <functional>
#include <optional>

#include "chipfire/reduce.hpp"

namespace chipfire {

inline constexpr long long kDefaultBudget = 1'000'000;

/// Node counter shared across enumeration calls; throws when exhausted.
struct Budget {
  long long limit;
  long long used = 0;
  explicit Budget(long long lim) : limit(lim) {}
  void charge() {
    if (used >= limit) throw BudgetError("enumeration budget exceeded");
    ++used;
  }
};

/// Visit every effective divisor of degree exactly s (a nonnegative multiple
/// of the global quantum), in a fixed order: bounded knapsack over the vertex
/// quanta, vertices sorted by quantum descending (ties by index), counts
/// ascending. The visitor returns false to stop early. Each search-tree node
/// costs one budget unit.
void for_each_effective(const Graph& g, const Rational& s, Budget& budget,
                        const std::function<bool(const Divisor&)>& visit);

std::vector<Divisor> enumerate_effective(const Graph& g, const Rational& s,
                                         long long budget = kDefaultBudget);

/// Least degree s >= 0 (a multiple of the global quantum) such that some
/// effective E of degree s makes w + E winnable; always halts by s = deg-(w),
/// where the negative part of w itself works. With `cap` the scan stops early
/// and returns nothing once s >= cap.
std::optional<Rational> min_winnable_topup(const Divisor& w, Budget& budget,
                                           const std::optional<Rational>& cap = {});

struct RankResult {
  Rational rank;
  long long k = 0;  // rank = k * i_gcd; k = -1 means the class has no effective member
  std::optional<Divisor> obstruction;  // minimal-degree effective E with D - E unwinnable
  long long tested = 0;                // obstruction candidates examined
  long long nodes = 0;                 // enumeration nodes consumed
  bool exact = true;  // false: budget ran out; rank is the best verified lower bound
};

/// Baker-Norine-style rank: scan s = 0, i_gcd, 2 i_gcd, ... and return
/// s* - i_gcd for the first s* admitting an effective E with D - E unwinnable.
/// Negative-degree divisors short-circuit to -i_gcd. On budget exhaustion the
/// result carries the largest degree that was fully cleared.
RankResult rank(const Divisor& d, int base = -1, long long budget = kDefaultBudget);

/// Independent cross-check: min over all vertex orders O and all D' ~ D of
/// the positive degree of D' - nu_O, minus i_gcd. Factorial in |V|; capped at
/// 6 vertices.
Rational rank_via_orders(const Divisor& d, long long budget = 10 * kDefaultBudget);

/// Heuristic transplant of the unweighted greedy algorithm: count how often
/// one base quantum can be subtracted at the base before the class stops
/// being winnable. Steps by i(base), not i_gcd, so it can under-resolve the
/// exact rank; kept only for comparison against rank().
Rational rank_greedy(const Divisor& d, int base = -1);

struct RRCheck {
  RankResult d_side;   // r(D)
  RankResult k_side;   // r(K - D)
  Rational lhs;        // r(D) - r(K - D)
  Rational rhs;        // deg(D) + euler
  bool exact = true;   // both ranks exact
  bool holds = false;  // lhs == rhs (meaningful only when exact)
};

/// Exact check of r(D) - r(K - D) = deg(D) + euler.
RRCheck rr_check(const Divisor& d, int base = -1, long long budget = kDefaultBudget);

}  // namespace chipfire
