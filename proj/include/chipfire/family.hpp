#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "chipfire/rank.hpp"
#include "chipfire/spectral.hpp"

namespace chipfire {

/// Infinite edge-weighted graph described by a pure, symmetric neighbor
/// generator with finite total volume. Presets keep all weights dyadic (or at
/// least rational) so ball computations stay exact.
class Family {
 public:
  /// Ray 0-1-2-... with C(k, k+1) = 2^(-2^k).
  static Family ray_double_exp();
  /// Ray with C(k, k+1) = ratio^k, 0 < ratio < 1. Constant escape probability
  /// ratio/(1+ratio); contrast family for the vanishing-ratio condition.
  static Family ray_geometric(const Rational& ratio);
  /// Infinite binary tree rooted at "v"; edges from depth k to k+1 carry
  /// 2^(-2^k). Children of id are id+"0" and id+"1".
  static Family tree_double_exp();
  /// Finite core with a double-exp ray ("tail1", "tail2", ...) glued to
  /// `attach` (default: the core base); tail edge k carries scale * 2^(-2^k).
  static Family lollipop(Graph core, const Rational& scale,
                         const std::string& attach = {});

  const std::string& name() const { return name_; }
  const std::string& base() const { return base_; }
  std::vector<std::pair<std::string, Rational>> neighbors(const std::string& id) const {
    return gen_(id);
  }
  /// Exact upper bound on the ambient mass outside the radius-n ball.
  Rational tail_mass_upper(int n) const;
  /// Exact upper bound on the total volume sum_x m(x).
  const Rational& volume_upper() const { return volume_; }

 private:
  Family() = default;
  std::string name_;
  std::string base_;
  std::function<std::vector<std::pair<std::string, Rational>>(const std::string&)> gen_;
  std::function<Rational(int)> tail_;
  Rational volume_;
};

/// Least n with tail_mass_upper(n) < eps.
int n_for_tail(const Family& fam, const Rational& eps);

struct Ball {
  Graph graph;        // induced ball; base = family base; discovery vertex order
  int radius = 0;
  VecQ ambient_mass;  // generator mass per vertex (includes edges leaving the ball)
};

/// Materialize the radius-n ball by breadth-first expansion, keeping one
/// generator ring beyond the boundary so ambient masses are exact. Validates
/// generator symmetry, weight positivity and the declared volume bound.
Ball build_ball(const Family& fam, int n);

/// Max escape probability on the boundary shell: max over S_n of
/// 1 - m_minus(x) / m(x), with the ambient mass in the denominator.
Rational shell_rho(const Ball& ball);

struct SeriesRow {
  int n = 0;
  Rational rho;
  Rational e;           // euler invariant of the ball
  Rational mass_shell;  // ambient mass of the boundary shell
  Rational mass_ball;   // induced volume m_n(V_n)
  Rational min_mass;    // min ambient mass over the ball
  Rational ratio43;     // rho * mass_shell / min_mass
  std::optional<double> lambda;
  std::optional<Rational> r;
};

struct ExhaustionSeries {
  std::vector<SeriesRow> rows;  // n = 1..to
  double threshold_a = 0;       // Poincare threshold used for the flag below
  std::optional<int> first_n_below_a;
  bool ratio43_strictly_decreasing = false;
};

ExhaustionSeries exhaustion_series(const Family& fam, int to, bool with_gaps = false,
                                   int jobs = 1);

/// Finitely supported divisor on a family, as (vertex id, multiplier) pairs;
/// the multiplier is in units of the vertex quantum of any ball deep enough
/// to contain the support in its interior.
using SupportDivisor = std::vector<std::pair<std::string, Int>>;

/// Realize the support on a concrete ball graph. Every named vertex must
/// exist there; multipliers land on the ball's own quantum grid by
/// construction.
Divisor materialize(const SupportDivisor& support, const Graph& g);

struct RankSeriesRow {
  int n = 0;
  Rational r;        // r_n of the truncated divisor on the radius-n ball
  Rational r_kside;  // r_n of (canonical - divisor)
  Rational e;        // ball euler invariant
  Rational deg;      // degree of the truncated divisor (same for every n)
  bool rr_holds = false;  // exact per-ball identity r - r_kside = deg + e
};

struct RankSeries {
  std::vector<RankSeriesRow> rows;  // n = l..N, possibly truncated
  int stable_suffix = 0;            // longest run of equal r values at the end
  bool stabilized = false;          // stable_suffix >= stable_k
  bool truncated = false;           // a budget ran out; rows stop before N
  std::string note;
};

/// r_n((D)_l) for n = l..N; the support must sit inside the radius-(l-1)
/// ball. Each radius gets a fresh budget; the series stops at the first
/// budget exhaustion.
RankSeries rank_series(const Family& fam, const SupportDivisor& support, int l, int N,
                       long long budget = kDefaultBudget, int stable_k = 2,
                       int jobs = 1);

struct InfiniteRRReport {
  RankSeries series;
  ExhaustionSeries background;  // rho/ratio43 context over n = 1..N
  Rational r_hat;               // last computed r_n
  Rational r_hat_k;             // last computed r_n on the canonical side
  Rational e_hat;               // euler invariant of the largest ball
  Rational deg;
  Rational residual;  // r_hat - r_hat_k - deg - e_hat (0 whenever RR held at N)
  std::string verdict;  // "stabilized" or "inconclusive"
  bool ratio43_vanishing = false;  // strict decrease over the window
  std::string disclaimer;
  std::optional<Rational> pair_gap;    // |r_hat - r_hat'| for a second divisor
  std::optional<Rational> pair_bound;  // deg+ + deg- of the difference on ball N
  std::optional<bool> pair_ok;
};

InfiniteRRReport infinite_rr_report(
    const Family& fam, const SupportDivisor& support, int l, int N,
    long long budget = kDefaultBudget, int stable_k = 2, int jobs = 1,
    const std::optional<std::pair<SupportDivisor, int>>& second = {});

struct OrderConsistencyReport {
  int n_small = 0;
  int n_eps = 0;   // least n with tail mass bound < eps
  int n_used = 0;  // min(n_eps, n_small - 1): orders are grouped by V_{n_used}
  Rational unrestricted_min;           // min over all orders of deg(W) + s_min
  Rational rank_value;                 // rank() of the probe divisor
  bool min_matches_rank = false;       // unrestricted_min == rank + quantum
  std::map<std::string, Rational> class_minima;  // per restriction class
  long long pairs_checked = 0;
  Rational max_pair_diff;              // max deg+ + deg- of nu differences
  Rational provable_bound;             // 2 * induced mass outside V_{n_used}
  bool provable_ok = false;
  Rational tail_low;   // ambient in-ball mass outside V_{n_used}
  Rational tail_high;  // tail_low + generator tail bound: brackets m(V^c)
  long long pairs_below_tail = 0;    // pair diff < tail_low: bound certainly met
  long long pairs_above_tail = 0;    // pair diff >= tail_high: bound certainly broken
  long long pairs_unresolved = 0;
};

/// Enumerate all vertex orders of a small ball: check the order-based rank
/// characterization, group orders by their restriction to the inner ball
/// V_{n_used}, and measure how far the nu divisors of same-class pairs drift
/// apart. The drift always obeys twice the outer mass; whether it stays below
/// the outer mass itself is reported per pair, not assumed.
OrderConsistencyReport order_consistency_probe(const Family& fam, int n_small,
                                               const Rational& eps,
                                               const SupportDivisor& support = {},
                                               long long max_pairs = 5000);

struct ExtensionProbe {
  int n = 0;
  int big_n = 0;
  double lhs = 0;  // energy of the zero-extension of the gap vector on the big ball
  double rhs = 0;  // norm^2 * m_n(V_n) * (lambda_n + rho/(1-rho)) + 2 tail max psi^2
  double slack = 0;
  bool holds = false;
  double lambda_n = 0;
  Rational rho_n;
};

/// Zero-extension energy bound for the radius-n gap eigenfunction inside the
/// radius-big_n ball. With const_override the eigenfunction is replaced by a
/// constant, which mean-centers to zero and collapses both sides.
ExtensionProbe eigen_extension_probe(const Family& fam, int n, int big_n,
                                     bool const_override = false);

}  // namespace chipfire
