#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "chipfire/graph.hpp"

namespace chipfire {

/// Integer-valued firing function indexed like the graph's vertices.
using FiringFunction = VecZ;

struct DegreeSplit {
  Rational deg;
  Rational plus;   // sum of positive values
  Rational minus;  // -(sum of negative values), so deg = plus - minus
};

/// Divisor on a weighted graph, stored as the integer multiplier ell(x) of
/// the vertex quantum: value(x) = ell(x) * i(x). Storing multipliers makes
/// "value is a multiple of i(x)" structural.
class Divisor {
 public:
  explicit Divisor(const Graph& g) : g_(&g), ell_(VecZ::Constant(g.order(), Int(0))) {}
  Divisor(const Graph& g, VecZ ell);

  /// Import from raw rational values; fails unless i(x) divides value(x).
  static Divisor from_values(const Graph& g, const VecQ& values);

  /// Text format, one `<vertex> <integer>` line per vertex (omitted = 0);
  /// `# comment` lines ignored. With raw = true, lines are `<vertex> <p>/<q>`
  /// and each value must be a multiple of i(x).
  static Divisor parse(const Graph& g, std::string_view text, bool raw = false);

  const Graph& graph() const { return *g_; }
  const VecZ& ell() const { return ell_; }
  Int& ell(int x) { return ell_(x); }
  const Int& ell(int x) const { return ell_(x); }

  Rational value(int x) const { return Rational(ell_(x)) * g_->quantum()(x); }
  VecQ values() const;

  Rational degree() const;
  DegreeSplit degree_split() const;
  bool is_effective() const;
  std::vector<int> support() const;

  friend bool operator==(const Divisor& a, const Divisor& b) {
    return a.g_ == b.g_ && a.ell_ == b.ell_;
  }

  Divisor& operator+=(const Divisor& rhs);
  Divisor& operator-=(const Divisor& rhs);
  friend Divisor operator+(Divisor lhs, const Divisor& rhs) { return lhs += rhs; }
  friend Divisor operator-(Divisor lhs, const Divisor& rhs) { return lhs -= rhs; }
  Divisor operator-() const;

 private:
  const Graph* g_;
  VecZ ell_;
};

/// Canonical divisor: K(x) = m(x) - 2 i(x).
Divisor canonical_divisor(const Graph& g);

/// D - (Laplacian of f): positive f(x) fires x, pushing value out of x.
Divisor apply_firing(const Divisor& d, const FiringFunction& f);

/// Firing function f with rhs = apply_firing(d, f) and f(base) = 0, when the
/// exact solution of the linear system is integral; nullopt otherwise (or on
/// a degree mismatch).
std::optional<FiringFunction> equivalence_witness(const Divisor& d, const Divisor& rhs);

/// Total order on the vertex set, stored as a permutation.
class TotalOrder {
 public:
  explicit TotalOrder(std::vector<int> order);
  static TotalOrder identity(int n);

  int size() const { return static_cast<int>(order_.size()); }
  /// Vertex at position k (position 0 is the smallest).
  int at(int k) const { return order_[k]; }
  int position(int x) const { return pos_[x]; }
  bool less(int x, int y) const { return pos_[x] < pos_[y]; }
  TotalOrder reversed() const;
  const std::vector<int>& order() const { return order_; }

 private:
  std::vector<int> order_;  // order_[k] = vertex in slot k
  std::vector<int> pos_;
};

/// nu_O(x) = sum_{y ~ x, y <_O x} C_xy - i(x). Never winnable; nu_O + nu_Obar
/// is the canonical divisor and deg nu_O = -euler.
Divisor nu_divisor(const Graph& g, const TotalOrder& o);

/// (D)_n on D's own graph: multipliers on vertices at base distance >= n are
/// zeroed, keeping the coefficients inside the radius-(n-1) ball.
Divisor restrict_divisor(const Divisor& d, int radius);

/// (D)_n transplanted onto `ball` (the radius-`radius` ball of D's host,
/// matched by vertex name). Kept vertices must carry the same quantum in both
/// graphs; coefficients on the outermost shell are dropped.
Divisor restrict_divisor(const Divisor& d, const Graph& ball, int radius);

}  // namespace chipfire
