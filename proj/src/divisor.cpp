#include "chipfire/divisor.hpp"

#include <algorithm>
#include <sstream>

#include "chipfire/errors.hpp"
#include "chipfire/solve.hpp"

namespace chipfire {

Divisor::Divisor(const Graph& g, VecZ ell) : g_(&g), ell_(std::move(ell)) {
  if (ell_.size() != g.order()) throw ValidationError("divisor: multiplier size mismatch");
}

Divisor Divisor::from_values(const Graph& g, const VecQ& values) {
  if (values.size() != g.order()) throw ValidationError("divisor: value size mismatch");
  VecZ ell = VecZ::Constant(g.order(), Int(0));
  for (int x = 0; x < g.order(); ++x) {
    Rational ratio = values(x) / g.quantum()(x);
    if (!ratio.is_integer())
      throw ValidationError("divisor: value " + values(x).str() + " at '" + g.name(x) +
                            "' is not a multiple of the vertex quantum " +
                            g.quantum()(x).str());
    ell(x) = ratio.num();
  }
  return Divisor(g, std::move(ell));
}

Divisor Divisor::parse(const Graph& g, std::string_view text, bool raw) {
  VecZ ell = VecZ::Constant(g.order(), Int(0));
  std::vector<char> seen(g.order(), 0);
  std::istringstream lines{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream toks(line);
    std::string name, amount, extra;
    if (!(toks >> name) || name[0] == '#') continue;
    auto fail = [&](const std::string& msg) -> ParseError {
      return ParseError("divisor line " + std::to_string(lineno) + ": " + msg);
    };
    if (!(toks >> amount) || (toks >> extra)) throw fail("expected '<vertex> <amount>'");
    int x = g.find(name);
    if (x < 0) throw fail("unknown vertex '" + name + "'");
    if (seen[x]) throw fail("repeated vertex '" + name + "'");
    seen[x] = 1;
    Rational val;
    try {
      val = Rational::parse(amount);
    } catch (const ParseError& e) {
      throw fail(e.what());
    }
    if (!raw) {
      if (!val.is_integer()) throw fail("expected an integer multiplier, got '" + amount + "'");
      ell(x) = val.num();
    } else {
      Rational ratio = val / g.quantum()(x);
      if (!ratio.is_integer())
        throw fail("value " + val.str() + " is not a multiple of the quantum " +
                   g.quantum()(x).str() + " at '" + name + "'");
      ell(x) = ratio.num();
    }
  }
  return Divisor(g, std::move(ell));
}

VecQ Divisor::values() const {
  VecQ out = VecQ::Constant(g_->order(), Rational(0));
  for (int x = 0; x < g_->order(); ++x) out(x) = value(x);
  return out;
}

Rational Divisor::degree() const {
  Rational deg(0);
  for (int x = 0; x < g_->order(); ++x) deg += value(x);
  return deg;
}

DegreeSplit Divisor::degree_split() const {
  DegreeSplit ds{Rational(0), Rational(0), Rational(0)};
  for (int x = 0; x < g_->order(); ++x) {
    Rational v = value(x);
    ds.deg += v;
    if (v.sign() > 0) ds.plus += v;
    if (v.sign() < 0) ds.minus -= v;
  }
  return ds;
}

bool Divisor::is_effective() const {
  for (int x = 0; x < g_->order(); ++x)
    if (ell_(x) < 0) return false;
  return true;
}

std::vector<int> Divisor::support() const {
  std::vector<int> out;
  for (int x = 0; x < g_->order(); ++x)
    if (ell_(x) != 0) out.push_back(x);
  return out;
}

Divisor& Divisor::operator+=(const Divisor& rhs) {
  if (g_ != &rhs.graph()) throw ValidationError("divisor arithmetic across graphs");
  for (int x = 0; x < g_->order(); ++x) ell_(x) += rhs.ell_(x);
  return *this;
}

Divisor& Divisor::operator-=(const Divisor& rhs) {
  if (g_ != &rhs.graph()) throw ValidationError("divisor arithmetic across graphs");
  for (int x = 0; x < g_->order(); ++x) ell_(x) -= rhs.ell_(x);
  return *this;
}

Divisor Divisor::operator-() const {
  Divisor out = *this;
  for (int x = 0; x < g_->order(); ++x) out.ell_(x) = -ell_(x);
  return out;
}

Divisor canonical_divisor(const Graph& g) {
  return Divisor(g, g.invariants().canonical_ell);
}

Divisor apply_firing(const Divisor& d, const FiringFunction& f) {
  const Graph& g = d.graph();
  const int n = g.order();
  if (f.size() != n) throw ValidationError("apply_firing: size mismatch");
  VecZ ell = d.ell();
  for (int x = 0; x < n; ++x) {
    Int delta(0);  // scale() * (Laplacian of f)(x), an exact integer
    for (const auto& [y, w] : g.adjacency_scaled()[x]) delta += w * (f(x) - f(y));
    Int step;
    mpz_divexact(step.get_mpz_t(), delta.get_mpz_t(), g.quantum_scaled()(x).get_mpz_t());
    ell(x) -= step;
  }
  return Divisor(g, std::move(ell));
}

std::optional<FiringFunction> equivalence_witness(const Divisor& d, const Divisor& rhs) {
  const Graph& g = d.graph();
  if (&g != &rhs.graph()) throw ValidationError("equivalence_witness: different graphs");
  if (d.degree() != rhs.degree()) return std::nullopt;

  const int n = g.order();
  if (n == 1) return FiringFunction::Constant(1, Int(0));

  // Solve (Laplacian f) = d - rhs with f(base) = 0: drop the base row/column.
  // The dropped row holds automatically because both sides sum to zero.
  std::vector<int> rest;
  for (int x = 0; x < n; ++x)
    if (x != g.base()) rest.push_back(x);
  const int k = n - 1;
  MatQ a = MatQ::Constant(k, k, Rational(0));
  VecQ b = VecQ::Constant(k, Rational(0));
  for (int r = 0; r < k; ++r) {
    int x = rest[r];
    a(r, r) = g.mass()(x);
    b(r) = d.value(x) - rhs.value(x);
  }
  for (int r = 0; r < k; ++r)
    for (const auto& [y, w] : g.neighbors(rest[r]))
      if (y != g.base()) {
        int c = static_cast<int>(std::lower_bound(rest.begin(), rest.end(), y) - rest.begin());
        a(r, c) -= w;
      }
  VecQ sol = solve_linear(std::move(a), std::move(b));

  FiringFunction f = FiringFunction::Constant(n, Int(0));
  for (int r = 0; r < k; ++r) {
    if (!sol(r).is_integer()) return std::nullopt;
    f(rest[r]) = sol(r).num();
  }
  return f;
}

TotalOrder::TotalOrder(std::vector<int> order) : order_(std::move(order)) {
  const int n = static_cast<int>(order_.size());
  pos_.assign(n, -1);
  for (int k = 0; k < n; ++k) {
    int x = order_[k];
    if (x < 0 || x >= n || pos_[x] >= 0)
      throw ValidationError("total order: not a permutation");
    pos_[x] = k;
  }
}

TotalOrder TotalOrder::identity(int n) {
  std::vector<int> order(n);
  for (int k = 0; k < n; ++k) order[k] = k;
  return TotalOrder(std::move(order));
}

TotalOrder TotalOrder::reversed() const {
  std::vector<int> rev(order_.rbegin(), order_.rend());
  return TotalOrder(std::move(rev));
}

Divisor nu_divisor(const Graph& g, const TotalOrder& o) {
  const int n = g.order();
  if (o.size() != n) throw ValidationError("nu_divisor: order size mismatch");
  VecZ ell = VecZ::Constant(n, Int(0));
  for (int x = 0; x < n; ++x) {
    Int below(0);  // scale() * sum of weights toward smaller vertices
    for (const auto& [y, w] : g.adjacency_scaled()[x])
      if (o.less(y, x)) below += w;
    below -= g.quantum_scaled()(x);
    Int step;
    mpz_divexact(step.get_mpz_t(), below.get_mpz_t(), g.quantum_scaled()(x).get_mpz_t());
    ell(x) = step;
  }
  return Divisor(g, std::move(ell));
}

Divisor restrict_divisor(const Divisor& d, int radius) {
  const Graph& g = d.graph();
  VecZ ell = d.ell();
  for (int x = 0; x < g.order(); ++x)
    if (g.metric().dist(x) >= radius) ell(x) = 0;
  return Divisor(g, std::move(ell));
}

Divisor restrict_divisor(const Divisor& d, const Graph& ball, int radius) {
  const Graph& host = d.graph();
  VecZ ell = VecZ::Constant(ball.order(), Int(0));
  for (int x = 0; x < ball.order(); ++x) {
    if (ball.metric().dist(x) >= radius) continue;
    int hx = host.find(ball.name(x));
    if (hx < 0) continue;
    if (ball.quantum()(x) != host.quantum()(hx))
      throw ValidationError("restrict_divisor: quantum mismatch at '" + ball.name(x) +
                            "' (ball is not a deep enough ball of the host)");
    ell(x) = d.ell(hx);
  }
  return Divisor(ball, std::move(ell));
}

}  // namespace chipfire
