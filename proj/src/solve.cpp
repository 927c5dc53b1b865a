#include "chipfire/solve.hpp"

#include "chipfire/errors.hpp"

namespace chipfire {

VecQ solve_linear(MatQ a, VecQ b) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.size() != n) throw ValidationError("solve_linear: shape mismatch");

  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    Rational best = abs(a(col, col));
    for (Eigen::Index r = col + 1; r < n; ++r) {
      Rational cand = abs(a(r, col));
      if (cand > best) {
        best = cand;
        pivot = r;
      }
    }
    if (best.is_zero()) throw ValidationError("solve_linear: singular matrix");
    if (pivot != col) {
      a.row(col).swap(a.row(pivot));
      std::swap(b(col), b(pivot));
    }
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (a(r, col).is_zero()) continue;
      Rational factor = a(r, col) / a(col, col);
      for (Eigen::Index c = col; c < n; ++c) a(r, c) -= factor * a(col, c);
      b(r) -= factor * b(col);
    }
  }

  VecQ x = VecQ::Constant(n, Rational(0));
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    Rational acc = b(r);
    for (Eigen::Index c = r + 1; c < n; ++c) acc -= a(r, c) * x(c);
    x(r) = acc / a(r, r);
  }
  return x;
}

}  // namespace chipfire
