#pragma once

#include <Eigen/Dense>

#include "chipfire/divisor.hpp"

namespace chipfire {

/// Dirichlet energy: sum over edges of C_xy (f(x) - f(y))^2, exact.
Rational dirichlet_energy(const Graph& g, const VecQ& f);
/// Energy of the induced subgraph on `subset` (edges with both ends inside).
Rational dirichlet_energy(const Graph& g, const VecQ& f, const std::vector<int>& subset);
/// Subgraph energy normalized by the subgraph volume m_U(V_U).
Rational dirichlet_energy_normalized(const Graph& g, const VecQ& f,
                                     const std::vector<int>& subset);

/// Exact squared L^2(mu) norm, mu = m / m(V).
Rational mu_norm_sq(const Graph& g, const VecQ& f);
/// Exact mu-inner product of f with 1 (the mu-mean).
Rational mu_mean(const Graph& g, const VecQ& f);

struct SpectralResult {
  std::vector<double> eigenvalues;  // ascending; contains an exact 0
  double gap = 0;                   // smallest nonzero eigenvalue of L = (1/m) Delta
  Eigen::VectorXd gap_vector;       // mu-mean zero, mu-norm 1, first nonzero entry > 0
  int sweeps = 0;                   // Jacobi sweeps used
};

/// Eigenvalues of L via the symmetric conjugate M^{-1/2} Delta M^{-1/2}.
/// The kernel direction (sqrt of the masses) is deflated exactly by a
/// Householder reflection; cyclic Jacobi handles the rest. Throws
/// ConvergenceError when 100 sweeps cannot push the off-diagonal Frobenius
/// norm under 1e-12, and when the returned eigenpair's residual exceeds 1e-9.
SpectralResult spectral_gap(const Graph& g);

/// Exact solve of L u = rhs with (u, 1)_mu = 0. The right-hand side must be
/// exactly mu-mean-zero.
VecQ resolvent_solve(const Graph& g, const VecQ& rhs);

/// Smaller and larger roots of
///   (e^a - e^-a) t^2 - 2 (e^a - 2 e^-a + 1) t + (1 - 2 e^-a) = 0,
/// parametrized by u = e^a (u > 2 keeps both roots real and positive). The
/// smaller root is evaluated as 2c / (-b + sqrt(b^2 - 4ac)) so it is exactly
/// 0.0 at u = 2.
std::pair<double, double> poincare_b_exp(double u);
std::pair<double, double> poincare_b(double a);

struct PoincareThreshold {
  double A = 0;         // max of the smaller root over a > log 2
  double argmax_a = 0;  // location of the maximum
};

/// Grid scan of the smaller root followed by golden-section refinement of the
/// maximizer to 1e-6.
PoincareThreshold poincare_threshold(double a_min = 0.70, double a_max = 8.0,
                                     double step = 1e-3);

struct InequalityProbe {
  // boundary-crossing estimate: E_U(f,f)/m(V) <= (eps/2)||f||^2 + E(f,f)/(eps m(V))
  Rational cross_lhs, cross_rhs;
  bool cross_holds = false;
  // shell escape estimate (only when U is a metric ball V_n):
  // sum_{x in V_n, y outside} f(x)^2 C_xy <= rho_n m(V) ||f||^2
  bool is_ball = false;
  int ball_radius = -1;
  Rational rho_n;
  Rational escape_lhs, escape_rhs;
  bool escape_holds = false;
};

/// Exact evaluation of the two subset inequalities above. `subset` need not
/// be a ball; the escape estimate is evaluated only when it is one.
InequalityProbe inequality_probe(const Graph& g, const std::vector<int>& subset,
                                 const VecQ& f, const Rational& eps);

struct HarmonicExtension {
  VecQ h;                    // equal to the data inside, harmonic outside
  VecZ gfloor;               // floor(h) pointwise
  Rational max_inner;        // max |data| on the inner set
  Rational max_all;          // max |h| everywhere
  bool max_principle_ok = false;
  Rational floor_ratio_max;  // max over annulus of |Delta floor(h)| / m
  bool floor_bound_ok = false;  // floor_ratio_max <= 2
  Rational annulus_l1;          // sum over annulus of |Delta floor(h)|
  Rational annulus_l1_bound;    // 2 m(annulus)
  bool l1_ok = false;
};

/// Exact Dirichlet extension: h = f on the inner ball, (Delta h) = 0 on the
/// complement (the annulus). `inner` must be a metric ball around the base,
/// strictly contained in the vertex set; `f` holds the integer data indexed
/// like `inner`.
HarmonicExtension harmonic_extension(const Graph& g, const std::vector<int>& inner,
                                     const VecZ& f);

}  // namespace chipfire
