#include "chipfire/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "chipfire/errors.hpp"
#include "chipfire/solve.hpp"

namespace chipfire {

namespace {

std::vector<char> subset_mask(const Graph& g, const std::vector<int>& subset) {
  std::vector<char> in(g.order(), 0);
  for (int x : subset) {
    if (x < 0 || x >= g.order()) throw ValidationError("bad subset index");
    if (in[x]) throw ValidationError("repeated subset index");
    in[x] = 1;
  }
  return in;
}

}  // namespace

Rational dirichlet_energy(const Graph& g, const VecQ& f) {
  if (f.size() != g.order()) throw ValidationError("dirichlet_energy: size mismatch");
  Rational acc(0);
  for (const auto& e : g.edges()) {
    Rational d = f(e.u) - f(e.v);
    acc += e.w * d * d;
  }
  return acc;
}

Rational dirichlet_energy(const Graph& g, const VecQ& f, const std::vector<int>& subset) {
  if (f.size() != g.order()) throw ValidationError("dirichlet_energy: size mismatch");
  std::vector<char> in = subset_mask(g, subset);
  Rational acc(0);
  for (const auto& e : g.edges()) {
    if (!in[e.u] || !in[e.v]) continue;
    Rational d = f(e.u) - f(e.v);
    acc += e.w * d * d;
  }
  return acc;
}

Rational dirichlet_energy_normalized(const Graph& g, const VecQ& f,
                                     const std::vector<int>& subset) {
  std::vector<char> in = subset_mask(g, subset);
  Rational volume(0);
  for (int x : subset)
    for (const auto& [y, w] : g.neighbors(x))
      if (in[y]) volume += w;
  if (volume.is_zero())
    throw ValidationError("normalized energy: subset has no internal edges");
  return dirichlet_energy(g, f, subset) / volume;
}

Rational mu_norm_sq(const Graph& g, const VecQ& f) {
  if (f.size() != g.order()) throw ValidationError("mu_norm_sq: size mismatch");
  Rational acc(0);
  for (int x = 0; x < g.order(); ++x) acc += f(x) * f(x) * g.mass()(x);
  return acc / g.total_mass();
}

Rational mu_mean(const Graph& g, const VecQ& f) {
  if (f.size() != g.order()) throw ValidationError("mu_mean: size mismatch");
  Rational acc(0);
  for (int x = 0; x < g.order(); ++x) acc += f(x) * g.mass()(x);
  return acc / g.total_mass();
}

SpectralResult spectral_gap(const Graph& g) {
  const int n = g.order();
  if (n > 2000) throw ValidationError("spectral_gap: graph too large");

  Eigen::VectorXd m(n), sqrtm(n);
  for (int x = 0; x < n; ++x) {
    m(x) = g.mass()(x).to_double();
    sqrtm(x) = std::sqrt(m(x));
  }
  const double mv = g.total_mass().to_double();

  // B = M^{-1/2} Delta M^{-1/2}: unit diagonal, -C/sqrt(m_x m_y) off it.
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (int x = 0; x < n; ++x) b(x, x) = 1.0;
  for (const auto& e : g.edges()) {
    double off = -e.w.to_double() / (sqrtm(e.u) * sqrtm(e.v));
    b(e.u, e.v) = off;
    b(e.v, e.u) = off;
  }

  // Householder reflection sending the exact kernel direction sqrt(m)/|..|
  // to the first coordinate; afterwards row/column 0 are zero up to roundoff
  // and are cleared outright.
  Eigen::VectorXd q = sqrtm / sqrtm.norm();
  Eigen::VectorXd v = q;
  v(0) -= 1.0;
  const double beta = v.squaredNorm();
  Eigen::MatrixXd a = b;
  if (beta > 1e-300) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n) - (2.0 / beta) * (v * v.transpose());
    a = p * b * p;
  }
  a.row(0).setZero();
  a.col(0).setZero();

  const int k = n - 1;
  Eigen::MatrixXd block = a.bottomRightCorner(k, k);
  Eigen::MatrixXd vec = Eigen::MatrixXd::Identity(k, k);
  const double tol = 1e-12;
  int sweeps = 0;
  for (;; ++sweeps) {
    // Summed directly: squaredNorm() minus the diagonal part would cancel
    // catastrophically once the off-diagonal mass is small.
    double off2 = 0;
    for (int p = 0; p < k; ++p)
      for (int r = 0; r < k; ++r)
        if (p != r) off2 += block(p, r) * block(p, r);
    if (std::sqrt(off2) < tol) break;
    if (sweeps >= 100)
      throw ConvergenceError("jacobi sweeps did not converge within 100 sweeps");
    for (int p = 0; p < k; ++p)
      for (int r = p + 1; r < k; ++r) {
        if (block(p, r) == 0.0) continue;
        Eigen::JacobiRotation<double> rot;
        rot.makeJacobi(block, p, r);
        block.applyOnTheLeft(p, r, rot.adjoint());
        block.applyOnTheRight(p, r, rot);
        vec.applyOnTheRight(p, r, rot);
      }
  }

  SpectralResult out;
  out.sweeps = sweeps;
  int gap_idx = 0;
  out.eigenvalues.assign(1, 0.0);  // the deflated kernel eigenvalue, exactly
  for (int i = 0; i < k; ++i) {
    out.eigenvalues.push_back(block(i, i));
    if (block(i, i) < block(gap_idx, gap_idx)) gap_idx = i;
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
  out.gap = block(gap_idx, gap_idx);

  // Undo the reflection and the mass conjugation, then normalize in mu.
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  u.tail(k) = vec.col(gap_idx);
  if (beta > 1e-300) u -= (2.0 * v.dot(u) / beta) * v;
  Eigen::VectorXd psi = u.array() / sqrtm.array();
  double mean = 0;
  for (int x = 0; x < n; ++x) mean += psi(x) * m(x) / mv;
  psi.array() -= mean;
  double norm_sq = 0;
  for (int x = 0; x < n; ++x) norm_sq += psi(x) * psi(x) * m(x) / mv;
  psi /= std::sqrt(norm_sq);
  for (int x = 0; x < n; ++x) {
    if (std::abs(psi(x)) > 1e-12) {
      if (psi(x) < 0) psi = -psi;
      break;
    }
  }
  out.gap_vector = psi;

  double residual = 0;
  for (int x = 0; x < n; ++x) {
    double lx = 0;
    for (const auto& [y, w] : g.neighbors(x)) lx += w.to_double() * (psi(x) - psi(y));
    residual = std::max(residual, std::abs(lx / m(x) - out.gap * psi(x)));
  }
  if (residual > 1e-9) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "spectral gap eigenpair residual %.3e above 1e-9",
                  residual);
    throw ConvergenceError(msg);
  }
  return out;
}

VecQ resolvent_solve(const Graph& g, const VecQ& rhs) {
  const int n = g.order();
  if (rhs.size() != n) throw ValidationError("resolvent_solve: size mismatch");
  Rational pairing(0);
  for (int x = 0; x < n; ++x) pairing += rhs(x) * g.mass()(x);
  if (!pairing.is_zero())
    throw ValidationError("resolvent_solve: right-hand side is not mu-mean-zero");

  // Delta u = m . rhs with u(base) = 0 pins one solution; shifting to the
  // mu-mean-zero representative preserves Delta u.
  std::vector<int> rest;
  for (int x = 0; x < n; ++x)
    if (x != g.base()) rest.push_back(x);
  const int kk = n - 1;
  MatQ a = MatQ::Constant(kk, kk, Rational(0));
  VecQ bb = VecQ::Constant(kk, Rational(0));
  for (int r = 0; r < kk; ++r) {
    int x = rest[r];
    a(r, r) = g.mass()(x);
    bb(r) = g.mass()(x) * rhs(x);
    for (const auto& [y, w] : g.neighbors(x))
      if (y != g.base()) {
        int c = static_cast<int>(std::lower_bound(rest.begin(), rest.end(), y) - rest.begin());
        a(r, c) -= w;
      }
  }
  VecQ sol = solve_linear(std::move(a), std::move(bb));
  VecQ u = VecQ::Constant(n, Rational(0));
  for (int r = 0; r < kk; ++r) u(rest[r]) = sol(r);
  Rational mean = mu_mean(g, u);
  for (int x = 0; x < n; ++x) u(x) -= mean;
  return u;
}

std::pair<double, double> poincare_b_exp(double u) {
  const double a2 = u - 1.0 / u;
  const double b2 = -2.0 * (u - 2.0 / u + 1.0);
  const double c2 = 1.0 - 2.0 / u;
  const double disc = b2 * b2 - 4.0 * a2 * c2;
  const double sq = std::sqrt(std::max(disc, 0.0));
  // smaller root via the product form: exact 0.0 when c2 == 0 (u == 2)
  const double smaller = 2.0 * c2 / (-b2 + sq);
  const double larger = (-b2 + sq) / (2.0 * a2);
  return {smaller, larger};
}

std::pair<double, double> poincare_b(double a) { return poincare_b_exp(std::exp(a)); }

PoincareThreshold poincare_threshold(double a_min, double a_max, double step) {
  if (!(a_min > std::log(2.0)))
    throw ValidationError("poincare_threshold: grid must start above log 2");
  if (!(a_max > a_min) || !(step > 0))
    throw ValidationError("poincare_threshold: bad grid");

  double best_a = a_min;
  double best = poincare_b(a_min).first;
  for (double a = a_min; a <= a_max; a += step) {
    double val = poincare_b(a).first;
    if (val > best) {
      best = val;
      best_a = a;
    }
  }

  // Golden-section refinement around the grid winner.
  double lo = std::max(a_min, best_a - step), hi = std::min(a_max, best_a + step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = poincare_b(x1).first, f2 = poincare_b(x2).first;
  while (hi - lo > 1e-6) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = poincare_b(x2).first;
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = poincare_b(x1).first;
    }
  }
  PoincareThreshold out;
  out.argmax_a = (lo + hi) / 2;
  out.A = poincare_b(out.argmax_a).first;
  if (best > out.A) {  // refinement should never lose to the grid
    out.A = best;
    out.argmax_a = best_a;
  }
  return out;
}

InequalityProbe inequality_probe(const Graph& g, const std::vector<int>& subset,
                                 const VecQ& f, const Rational& eps) {
  if (f.size() != g.order()) throw ValidationError("inequality_probe: size mismatch");
  if (eps.sign() <= 0) throw ValidationError("inequality_probe: eps must be positive");
  std::vector<char> in = subset_mask(g, subset);
  if (subset.empty()) throw ValidationError("inequality_probe: empty subset");

  InequalityProbe out;
  const Rational mv = g.total_mass();
  const Rational norm_sq = mu_norm_sq(g, f);
  const Rational energy = dirichlet_energy(g, f);

  // sum_{x in U} f(x) (1/m) Delta_U f(x) mu(x) = E_U(f,f) / m(V)
  out.cross_lhs = dirichlet_energy(g, f, subset) / mv;
  out.cross_rhs = eps / Rational(2) * norm_sq + energy / (eps * mv);
  out.cross_holds = out.cross_lhs <= out.cross_rhs;

  const auto& dist = g.metric().dist;
  int radius = 0;
  for (int x : subset) radius = std::max(radius, dist(x));
  bool ball = true;
  for (int x = 0; x < g.order(); ++x)
    if ((dist(x) <= radius) != static_cast<bool>(in[x])) ball = false;
  out.is_ball = ball;
  if (!ball) return out;
  out.ball_radius = radius;

  TransitionProfile tp = transition_profile(g);
  Rational rho(0);
  for (int x : subset) {
    if (dist(x) != radius) continue;
    Rational esc = Rational(1) - tp.m_minus(x) / g.mass()(x);
    if (esc > rho) rho = esc;
  }
  out.rho_n = rho;

  Rational lhs(0);
  for (int x : subset)
    for (const auto& [y, w] : g.neighbors(x))
      if (!in[y]) lhs += f(x) * f(x) * w;
  out.escape_lhs = lhs;
  out.escape_rhs = rho * mv * norm_sq;
  out.escape_holds = out.escape_lhs <= out.escape_rhs;
  return out;
}

HarmonicExtension harmonic_extension(const Graph& g, const std::vector<int>& inner,
                                     const VecZ& f) {
  const int n = g.order();
  std::vector<char> in = subset_mask(g, inner);
  if (inner.empty()) throw ValidationError("harmonic_extension: empty inner set");
  if (static_cast<int>(inner.size()) == n)
    throw ValidationError("harmonic_extension: inner set must be strictly contained");
  if (f.size() != static_cast<Eigen::Index>(inner.size()))
    throw ValidationError("harmonic_extension: data size mismatch");

  const auto& dist = g.metric().dist;
  int radius = 0;
  for (int x : inner) radius = std::max(radius, dist(x));
  for (int x = 0; x < n; ++x)
    if ((dist(x) <= radius) != static_cast<bool>(in[x]))
      throw ValidationError("harmonic_extension: inner set must be a metric ball");

  VecQ h = VecQ::Constant(n, Rational(0));
  for (std::size_t i = 0; i < inner.size(); ++i) h(inner[i]) = Rational(f(i));

  std::vector<int> annulus;
  for (int x = 0; x < n; ++x)
    if (!in[x]) annulus.push_back(x);
  const int k = static_cast<int>(annulus.size());
  MatQ a = MatQ::Constant(k, k, Rational(0));
  VecQ bb = VecQ::Constant(k, Rational(0));
  for (int r = 0; r < k; ++r) {
    int x = annulus[r];
    a(r, r) = g.mass()(x);
    for (const auto& [y, w] : g.neighbors(x)) {
      if (in[y]) {
        bb(r) += w * h(y);
      } else {
        int c = static_cast<int>(std::lower_bound(annulus.begin(), annulus.end(), y) -
                                 annulus.begin());
        a(r, c) -= w;
      }
    }
  }
  VecQ sol = solve_linear(std::move(a), std::move(bb));
  for (int r = 0; r < k; ++r) h(annulus[r]) = sol(r);

  HarmonicExtension out;
  out.h = h;
  out.gfloor = VecZ::Constant(n, Int(0));
  for (int x = 0; x < n; ++x) out.gfloor(x) = h(x).floor_int();

  out.max_inner = Rational(0);
  for (int x : inner) out.max_inner = std::max(out.max_inner, abs(h(x)));
  out.max_all = Rational(0);
  for (int x = 0; x < n; ++x) out.max_all = std::max(out.max_all, abs(h(x)));
  out.max_principle_ok = out.max_all <= out.max_inner;

  VecQ delta_floor = laplacian_apply(g, out.gfloor);
  out.floor_ratio_max = Rational(0);
  out.annulus_l1 = Rational(0);
  Rational annulus_mass(0);
  for (int x : annulus) {
    Rational mag = abs(delta_floor(x));
    out.annulus_l1 += mag;
    annulus_mass += g.mass()(x);
    Rational ratio = mag / g.mass()(x);
    if (ratio > out.floor_ratio_max) out.floor_ratio_max = ratio;
  }
  out.floor_bound_ok = out.floor_ratio_max <= Rational(2);
  out.annulus_l1_bound = Rational(2) * annulus_mass;
  out.l1_ok = out.annulus_l1 <= out.annulus_l1_bound;
  return out;
}

}  // namespace chipfire
