#include "chipfire/family.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <deque>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <regex>
#include <set>
#include <thread>
#include <utility>

namespace chipfire {

namespace {

// Weights 2^(-2^k) double in bit length with every level; past this depth the
// exact arithmetic (scale = lcm of denominators) stops being practical.
constexpr int kDoubleExpDepthCap = 24;
constexpr int kGeometricDepthCap = 64;

Rational dexp_w(long k) {
  if (k < 0) throw ValidationError("negative depth");
  if (k > kDoubleExpDepthCap)
    throw StructuralError("double-exponential family depth limit (24) exceeded");
  return dyadic(1UL << k);
}

long parse_ray_index(const std::string& id, const std::string& family) {
  if (id.empty() || id.size() > 9 ||
      !std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isdigit(c); }) ||
      (id.size() > 1 && id[0] == '0'))
    throw ValidationError("family " + family + " has no vertex '" + id + "'");
  return std::stol(id);
}

int clamp_jobs(int jobs, int count) {
  return std::max(1, std::min({jobs, count, 16}));
}

// Run fn(0..count-1) on `jobs` threads; the first exception wins.
void run_indexed(int count, int jobs, const std::function<void(int)>& fn) {
  jobs = clamp_jobs(jobs, count);
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace

Family Family::ray_double_exp() {
  Family f;
  f.name_ = "ray-double-exp";
  f.base_ = "0";
  f.gen_ = [](const std::string& id) {
    const long k = parse_ray_index(id, "ray-double-exp");
    std::vector<std::pair<std::string, Rational>> out;
    if (k > 0) out.emplace_back(std::to_string(k - 1), dexp_w(k - 1));
    out.emplace_back(std::to_string(k + 1), dexp_w(k));
    return out;
  };
  // m(V \ V_n) = sum_{k>n} (w_{k-1} + w_k) <= 2 w_n + 2 w_{n+1} since the
  // terms at least square at each step.
  f.tail_ = [](int n) { return Rational(2) * (dexp_w(n) + dexp_w(n + 1)); };
  f.volume_ = Rational(7, 4);  // 2 sum w_k <= 2 (w_0 + w_1 + 2 w_2)
  return f;
}

Family Family::ray_geometric(const Rational& ratio) {
  if (ratio.sign() <= 0 || !(ratio < Rational(1)))
    throw ValidationError("geometric ratio must lie strictly between 0 and 1");
  Family f;
  f.name_ = "ray-geometric";
  f.base_ = "0";
  f.gen_ = [ratio](const std::string& id) {
    const long k = parse_ray_index(id, "ray-geometric");
    if (k > kGeometricDepthCap)
      throw StructuralError("geometric family depth limit (64) exceeded");
    std::vector<std::pair<std::string, Rational>> out;
    if (k > 0)
      out.emplace_back(std::to_string(k - 1),
                       pow(ratio, static_cast<unsigned long>(k - 1)));
    out.emplace_back(std::to_string(k + 1), pow(ratio, static_cast<unsigned long>(k)));
    return out;
  };
  // Exact: sum_{k>n} (r^{k-1} + r^k) = (1 + r) r^n / (1 - r).
  f.tail_ = [ratio](int n) {
    return (Rational(1) + ratio) * pow(ratio, static_cast<unsigned long>(n)) /
           (Rational(1) - ratio);
  };
  f.volume_ = Rational(2) / (Rational(1) - ratio);
  return f;
}

Family Family::tree_double_exp() {
  Family f;
  f.name_ = "tree-double-exp";
  f.base_ = "v";
  auto check = [](const std::string& id) {
    const bool ok = !id.empty() && id[0] == 'v' &&
                    std::all_of(id.begin() + 1, id.end(),
                                [](char c) { return c == '0' || c == '1'; });
    if (!ok)
      throw ValidationError("family tree-double-exp has no vertex '" + id + "'");
    return static_cast<long>(id.size()) - 1;  // depth
  };
  f.gen_ = [check](const std::string& id) {
    const long depth = check(id);
    std::vector<std::pair<std::string, Rational>> out;
    if (depth > 0)
      out.emplace_back(id.substr(0, id.size() - 1), dexp_w(depth - 1));
    out.emplace_back(id + "0", dexp_w(depth));
    out.emplace_back(id + "1", dexp_w(depth));
    return out;
  };
  // m(V \ V_n) = 2^{n+1} w_n + sum_{k>n} 2^{k+2} w_k; for n >= 1 the tail
  // terms at least halve, giving <= 2^{n+1} w_n + 2^{n+3} w_{n+1}
  // <= 3 * 2^{n+1} w_n <= 2^{n+3} w_n. Depth 0 falls back to the volume.
  f.tail_ = [](int n) {
    if (n == 0) return Rational(6);
    const Int p2 = Int(1) << static_cast<unsigned long>(n + 3);
    return Rational(p2) * dexp_w(n);
  };
  f.volume_ = Rational(7);  // m(V_1) = 3 plus the depth-1 tail bound 4
  return f;
}

Family Family::lollipop(Graph core, const Rational& scale, const std::string& attach) {
  if (scale.sign() <= 0) throw ValidationError("lollipop scale must be positive");
  static const std::regex tail_name("^tail[0-9]+$");
  for (int v = 0; v < core.order(); ++v)
    if (std::regex_match(core.name(v), tail_name))
      throw ValidationError("lollipop core must not use reserved name '" +
                            core.name(v) + "'");
  const std::string attach_name = attach.empty() ? core.name(core.base()) : attach;
  const int attach_idx = core.index(attach_name);  // throws if unknown
  const int attach_dist = core.metric().dist(attach_idx);

  Family f;
  f.name_ = "lollipop";
  f.base_ = core.name(core.base());
  // Core mass beyond each radius, once; tail vertices never shorten core
  // distances, so the core metric is the family metric on core vertices.
  std::vector<Rational> core_beyond(core.metric().diameter + 2, Rational(0));
  for (int v = 0; v < core.order(); ++v) {
    const int d = core.metric().dist(v);
    for (int n = 0; n < d && n < static_cast<int>(core_beyond.size()); ++n)
      core_beyond[n] += core.mass()(v);
  }
  f.volume_ = core.total_mass() + scale * Rational(7, 4);
  auto corep = std::make_shared<const Graph>(std::move(core));
  f.gen_ = [corep, scale, attach_name](const std::string& id) {
    std::vector<std::pair<std::string, Rational>> out;
    std::smatch m;
    static const std::regex tail_name_local("^tail([0-9]{1,9})$");
    if (std::regex_match(id, m, tail_name_local)) {
      const long k = std::stol(m[1].str());
      if (k < 1)
        throw ValidationError("family lollipop has no vertex '" + id + "'");
      out.emplace_back(k == 1 ? attach_name : "tail" + std::to_string(k - 1),
                       scale * dexp_w(k - 1));
      out.emplace_back("tail" + std::to_string(k + 1), scale * dexp_w(k));
      return out;
    }
    const int v = corep->find(id);
    if (v < 0) throw ValidationError("family lollipop has no vertex '" + id + "'");
    for (const auto& [u, w] : corep->neighbors(v)) out.emplace_back(corep->name(u), w);
    if (id == attach_name) out.emplace_back("tail1", scale * dexp_w(0));
    return out;
  };
  f.tail_ = [core_beyond, scale, attach_dist](int n) {
    Rational t = n < static_cast<int>(core_beyond.size()) ? core_beyond[n] : Rational(0);
    if (attach_dist > n) t += scale * dexp_w(0);  // attach's own tail edge
    const int j = std::max(0, n - attach_dist);
    t += scale * Rational(2) * (dexp_w(j) + dexp_w(j + 1));
    return t;
  };
  return f;
}

Rational Family::tail_mass_upper(int n) const {
  if (n < 0) throw ValidationError("tail bound needs a nonnegative radius");
  return tail_(n);
}

int n_for_tail(const Family& fam, const Rational& eps) {
  if (eps.sign() <= 0) throw ValidationError("eps must be positive");
  for (int n = 0; n <= kDoubleExpDepthCap; ++n)
    if (fam.tail_mass_upper(n) < eps) return n;
  throw ValidationError("tail bound does not drop below eps within the depth limit");
}

Ball build_ball(const Family& fam, int n) {
  if (n < 1) throw ValidationError("ball radius must be at least 1");
  // Breadth-first expansion; neighbor lists of in-ball vertices carry the
  // ambient ring, so masses are exact without materializing it.
  std::map<std::string, int> dist;
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<std::string, Rational>>> nbrs;
  std::deque<std::string> queue{fam.base()};
  dist[fam.base()] = 0;
  while (!queue.empty()) {
    const std::string x = queue.front();
    queue.pop_front();
    order.push_back(x);
    const int d = dist.at(x);
    nbrs[x] = fam.neighbors(x);
    for (const auto& [y, w] : nbrs[x]) {
      if (w.sign() <= 0)
        throw StructuralError("family generator produced a nonpositive weight on " +
                              x + " - " + y);
      if (y == x) throw StructuralError("family generator produced a loop at " + x);
      if (d < n && !dist.count(y)) {
        dist[y] = d + 1;
        queue.push_back(y);
      }
    }
  }

  int max_dist = 0;
  for (const auto& [name, d] : dist) max_dist = std::max(max_dist, d);
  if (max_dist != n)
    throw StructuralError("family ran out of vertices before radius " +
                          std::to_string(n));

  std::map<std::string, int> disc;
  for (size_t i = 0; i < order.size(); ++i) disc[order[i]] = static_cast<int>(i);

  std::vector<std::tuple<std::string, std::string, Rational>> edges;
  for (const std::string& x : order) {
    for (const auto& [y, w] : nbrs.at(x)) {
      auto it = disc.find(y);
      if (it == disc.end() || it->second <= disc.at(x)) continue;
      // Symmetry spot-check against the other endpoint's list.
      const auto& back = nbrs.at(y);
      auto rev = std::find_if(back.begin(), back.end(),
                              [&](const auto& p) { return p.first == x; });
      if (rev == back.end() || !(rev->second == w))
        throw StructuralError("family generator is not symmetric on " + x + " - " + y);
      edges.emplace_back(x, y, w);
    }
  }

  Ball ball{Graph::from_edges(edges, fam.base()), n, VecQ()};
  ball.ambient_mass = VecQ::Constant(ball.graph.order(), Rational(0));
  Rational total(0);
  for (int v = 0; v < ball.graph.order(); ++v) {
    Rational m(0);
    for (const auto& [y, w] : nbrs.at(ball.graph.name(v))) {
      (void)y;
      m += w;
    }
    ball.ambient_mass(v) = m;
    total += m;
  }
  if (!(total <= fam.volume_upper()))
    throw StructuralError("family generator exceeds its declared volume bound");
  return ball;
}

Rational shell_rho(const Ball& ball) {
  const Graph& g = ball.graph;
  const auto& mp = g.metric();
  Rational best(0);
  bool first = true;
  for (int x : mp.shells.at(ball.radius)) {
    Rational m_minus(0);
    for (const auto& [y, w] : g.neighbors(x))
      if (mp.dist(y) == ball.radius - 1) m_minus += w;
    const Rational rho = Rational(1) - m_minus / ball.ambient_mass(x);
    if (first || best < rho) best = rho;
    first = false;
  }
  return best;
}

ExhaustionSeries exhaustion_series(const Family& fam, int to, bool with_gaps,
                                   int jobs) {
  if (to < 1) throw ValidationError("series needs at least one radius");
  ExhaustionSeries out;
  out.threshold_a = poincare_threshold().A;
  out.rows.resize(to);
  run_indexed(to, jobs, [&](int i) {
    const int n = i + 1;
    const Ball ball = build_ball(fam, n);
    const Graph& g = ball.graph;
    SeriesRow row;
    row.n = n;
    row.rho = shell_rho(ball);
    row.e = g.euler();
    Rational shell_mass(0);
    for (int x : g.metric().shells.at(n)) shell_mass += ball.ambient_mass(x);
    row.mass_shell = shell_mass;
    row.mass_ball = g.total_mass();
    Rational min_m = ball.ambient_mass(0);
    for (int v = 1; v < g.order(); ++v)
      if (ball.ambient_mass(v) < min_m) min_m = ball.ambient_mass(v);
    row.min_mass = min_m;
    row.ratio43 = row.rho * row.mass_shell / row.min_mass;
    if (with_gaps) row.lambda = spectral_gap(g).gap;
    out.rows[i] = std::move(row);
  });
  for (const SeriesRow& row : out.rows) {
    if (!out.first_n_below_a && row.rho.to_double() < out.threshold_a)
      out.first_n_below_a = row.n;
  }
  out.ratio43_strictly_decreasing = true;
  for (size_t i = 1; i < out.rows.size(); ++i)
    if (!(out.rows[i].ratio43 < out.rows[i - 1].ratio43))
      out.ratio43_strictly_decreasing = false;
  return out;
}

Divisor materialize(const SupportDivisor& support, const Graph& g) {
  VecZ ell = VecZ::Constant(g.order(), Int(0));
  for (const auto& [name, c] : support) ell(g.index(name)) += c;
  return Divisor(g, std::move(ell));
}

RankSeries rank_series(const Family& fam, const SupportDivisor& support, int l, int N,
                       long long budget, int stable_k, int jobs) {
  if (l < 1) throw ValidationError("truncation radius must be at least 1");
  if (N <= l) throw ValidationError("series end must exceed the truncation radius");
  if (stable_k < 1) throw ValidationError("stability window must be positive");
  {
    // The support has to sit strictly inside the radius-l ball, so deeper
    // balls all see the same divisor.
    const Ball probe = build_ball(fam, l);
    const Divisor d = materialize(support, probe.graph);
    for (int v = 0; v < probe.graph.order(); ++v)
      if (d.ell(v) != 0 && probe.graph.metric().dist(v) >= l)
        throw ValidationError("support must lie inside the radius-" +
                              std::to_string(l - 1) + " ball");
  }

  const int count = N - l + 1;
  std::vector<RankSeriesRow> rows(count);
  std::vector<bool> exact(count, false);
  run_indexed(count, jobs, [&](int i) {
    const int n = l + i;
    const Ball ball = build_ball(fam, n);
    const Divisor d = materialize(support, ball.graph);
    const RRCheck rr = rr_check(d, -1, budget);
    RankSeriesRow row;
    row.n = n;
    row.r = rr.d_side.rank;
    row.r_kside = rr.k_side.rank;
    row.e = ball.graph.euler();
    row.deg = d.degree();
    row.rr_holds = rr.holds;
    rows[i] = std::move(row);
    exact[i] = rr.exact;
  });

  RankSeries out;
  for (int i = 0; i < count; ++i) {
    if (!exact[i]) {
      out.truncated = true;
      out.note = "enumeration budget exhausted at radius " + std::to_string(l + i);
      break;
    }
    out.rows.push_back(rows[i]);
  }
  if (!out.rows.empty()) {
    int suffix = 1;
    for (size_t i = out.rows.size() - 1; i > 0; --i) {
      if (out.rows[i - 1].r == out.rows[i].r)
        ++suffix;
      else
        break;
    }
    out.stable_suffix = suffix;
    out.stabilized = !out.truncated && suffix >= stable_k;
  }
  return out;
}

InfiniteRRReport infinite_rr_report(
    const Family& fam, const SupportDivisor& support, int l, int N,
    long long budget, int stable_k, int jobs,
    const std::optional<std::pair<SupportDivisor, int>>& second) {
  InfiniteRRReport rep;
  rep.series = rank_series(fam, support, l, N, budget, stable_k, jobs);
  rep.background = exhaustion_series(fam, N, /*with_gaps=*/false, jobs);
  rep.disclaimer =
      "finite window only: each r_n is exact on its ball, but radii beyond " +
      std::to_string(N) + " were not examined and no limit is claimed";
  rep.ratio43_vanishing = rep.background.ratio43_strictly_decreasing;
  if (rep.series.rows.empty()) {
    rep.verdict = "inconclusive";
    return rep;
  }
  const RankSeriesRow& last = rep.series.rows.back();
  rep.r_hat = last.r;
  rep.r_hat_k = last.r_kside;
  rep.e_hat = last.e;
  rep.deg = last.deg;
  rep.residual = rep.r_hat - rep.r_hat_k - rep.deg - rep.e_hat;
  rep.verdict = rep.series.stabilized ? "stabilized" : "inconclusive";
  if (second) {
    const RankSeries other =
        rank_series(fam, second->first, second->second, N, budget, stable_k, jobs);
    if (!other.rows.empty()) {
      const Ball big = build_ball(fam, N);
      const Divisor diff = materialize(second->first, big.graph) -
                           materialize(support, big.graph);
      const DegreeSplit ds = diff.degree_split();
      Rational gap = rep.r_hat - other.rows.back().r;
      if (gap.sign() < 0) gap = -gap;
      rep.pair_gap = gap;
      rep.pair_bound = ds.plus + ds.minus;
      rep.pair_ok = *rep.pair_gap <= *rep.pair_bound;
    }
  }
  return rep;
}

OrderConsistencyReport order_consistency_probe(const Family& fam, int n_small,
                                               const Rational& eps,
                                               const SupportDivisor& support,
                                               long long max_pairs) {
  OrderConsistencyReport rep;
  rep.n_small = n_small;
  rep.n_eps = n_for_tail(fam, eps);
  rep.n_used = std::min(rep.n_eps, n_small - 1);

  const Ball ball = build_ball(fam, n_small);
  const Graph& g = ball.graph;
  const int nv = g.order();
  if (nv > 8) throw ValidationError("order probe is limited to 8-vertex balls");
  const Divisor d = materialize(support, g);
  const Rational igcd = g.quantum_gcd();
  rep.rank_value = rank(d).rank;

  Budget budget(50'000'000);
  struct Entry {
    std::string key;
    Divisor nu;
    Rational val;
  };
  std::vector<Entry> entries;
  std::vector<int> perm(nv);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    TotalOrder o(perm);
    const Divisor nu = nu_divisor(g, o);
    const Divisor w = d - nu;
    const Rational val = w.degree() + *min_winnable_topup(w, budget);
    std::string key;
    for (int v : perm)
      if (g.metric().dist(v) <= rep.n_used) key += std::to_string(v) + ",";
    auto it = rep.class_minima.find(key);
    if (it == rep.class_minima.end())
      rep.class_minima.emplace(key, val);
    else if (val < it->second)
      it->second = val;
    entries.push_back({std::move(key), nu, val});
  } while (std::next_permutation(perm.begin(), perm.end()));

  bool first = true;
  for (const auto& [key, val] : rep.class_minima) {
    (void)key;
    if (first || val < rep.unrestricted_min) rep.unrestricted_min = val;
    first = false;
  }
  rep.min_matches_rank = rep.unrestricted_min == rep.rank_value + igcd;

  // Outer mass in three readings: induced by the ball (for the provable
  // 2x bound) and ambient bracketed by the generator tail (for the per-pair
  // outer-mass comparison).
  rep.provable_bound = Rational(0);
  rep.tail_low = Rational(0);
  for (int v = 0; v < nv; ++v) {
    if (g.metric().dist(v) > rep.n_used) {
      rep.provable_bound += Rational(2) * g.mass()(v);
      rep.tail_low += ball.ambient_mass(v);
    }
  }
  rep.tail_high = rep.tail_low + fam.tail_mass_upper(n_small);

  std::map<std::string, std::vector<size_t>> classes;
  for (size_t i = 0; i < entries.size(); ++i) classes[entries[i].key].push_back(i);
  rep.max_pair_diff = Rational(0);
  for (const auto& [key, members] : classes) {
    (void)key;
    for (size_t a = 0; a < members.size() && rep.pairs_checked < max_pairs; ++a) {
      for (size_t b = a + 1; b < members.size() && rep.pairs_checked < max_pairs; ++b) {
        const DegreeSplit ds =
            (entries[members[a]].nu - entries[members[b]].nu).degree_split();
        const Rational diff = ds.plus + ds.minus;
        ++rep.pairs_checked;
        if (rep.max_pair_diff < diff) rep.max_pair_diff = diff;
        if (diff <= rep.tail_low)
          ++rep.pairs_below_tail;
        else if (diff >= rep.tail_high)
          ++rep.pairs_above_tail;
        else
          ++rep.pairs_unresolved;
      }
    }
  }
  rep.provable_ok = rep.max_pair_diff <= rep.provable_bound;
  return rep;
}

ExtensionProbe eigen_extension_probe(const Family& fam, int n, int big_n,
                                     bool const_override) {
  if (n < 1 || big_n <= n)
    throw ValidationError("extension probe needs 1 <= n < big_n");
  ExtensionProbe rep;
  rep.n = n;
  rep.big_n = big_n;

  const Ball small = build_ball(fam, n);
  const Graph& gs = small.graph;
  const SpectralResult sg = spectral_gap(gs);
  rep.lambda_n = sg.gap;
  rep.rho_n = shell_rho(small);

  Eigen::VectorXd psi = sg.gap_vector;
  const VecQ mu = gs.mu();
  if (const_override) {
    psi = Eigen::VectorXd::Ones(gs.order());
    double mean = 0;
    for (int v = 0; v < gs.order(); ++v) mean += mu(v).to_double() * psi(v);
    psi.array() -= mean;
  }

  double norm_sq = 0, max_sq = 0;
  for (int v = 0; v < gs.order(); ++v) {
    norm_sq += mu(v).to_double() * psi(v) * psi(v);
    max_sq = std::max(max_sq, psi(v) * psi(v));
  }

  const Ball big = build_ball(fam, big_n);
  const Graph& gb = big.graph;
  Eigen::VectorXd ext = Eigen::VectorXd::Zero(gb.order());
  for (int v = 0; v < gb.order(); ++v) {
    const int w = gs.find(gb.name(v));
    if (w >= 0) ext(v) = psi(w);
  }
  double lhs = 0;
  for (const EdgeRec& e : gb.edges()) {
    const double dlt = ext(e.u) - ext(e.v);
    lhs += e.w.to_double() * dlt * dlt;
  }

  // Energy of the zero-extension: the interior part is lambda_n ||psi||^2 and
  // every boundary-crossing edge is dominated through the escape probability,
  // since out-of-ball weight at a shell vertex is at most rho/(1-rho) times
  // its in-ball mass. The tail term is slack for the ring beyond big_n.
  const double mass_n = gs.total_mass().to_double();
  const double rho = rep.rho_n.to_double();
  rep.lhs = lhs;
  rep.rhs = norm_sq * mass_n * (rep.lambda_n + rho / (1 - rho)) +
            2 * fam.tail_mass_upper(big_n).to_double() * max_sq;
  rep.slack = rep.rhs - rep.lhs;
  rep.holds = rep.lhs <= rep.rhs + 1e-12;
  return rep;
}

}  // namespace chipfire
