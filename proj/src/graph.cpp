#include "chipfire/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "chipfire/errors.hpp"

namespace chipfire {

namespace {

bool is_token(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

MetricProfile compute_metric(int n,
                             const std::vector<std::vector<std::pair<int, Rational>>>& adj,
                             int base) {
  MetricProfile mp;
  mp.base = base;
  mp.dist = Eigen::VectorXi::Constant(n, -1);
  mp.dist(base) = 0;
  std::deque<int> queue{base};
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    for (const auto& [y, w] : adj[x]) {
      if (mp.dist(y) < 0) {
        mp.dist(y) = mp.dist(x) + 1;
        queue.push_back(y);
      }
    }
  }
  mp.diameter = mp.dist.maxCoeff();
  mp.shells.assign(mp.diameter + 1, {});
  // unreachable vertices (dist -1) stay out; the caller rejects them
  for (int x = 0; x < n; ++x)
    if (mp.dist(x) >= 0) mp.shells[mp.dist(x)].push_back(x);
  return mp;
}

}  // namespace

Graph Graph::parse(std::string_view text) {
  Graph g;
  bool have_base = false;
  std::string base_name;

  auto intern = [&g](const std::string& name) {
    auto it = g.index_.find(name);
    if (it != g.index_.end()) return it->second;
    int idx = static_cast<int>(g.names_.size());
    g.names_.push_back(name);
    g.index_.emplace(name, idx);
    return idx;
  };

  std::istringstream lines{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream toks(line);
    std::string word;
    if (!(toks >> word) || word[0] == '#') continue;
    auto fail = [&](const std::string& msg) -> ParseError {
      return ParseError("graph line " + std::to_string(lineno) + ": " + msg);
    };
    if (word == "base") {
      std::string v, extra;
      if (!(toks >> v) || (toks >> extra)) throw fail("expected 'base <vertex>'");
      if (!is_token(v)) throw fail("bad vertex token '" + v + "'");
      if (have_base) throw fail("duplicate base line");
      have_base = true;
      base_name = v;
      intern(v);
    } else if (word == "edge") {
      std::string u, v, w, extra;
      if (!(toks >> u >> v >> w) || (toks >> extra))
        throw fail("expected 'edge <u> <v> <weight>'");
      if (!is_token(u)) throw fail("bad vertex token '" + u + "'");
      if (!is_token(v)) throw fail("bad vertex token '" + v + "'");
      Rational weight;
      try {
        weight = Rational::parse(w);
      } catch (const ParseError& e) {
        throw fail(e.what());
      }
      g.edges_.push_back({intern(u), intern(v), weight});
    } else {
      throw fail("unknown directive '" + word + "'");
    }
  }
  if (!have_base) throw ParseError("graph: missing base line");
  g.base_ = g.index_.at(base_name);
  g.finalize();
  return g;
}

Graph Graph::from_edges(
    const std::vector<std::tuple<std::string, std::string, Rational>>& edges,
    const std::string& base) {
  Graph g;
  auto intern = [&g](const std::string& name) {
    if (!is_token(name)) throw ParseError("bad vertex token '" + name + "'");
    auto it = g.index_.find(name);
    if (it != g.index_.end()) return it->second;
    int idx = static_cast<int>(g.names_.size());
    g.names_.push_back(name);
    g.index_.emplace(name, idx);
    return idx;
  };
  intern(base);
  for (const auto& [u, v, w] : edges) g.edges_.push_back({intern(u), intern(v), w});
  g.base_ = g.index_.at(base);
  g.finalize();
  return g;
}

void Graph::finalize() {
  const int n = order();
  if (edges_.empty()) throw ValidationError("graph has no edges");

  std::set<std::pair<int, int>> seen;
  for (const auto& e : edges_) {
    if (e.u == e.v) throw StructuralError("loop at vertex '" + names_[e.u] + "'");
    if (e.w.sign() <= 0)
      throw ParseError("nonpositive weight on edge " + names_[e.u] + " " + names_[e.v]);
    auto key = std::minmax(e.u, e.v);
    if (!seen.insert(key).second)
      throw ParseError("duplicate edge " + names_[e.u] + " " + names_[e.v]);
  }

  adj_.assign(n, {});
  for (const auto& e : edges_) {
    adj_[e.u].emplace_back(e.v, e.w);
    adj_[e.v].emplace_back(e.u, e.w);
  }
  for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end(), [](auto& a, auto& b) {
    return a.first < b.first;
  });

  metric_ = compute_metric(n, adj_, base_);
  if (metric_.dist.minCoeff() < 0) {
    int x = 0;
    while (metric_.dist(x) >= 0) ++x;
    throw StructuralError("graph is disconnected: '" + names_[x] +
                          "' unreachable from base");
  }

  inv_.mass = VecQ::Constant(n, Rational(0));
  inv_.quantum = VecQ::Constant(n, Rational(0));
  for (const auto& e : edges_) {
    inv_.mass(e.u) += e.w;
    inv_.mass(e.v) += e.w;
    inv_.quantum(e.u) = gcd(inv_.quantum(e.u), e.w);
    inv_.quantum(e.v) = gcd(inv_.quantum(e.v), e.w);
  }
  inv_.total_mass = Rational(0);
  inv_.quantum_gcd = Rational(0);
  inv_.euler = Rational(0);
  inv_.canonical_ell = VecZ::Constant(n, Int(0));
  for (int x = 0; x < n; ++x) {
    inv_.total_mass += inv_.mass(x);
    inv_.quantum_gcd = gcd(inv_.quantum_gcd, inv_.quantum(x));
    inv_.euler += inv_.quantum(x);
    Rational ratio = inv_.mass(x) / inv_.quantum(x);
    inv_.canonical_ell(x) = ratio.num() - 2;  // m/i is an integer by gcd
  }
  for (const auto& e : edges_) inv_.euler -= e.w;

  inv_.scale = Int(1);
  for (const auto& e : edges_) {
    Int d = e.w.den();
    inv_.scale = inv_.scale / ::gcd(inv_.scale, d) * d;
  }

  auto scaled = [this](const Rational& q) {
    Rational s = q * Rational(inv_.scale);
    return s.num();
  };
  mass_scaled_ = VecZ::Constant(n, Int(0));
  quantum_scaled_ = VecZ::Constant(n, Int(0));
  adj_scaled_.assign(n, {});
  for (int x = 0; x < n; ++x) {
    mass_scaled_(x) = scaled(inv_.mass(x));
    quantum_scaled_(x) = scaled(inv_.quantum(x));
    adj_scaled_[x].reserve(adj_[x].size());
    for (const auto& [y, w] : adj_[x]) adj_scaled_[x].emplace_back(y, scaled(w));
  }
}

int Graph::index(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ValidationError("unknown vertex '" + name + "'");
  return it->second;
}

int Graph::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

VecQ Graph::mu() const {
  VecQ out = inv_.mass;
  for (int x = 0; x < order(); ++x) out(x) /= inv_.total_mass;
  return out;
}

Graph Graph::rebased(int new_base) const {
  if (new_base < 0 || new_base >= order()) throw ValidationError("rebase: bad vertex index");
  Graph g = *this;
  g.base_ = new_base;
  g.metric_ = compute_metric(order(), g.adj_, new_base);
  return g;
}

Graph Graph::rebased(const std::string& new_base) const { return rebased(index(new_base)); }

MetricProfile metric_profile(const Graph& g, int base) {
  return g.rebased(base).metric();
}

VecQ laplacian_apply(const Graph& g, const VecQ& f) {
  const int n = g.order();
  if (f.size() != n) throw ValidationError("laplacian_apply: size mismatch");
  VecQ out = VecQ::Constant(n, Rational(0));
  for (int x = 0; x < n; ++x)
    for (const auto& [y, w] : g.neighbors(x)) out(x) += w * (f(x) - f(y));
  return out;
}

VecQ laplacian_apply(const Graph& g, const VecQ& f, const std::vector<int>& subset) {
  const int n = g.order();
  if (f.size() != n) throw ValidationError("laplacian_apply: size mismatch");
  std::vector<char> in(n, 0);
  for (int x : subset) {
    if (x < 0 || x >= n) throw ValidationError("laplacian_apply: bad subset index");
    if (in[x]) throw ValidationError("laplacian_apply: repeated subset index");
    in[x] = 1;
  }
  VecQ out = VecQ::Constant(n, Rational(0));
  for (int x : subset)
    for (const auto& [y, w] : g.neighbors(x))
      if (in[y]) out(x) += w * (f(x) - f(y));
  return out;
}

VecQ laplacian_apply(const Graph& g, const VecZ& f) {
  return laplacian_apply(g, to_rational(f));
}

VecQ to_rational(const VecZ& f) {
  VecQ out = VecQ::Constant(f.size(), Rational(0));
  for (Eigen::Index i = 0; i < f.size(); ++i) out(i) = Rational(f(i));
  return out;
}

TransitionProfile transition_profile(const Graph& g) {
  const int n = g.order();
  const auto& dist = g.metric().dist;
  TransitionProfile tp;
  tp.m_plus = VecQ::Constant(n, Rational(0));
  tp.m_minus = VecQ::Constant(n, Rational(0));
  for (int x = 0; x < n; ++x)
    for (const auto& [y, w] : g.neighbors(x)) {
      if (dist(y) == dist(x) + 1) tp.m_plus(x) += w;
      if (dist(y) == dist(x) - 1) tp.m_minus(x) += w;
    }
  return tp;
}

Rational transition_p(const Graph& g, int x, int y) {
  if (x < 0 || x >= g.order() || y < 0 || y >= g.order())
    throw ValidationError("transition_p: bad vertex index");
  for (const auto& [z, w] : g.neighbors(x))
    if (z == y) return w / g.mass()(x);
  return Rational(0);
}

}  // namespace chipfire
