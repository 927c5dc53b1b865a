#pragma once

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chipfire/rational.hpp"

namespace chipfire {

template <class Scalar>
using VertexVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using VecQ = VertexVector<Rational>;
using VecZ = VertexVector<Int>;
using MatQ = Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic>;

struct EdgeRec {
  int u;
  int v;
  Rational w;
};

/// Hop metric rooted at the base vertex.
struct MetricProfile {
  int base = 0;
  Eigen::VectorXi dist;                  // dist(x) = fewest edges from base
  std::vector<std::vector<int>> shells;  // shells[k] = vertices at distance k
  int diameter = 0;                      // largest nonempty shell index
};

struct GraphInvariants {
  VecQ mass;             // m(x), sum of incident edge weights
  Rational total_mass;   // m(V)
  VecQ quantum;          // i(x), gcd of incident edge weights
  Rational quantum_gcd;  // gcd of all i(x)
  VecZ canonical_ell;    // canonical divisor in units of i(x): m(x)/i(x) - 2
  Rational euler;        // sum_x i(x) - sum_edges C
  Int scale;             // lcm of weight denominators; scale*C is integral
};

/// Finite connected multigraph-free graph with positive rational edge weights
/// and a distinguished base vertex. Immutable after construction; invariants,
/// the hop metric and an all-integer scaled model are computed once.
class Graph {
 public:
  /// Text format, one directive per line:
  ///   # comment
  ///   base <vertex>
  ///   edge <u> <v> <p>/<q>
  /// Vertex tokens match [A-Za-z0-9_]+; exactly one base line; weights
  /// positive; duplicate edges (either orientation) and loops rejected.
  static Graph parse(std::string_view text);

  static Graph from_edges(
      const std::vector<std::tuple<std::string, std::string, Rational>>& edges,
      const std::string& base);

  int order() const { return static_cast<int>(names_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int base() const { return base_; }
  const std::string& name(int v) const { return names_[v]; }
  /// Index of a vertex name; throws ValidationError when absent.
  int index(const std::string& name) const;
  /// Index of a vertex name, or -1 when absent.
  int find(const std::string& name) const;

  const std::vector<EdgeRec>& edges() const { return edges_; }
  const std::vector<std::pair<int, Rational>>& neighbors(int v) const { return adj_[v]; }

  const GraphInvariants& invariants() const { return inv_; }
  const MetricProfile& metric() const { return metric_; }

  const VecQ& mass() const { return inv_.mass; }
  const VecQ& quantum() const { return inv_.quantum; }
  const Rational& quantum_gcd() const { return inv_.quantum_gcd; }
  const Rational& total_mass() const { return inv_.total_mass; }
  const Rational& euler() const { return inv_.euler; }
  const Int& scale() const { return inv_.scale; }
  /// Stationary measure mu(x) = m(x) / m(V).
  VecQ mu() const;

  // Integer model: every weight, mass and quantum times scale() is an Int.
  const VecZ& mass_scaled() const { return mass_scaled_; }
  const VecZ& quantum_scaled() const { return quantum_scaled_; }
  const std::vector<std::vector<std::pair<int, Int>>>& adjacency_scaled() const {
    return adj_scaled_;
  }

  /// Same graph with a different base vertex (metric is recomputed).
  Graph rebased(int new_base) const;
  Graph rebased(const std::string& new_base) const;

 private:
  Graph() = default;
  void finalize();

  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  std::vector<EdgeRec> edges_;
  std::vector<std::vector<std::pair<int, Rational>>> adj_;
  int base_ = 0;

  GraphInvariants inv_;
  MetricProfile metric_;
  VecZ mass_scaled_;
  VecZ quantum_scaled_;
  std::vector<std::vector<std::pair<int, Int>>> adj_scaled_;
};

inline Graph parse_graph(std::string_view text) { return Graph::parse(text); }
inline const GraphInvariants& graph_invariants(const Graph& g) { return g.invariants(); }
inline const MetricProfile& metric_profile(const Graph& g) { return g.metric(); }

/// Hop metric rooted at an arbitrary vertex.
MetricProfile metric_profile(const Graph& g, int base);

/// Weighted Laplacian: (Delta f)(x) = sum_{y ~ x} C_xy (f(x) - f(y)).
VecQ laplacian_apply(const Graph& g, const VecQ& f);
/// Subgraph Laplacian Delta_U: sums only over neighbors inside `subset`;
/// entries outside `subset` are zero. `subset` must be a duplicate-free list
/// of valid vertex indices.
VecQ laplacian_apply(const Graph& g, const VecQ& f, const std::vector<int>& subset);
VecQ laplacian_apply(const Graph& g, const VecZ& f);

VecQ to_rational(const VecZ& f);

/// Random-walk escape masses relative to the base metric:
/// m_plus(x) = mass toward the next shell, m_minus(x) = toward the previous.
struct TransitionProfile {
  VecQ m_plus;
  VecQ m_minus;
};
TransitionProfile transition_profile(const Graph& g);

/// One-step transition probability p(x, y) = C_xy / m(x); zero when x !~ y.
Rational transition_p(const Graph& g, int x, int y);

}  // namespace chipfire
