#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "qpbf/qpbf.hpp"

namespace qpbf {

/// Edge between two variable nodes; capacity may be negative (supermodular).
struct VarEdge {
  int u;  // u < v, node indices
  int v;
  double cap;
};

/// Capacities of a node's two indicator edges: to o (label 0) and to ō (label 1).
struct IndicatorCaps {
  double to_zero = 0.0;  // (o, u): cut when the node is labeled 1
  double to_one = 0.0;   // (ō, u): cut when the node is labeled 0
};

/// Undirected graph whose cut value plus a constant reproduces the energy of
/// a QPBF. Nodes are local indices 0..num_nodes()-1; each maps back to a
/// variable of the source function through origin(), and flipped(i) records
/// that node i stands for the complement of that variable.
///
/// Edge structure is fixed at construction (parallel contributions merged,
/// zero capacities dropped); flips only change signs and the constant.
class CharGraph {
 public:
  class Builder;

  CharGraph() = default;

  int num_nodes() const { return static_cast<int>(origin_.size()); }
  std::size_t num_edges() const { return edges_.size(); }

  VarId origin(int node) const { return origin_[node]; }
  const std::vector<VarId>& origins() const { return origin_; }
  bool flipped(int node) const { return flipped_[node] != 0; }

  const IndicatorCaps& indicator(int node) const { return indicator_[node]; }
  const std::vector<VarEdge>& edges() const { return edges_; }
  /// (neighbor node, edge index) for every variable edge at `node`.
  const std::vector<std::pair<int, int>>& adjacency(int node) const { return adjacency_[node]; }

  double constant() const { return constant_; }

  /// Negates every edge at `node` and toggles its flip mark.
  void flip_variable(int node);
  /// Moves each listed node's indicator edges to the opposite terminal with
  /// negated capacity, compensating in the constant. Leaves capacities
  /// un-normalized; call normalize_indicators() to restore nonnegativity.
  void flip_indicator(const std::vector<int>& nodes);
  /// Rewrites every node's indicator pair so that both capacities are
  /// nonnegative and at most one is nonzero.
  void normalize_indicators();
  bool indicators_normalized() const;

  /// Replaces the variable edge set (used by decomposition); adjacency is rebuilt.
  void set_edges(std::vector<VarEdge> edges);
  void set_constant(double c) { constant_ = c; }
  void set_indicator(int node, IndicatorCaps caps) { indicator_[node] = caps; }

  double negative_mass() const;
  double positive_mass() const;
  std::size_t negative_edge_count() const;

  /// Node-space labeling (labels of the nodes themselves) from a labeling of
  /// the source variables, honoring flip marks.
  Labeling to_node_space(const Labeling& original) const;
  /// Writes node labels back into `original` (source-variable space).
  void write_back(const Labeling& nodes, Labeling& original) const;

 private:
  friend class Builder;

  std::vector<VarId> origin_;
  std::vector<std::int8_t> flipped_;
  std::vector<IndicatorCaps> indicator_;
  std::vector<VarEdge> edges_;
  std::vector<std::vector<std::pair<int, int>>> adjacency_;
  double constant_ = 0.0;

  void rebuild_adjacency();
};

/// Accumulates capacities and emits a CharGraph with merged, nonzero edges.
class CharGraph::Builder {
 public:
  Builder(std::vector<VarId> origin, std::vector<std::int8_t> flipped);
  explicit Builder(int n);

  void add_indicator(int node, double to_zero, double to_one);
  void add_edge(int u, int v, double cap);
  void add_constant(double c) { constant_ += c; }

  /// Normalizes indicator capacities and drops zero-capacity edges.
  CharGraph build() &&;

 private:
  CharGraph graph_;
  std::vector<std::vector<std::pair<int, double>>> pending_;  // per lower endpoint
  double constant_ = 0.0;
};

/// Graph characterization of a QPBF, with indicator capacities normalized.
CharGraph characterize(const Qpbf& f);

/// Σ over edges of capacity × [endpoints on different sides]; the
/// constant is not included. `x` is a node-space labeling.
double cut_value(const CharGraph& g, const Labeling& x);

CharGraph flip_variable(const CharGraph& g, int node);
CharGraph flip_indicator(const CharGraph& g, const std::vector<int>& nodes);

struct SuppressionResult {
  CharGraph graph;
  std::vector<int> flips;  // nodes in the order they were flipped
};

/// Greedy supermodular suppression. Repeatedly flips the node with the
/// largest share of negative variable-edge mass,
///   r_u = Σ|negative caps at u| / Σ|caps at u|,
/// while that share exceeds one half (ties: lower node index). Each flip
/// lowers the total negative mass, so the loop terminates, and on return
/// Σ|negative caps| ≤ Σ|positive caps| over the whole graph.
///
/// Exact suppression would minimize y'C̄y over flip vectors y ∈ {-1,1}^n
/// (C̄ the negated capacity matrix), equivalently z'C̄z + z'C̄1 over
/// z ∈ {0,1}^n, which is as hard as the input problem.
SuppressionResult suppress_supermodular(const CharGraph& g);

struct Decomposition {
  CharGraph sub;  // indicator edges, nonnegative variable edges, constant
  CharGraph sup;  // negative variable edges only
};

Decomposition decompose(const CharGraph& g);

/// Removes the labeled nodes of `partial` (node-space, length num_nodes()),
/// folding their edges into indicator edges of the remaining nodes and the
/// constant. The result keeps origins and flip marks of the free nodes.
CharGraph simplify(const CharGraph& g, const Labeling& partial);

/// QPBF over the graph's nodes (node space) with the same energy:
/// unary (to_one, to_zero), pairwise (0, c, c, 0), constant.
Qpbf to_qpbf(const CharGraph& g);

/// Debug dump: node/iedge/vedge/const records, ids are source variable ids.
void dump(std::ostream& os, const CharGraph& g);

}  // namespace qpbf
