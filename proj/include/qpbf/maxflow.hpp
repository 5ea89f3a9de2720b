#pragma once

#include <cstdint>
#include <vector>

#include "qpbf/char_graph.hpp"
#include "qpbf/modular_fn.hpp"

namespace qpbf {

/// Directed flow network with paired arcs: arc a and a ^ 1 are each other's
/// reverse. An undirected edge is an antiparallel pair of equal capacity.
class FlowNet {
 public:
  FlowNet() = default;
  FlowNet(int num_nodes, int source, int sink);

  int num_nodes() const { return static_cast<int>(out_.size()); }
  int num_arcs() const { return static_cast<int>(head_.size()); }
  int source() const { return source_; }
  int sink() const { return sink_; }

  /// Adds from→to with capacity `cap` and its reverse with `reverse_cap`;
  /// returns the forward arc index.
  int add_arc(int from, int to, double cap, double reverse_cap = 0.0);
  int add_edge(int u, int v, double cap) { return add_arc(u, v, cap, cap); }
  void set_capacity(int arc, double cap);

  int head(int arc) const { return head_[arc]; }
  int tail(int arc) const { return head_[arc ^ 1]; }
  static int reverse(int arc) { return arc ^ 1; }
  double capacity(int arc) const { return cap_[arc]; }
  /// Residual capacity after the last solve().
  double residual(int arc) const { return residual_[arc]; }
  /// capacity − residual: net flow pushed along the arc (negative on the
  /// reverse of a loaded arc).
  double flow(int arc) const { return cap_[arc] - residual_[arc]; }
  const std::vector<int>& out_arcs(int node) const { return out_[node]; }

  struct Result {
    double value = 0.0;
    /// 0 = source side, 1 = sink side. A node is on the sink side exactly
    /// when it can still reach the sink in the residual graph.
    std::vector<std::int8_t> side;
  };

  /// Maximum flow by augmenting paths over two search trees that are kept
  /// between augmentations (source tree grown from the source, sink tree
  /// from the sink, orphans re-adopted after each augmentation).
  Result solve();

  /// Residual amounts at or below this are treated as saturated.
  static constexpr double kEpsilon = 1e-12;

 private:
  std::vector<int> head_;
  std::vector<double> cap_;
  std::vector<double> residual_;
  std::vector<std::vector<int>> out_;
  int source_ = 0;
  int sink_ = 0;
};

inline FlowNet::Result max_flow(FlowNet& net) { return net.solve(); }

/// Flow network for minimizing sub(x) + m(x) over the nodes of a
/// nonnegative CharGraph. Node n is o (source, label 0) and node n+1 is ō
/// (sink, label 1). Each node has one arc from o and one to ō carrying the
/// positive or negative part of its combined linear weight, so the modular
/// part can be swapped without rebuilding the variable edges.
struct InnerNet {
  FlowNet net;
  double constant = 0.0;
  std::vector<int> source_arc;
  std::vector<int> sink_arc;
};

InnerNet build_flownet(const CharGraph& sub, const ModularFn& m);
/// Rewrites the terminal arcs and constant of `inner` for a new modular term.
void set_modular(InnerNet& inner, const CharGraph& sub, const ModularFn& m);

struct InnerSolution {
  Labeling labels;  // node space
  double value = 0.0;  // min over x of sub(x) + m(x), constants included
};

InnerSolution solve_inner(InnerNet& inner);

}  // namespace qpbf
