#include "qpbf/char_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace qpbf {

// ---------------------------------------------------------------------------
// CharGraph

void CharGraph::rebuild_adjacency() {
  adjacency_.assign(origin_.size(), {});
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    adjacency_[edges_[e].u].push_back({edges_[e].v, e});
    adjacency_[edges_[e].v].push_back({edges_[e].u, e});
  }
}

void CharGraph::flip_variable(int node) {
  if (node < 0 || node >= num_nodes()) throw std::out_of_range("flip_variable: unknown node");
  // c·[x_u ≠ x_v] = c − c·[x̄_u ≠ x_v]
  for (const auto& [nb, e] : adjacency_[node]) {
    constant_ += edges_[e].cap;
    edges_[e].cap = -edges_[e].cap;
  }
  // a·x + b·(1−x) with x = 1 − x̄ is b·x̄ + a·(1−x̄)
  std::swap(indicator_[node].to_zero, indicator_[node].to_one);
  flipped_[node] ^= 1;
}

void CharGraph::flip_indicator(const std::vector<int>& nodes) {
  for (int u : nodes) {
    if (u < 0 || u >= num_nodes()) throw std::out_of_range("flip_indicator: unknown node");
    auto& ind = indicator_[u];
    // a·x = −a·(1−x) + a, b·(1−x) = −b·x + b
    const double a = ind.to_zero;
    const double b = ind.to_one;
    ind.to_zero = -b;
    ind.to_one = -a;
    constant_ += a + b;
  }
}

void CharGraph::normalize_indicators() {
  for (auto& ind : indicator_) {
    const double net = ind.to_zero - ind.to_one;  // coefficient of x
    if (net >= 0.0) {
      constant_ += ind.to_one;
      ind = {net, 0.0};
    } else {
      constant_ += ind.to_zero;
      ind = {0.0, -net};
    }
  }
}

bool CharGraph::indicators_normalized() const {
  return std::all_of(indicator_.begin(), indicator_.end(), [](const IndicatorCaps& c) {
    return c.to_zero >= 0.0 && c.to_one >= 0.0 && (c.to_zero == 0.0 || c.to_one == 0.0);
  });
}

void CharGraph::set_edges(std::vector<VarEdge> edges) {
  edges_ = std::move(edges);
  rebuild_adjacency();
}

double CharGraph::negative_mass() const {
  double s = 0.0;
  for (const auto& e : edges_)
    if (e.cap < 0.0) s -= e.cap;
  return s;
}

double CharGraph::positive_mass() const {
  double s = 0.0;
  for (const auto& e : edges_)
    if (e.cap > 0.0) s += e.cap;
  return s;
}

std::size_t CharGraph::negative_edge_count() const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [](const VarEdge& e) { return e.cap < 0.0; }));
}

Labeling CharGraph::to_node_space(const Labeling& original) const {
  Labeling x(origin_.size());
  for (int i = 0; i < num_nodes(); ++i) {
    const auto v = original[origin_[i]];
    x[i] = v == kUnlabeled ? kUnlabeled : static_cast<std::int8_t>(v ^ flipped_[i]);
  }
  return x;
}

void CharGraph::write_back(const Labeling& nodes, Labeling& original) const {
  for (int i = 0; i < num_nodes(); ++i) {
    const auto v = nodes[i];
    original[origin_[i]] = v == kUnlabeled ? kUnlabeled : static_cast<std::int8_t>(v ^ flipped_[i]);
  }
}

// ---------------------------------------------------------------------------
// Builder

CharGraph::Builder::Builder(std::vector<VarId> origin, std::vector<std::int8_t> flipped) {
  if (origin.size() != flipped.size()) throw std::invalid_argument("origin/flip size mismatch");
  graph_.indicator_.assign(origin.size(), {});
  graph_.origin_ = std::move(origin);
  graph_.flipped_ = std::move(flipped);
  pending_.resize(graph_.origin_.size());
}

CharGraph::Builder::Builder(int n) : Builder(std::vector<VarId>(n), std::vector<std::int8_t>(n, 0)) {
  for (int i = 0; i < n; ++i) graph_.origin_[i] = i;
}

void CharGraph::Builder::add_indicator(int node, double to_zero, double to_one) {
  graph_.indicator_[node].to_zero += to_zero;
  graph_.indicator_[node].to_one += to_one;
}

void CharGraph::Builder::add_edge(int u, int v, double cap) {
  if (u == v) throw std::invalid_argument("self edge");
  if (u > v) std::swap(u, v);
  pending_[u].push_back({v, cap});
}

CharGraph CharGraph::Builder::build() && {
  graph_.constant_ = constant_;
  std::unordered_map<int, double> merged;
  std::vector<int> order;
  for (int u = 0; u < static_cast<int>(pending_.size()); ++u) {
    if (pending_[u].empty()) continue;
    merged.clear();
    order.clear();
    for (const auto& [v, cap] : pending_[u]) {
      auto [it, inserted] = merged.try_emplace(v, 0.0);
      if (inserted) order.push_back(v);
      it->second += cap;
    }
    std::sort(order.begin(), order.end());
    for (int v : order) {
      const double cap = merged[v];
      if (cap != 0.0) graph_.edges_.push_back({u, v, cap});
    }
    std::vector<std::pair<int, double>>().swap(pending_[u]);
  }
  graph_.normalize_indicators();
  graph_.rebuild_adjacency();
  return std::move(graph_);
}

// ---------------------------------------------------------------------------
// Operations

CharGraph characterize(const Qpbf& f) {
  CharGraph::Builder b(f.num_vars());
  b.add_constant(f.constant());
  for (int u = 0; u < f.num_vars(); ++u) {
    const auto& t = f.unary(u);
    b.add_indicator(u, t[1] - t[0], 0.0);
    b.add_constant(t[0]);
  }
  for (const auto& p : f.pairs()) {
    const auto& [t00, t01, t10, t11] = p.table;
    b.add_indicator(p.u, 0.5 * (t10 + t11 - t01 - t00), 0.0);
    b.add_indicator(p.v, 0.5 * (t01 + t11 - t00 - t10), 0.0);
    b.add_edge(p.u, p.v, 0.5 * (t01 + t10 - t00 - t11));
    b.add_constant(t00);
  }
  return std::move(b).build();
}

double cut_value(const CharGraph& g, const Labeling& x) {
  if (static_cast<int>(x.size()) != g.num_nodes()) throw std::invalid_argument("cut_value: length mismatch");
  if (!x.is_complete()) throw std::invalid_argument("cut_value: incomplete labeling");
  double cut = 0.0;
  for (int u = 0; u < g.num_nodes(); ++u) cut += x[u] ? g.indicator(u).to_zero : g.indicator(u).to_one;
  for (const auto& e : g.edges())
    if (x[e.u] != x[e.v]) cut += e.cap;
  return cut;
}

CharGraph flip_variable(const CharGraph& g, int node) {
  CharGraph out = g;
  out.flip_variable(node);
  return out;
}

CharGraph flip_indicator(const CharGraph& g, const std::vector<int>& nodes) {
  CharGraph out = g;
  out.flip_indicator(nodes);
  return out;
}

SuppressionResult suppress_supermodular(const CharGraph& g) {
  SuppressionResult result{g, {}};
  CharGraph& h = result.graph;
  const int n = h.num_nodes();

  std::vector<double> neg(n, 0.0), all(n, 0.0);
  for (const auto& e : h.edges()) {
    const double a = std::abs(e.cap);
    all[e.u] += a;
    all[e.v] += a;
    if (e.cap < 0.0) {
      neg[e.u] += a;
      neg[e.v] += a;
    }
  }
  auto ratio = [&](int u) { return all[u] > 0.0 ? neg[u] / all[u] : 0.0; };

  // Ordered by descending ratio, then ascending node index.
  std::set<std::pair<double, int>> order;
  std::vector<double> key(n);
  for (int u = 0; u < n; ++u) {
    key[u] = -ratio(u);
    order.insert({key[u], u});
  }
  auto rekey = [&](int u) {
    order.erase({key[u], u});
    key[u] = -ratio(u);
    order.insert({key[u], u});
  };

  constexpr double kRelTol = 1e-12;
  while (!order.empty()) {
    const int u = order.begin()->second;
    if (!(neg[u] > (0.5 + kRelTol) * all[u])) break;

    for (const auto& [v, e] : h.adjacency(u)) {
      const double a = std::abs(h.edges()[e].cap);
      if (h.edges()[e].cap < 0.0)
        neg[v] -= a;
      else
        neg[v] += a;
      if (neg[v] < 0.0) neg[v] = 0.0;
    }
    h.flip_variable(u);
    neg[u] = all[u] - neg[u];
    rekey(u);
    for (const auto& [v, e] : h.adjacency(u)) rekey(v);
    result.flips.push_back(u);
  }
  return result;
}

Decomposition decompose(const CharGraph& g) {
  if (!g.indicators_normalized()) throw std::invalid_argument("decompose: indicator capacities not normalized");
  std::vector<VarEdge> pos, neg;
  for (const auto& e : g.edges()) (e.cap >= 0.0 ? pos : neg).push_back(e);

  Decomposition d{g, g};
  d.sub.set_edges(std::move(pos));
  d.sup.set_edges(std::move(neg));
  d.sup.set_constant(0.0);
  for (int u = 0; u < g.num_nodes(); ++u) d.sup.set_indicator(u, {});
  return d;
}

CharGraph simplify(const CharGraph& g, const Labeling& partial) {
  if (static_cast<int>(partial.size()) != g.num_nodes()) throw std::invalid_argument("simplify: length mismatch");

  std::vector<int> local(g.num_nodes(), -1);
  std::vector<VarId> origin;
  std::vector<std::int8_t> flipped;
  for (int u = 0; u < g.num_nodes(); ++u) {
    if (partial.is_labeled(u)) continue;
    local[u] = static_cast<int>(origin.size());
    origin.push_back(g.origin(u));
    flipped.push_back(g.flipped(u) ? 1 : 0);
  }

  CharGraph::Builder b(std::move(origin), std::move(flipped));
  b.add_constant(g.constant());
  for (int u = 0; u < g.num_nodes(); ++u) {
    const auto& ind = g.indicator(u);
    if (local[u] >= 0)
      b.add_indicator(local[u], ind.to_zero, ind.to_one);
    else
      b.add_constant(partial[u] ? ind.to_zero : ind.to_one);
  }
  for (const auto& e : g.edges()) {
    const bool fu = partial.is_labeled(e.u);
    const bool fv = partial.is_labeled(e.v);
    if (!fu && !fv) {
      b.add_edge(local[e.u], local[e.v], e.cap);
    } else if (fu && fv) {
      if (partial[e.u] != partial[e.v]) b.add_constant(e.cap);
    } else {
      const int fixed = fu ? e.u : e.v;
      const int free = fu ? local[e.v] : local[e.u];
      // Cut iff the free node takes the opposite label of the fixed one.
      if (partial[fixed] == 0)
        b.add_indicator(free, e.cap, 0.0);
      else
        b.add_indicator(free, 0.0, e.cap);
    }
  }
  return std::move(b).build();
}

Qpbf to_qpbf(const CharGraph& g) {
  Qpbf f(g.num_nodes());
  f.add_constant(g.constant());
  for (int u = 0; u < g.num_nodes(); ++u) {
    const auto& ind = g.indicator(u);
    if (ind.to_zero != 0.0 || ind.to_one != 0.0) f.add_unary(u, ind.to_one, ind.to_zero);
  }
  for (const auto& e : g.edges()) f.add_pairwise(e.u, e.v, {0.0, e.cap, e.cap, 0.0});
  return f;
}

void dump(std::ostream& os, const CharGraph& g) {
  const auto old_prec = os.precision(std::numeric_limits<double>::max_digits10);
  for (int u = 0; u < g.num_nodes(); ++u) os << "node " << g.origin(u) << " flipped" << (g.flipped(u) ? 1 : 0) << '\n';
  for (int u = 0; u < g.num_nodes(); ++u) {
    const auto& ind = g.indicator(u);
    if (ind.to_zero != 0.0) os << "iedge " << g.origin(u) << " o " << ind.to_zero << '\n';
    if (ind.to_one != 0.0) os << "iedge " << g.origin(u) << " ō " << ind.to_one << '\n';
  }
  for (const auto& e : g.edges()) os << "vedge " << g.origin(e.u) << ' ' << g.origin(e.v) << ' ' << e.cap << '\n';
  os << "const " << g.constant() << '\n';
  os.precision(old_prec);
}

}  // namespace qpbf
