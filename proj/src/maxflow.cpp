#include "qpbf/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace qpbf {

FlowNet::FlowNet(int num_nodes, int source, int sink) : out_(num_nodes), source_(source), sink_(sink) {
  if (source < 0 || sink < 0 || source >= num_nodes || sink >= num_nodes || source == sink)
    throw std::invalid_argument("FlowNet: bad terminals");
}

int FlowNet::add_arc(int from, int to, double cap, double reverse_cap) {
  if (from < 0 || to < 0 || from >= num_nodes() || to >= num_nodes() || from == to)
    throw std::invalid_argument("FlowNet: bad arc endpoints");
  if (!(cap >= 0.0) || !(reverse_cap >= 0.0) || !std::isfinite(cap) || !std::isfinite(reverse_cap))
    throw std::invalid_argument("FlowNet: capacity must be finite and nonnegative");
  const int a = num_arcs();
  head_.push_back(to);
  head_.push_back(from);
  cap_.push_back(cap);
  cap_.push_back(reverse_cap);
  residual_.push_back(cap);
  residual_.push_back(reverse_cap);
  out_[from].push_back(a);
  out_[to].push_back(a + 1);
  return a;
}

void FlowNet::set_capacity(int arc, double cap) {
  if (!(cap >= 0.0) || !std::isfinite(cap)) throw std::invalid_argument("FlowNet: capacity must be finite and nonnegative");
  cap_[arc] = cap;
  residual_[arc] = cap;
}

namespace {

enum class Tree : std::int8_t { kFree, kSource, kSink };
constexpr int kNone = -1;
constexpr int kRoot = -2;

}  // namespace

FlowNet::Result FlowNet::solve() {
  const int n = num_nodes();
  residual_ = cap_;

  std::vector<Tree> tree(n, Tree::kFree);
  std::vector<int> parent(n, kNone);  // arc into the node (source tree) or out of it (sink tree)
  std::vector<int> stamp(n, 0);
  std::vector<int> dist(n, 0);
  std::vector<char> in_active(n, 0);
  std::deque<int> active;
  std::deque<int> orphans;

  auto activate = [&](int v) {
    if (!in_active[v]) {
      in_active[v] = 1;
      active.push_back(v);
    }
  };

  tree[source_] = Tree::kSource;
  parent[source_] = kRoot;
  tree[sink_] = Tree::kSink;
  parent[sink_] = kRoot;
  activate(source_);
  activate(sink_);

  int time = 0;
  double total = 0.0;

  // Next node toward the root of v's tree along its parent arc.
  auto up = [&](int v) { return tree[v] == Tree::kSource ? tail(parent[v]) : head(parent[v]); };

  while (true) {
    // Growth: extend both trees until an arc joins them.
    int bridge = kNone;  // arc from a source-tree node to a sink-tree node
    while (!active.empty()) {
      const int v = active.front();
      if (tree[v] == Tree::kFree) {
        active.pop_front();
        in_active[v] = 0;
        continue;
      }
      const bool from_source = tree[v] == Tree::kSource;
      for (int a : out_[v]) {
        const int w = head_[a];
        const int arc = from_source ? a : (a ^ 1);  // arc oriented away from the source
        if (residual_[arc] <= kEpsilon) continue;
        if (tree[w] == Tree::kFree) {
          tree[w] = tree[v];
          parent[w] = arc;
          stamp[w] = stamp[v];
          dist[w] = dist[v] + 1;
          activate(w);
        } else if (tree[w] != tree[v]) {
          bridge = arc;
          break;
        } else if (stamp[w] <= stamp[v] && dist[w] > dist[v]) {
          parent[w] = arc;
          stamp[w] = stamp[v];
          dist[w] = dist[v] + 1;
        }
      }
      if (bridge != kNone) break;
      active.pop_front();
      in_active[v] = 0;
    }
    if (bridge == kNone) break;

    ++time;

    // Augmentation along source root → bridge → sink root.
    double delta = residual_[bridge];
    for (int x = tail(bridge); parent[x] != kRoot; x = tail(parent[x])) delta = std::min(delta, residual_[parent[x]]);
    for (int y = head(bridge); parent[y] != kRoot; y = head(parent[y])) delta = std::min(delta, residual_[parent[y]]);

    residual_[bridge] -= delta;
    residual_[bridge ^ 1] += delta;
    for (int x = tail(bridge); parent[x] != kRoot;) {
      const int a = parent[x];
      residual_[a] -= delta;
      residual_[a ^ 1] += delta;
      const int next = tail(a);
      if (residual_[a] <= kEpsilon) {
        parent[x] = kNone;
        orphans.push_back(x);
      }
      x = next;
    }
    for (int y = head(bridge); parent[y] != kRoot;) {
      const int a = parent[y];
      residual_[a] -= delta;
      residual_[a ^ 1] += delta;
      const int next = head(a);
      if (residual_[a] <= kEpsilon) {
        parent[y] = kNone;
        orphans.push_back(y);
      }
      y = next;
    }
    total += delta;

    // Adoption: find each orphan a new parent rooted at its terminal, or free it.
    while (!orphans.empty()) {
      const int v = orphans.front();
      orphans.pop_front();
      const bool in_source = tree[v] == Tree::kSource;

      int best_arc = kNone;
      int best_dist = std::numeric_limits<int>::max();
      for (int a : out_[v]) {
        const int u = head_[a];
        if (tree[u] != tree[v]) continue;
        const int arc = in_source ? (a ^ 1) : a;  // u→v in the source tree, v→u in the sink tree
        if (residual_[arc] <= kEpsilon) continue;

        int j = u;
        int d = 0;
        bool rooted = false;
        while (true) {
          if (stamp[j] == time) {
            d += dist[j];
            rooted = true;
            break;
          }
          if (parent[j] == kRoot) {
            stamp[j] = time;
            dist[j] = 0;
            rooted = true;
            break;
          }
          if (parent[j] == kNone) break;
          ++d;
          j = up(j);
        }
        if (!rooted) continue;
        if (d < best_dist) {
          best_dist = d;
          best_arc = arc;
        }
        for (j = u; stamp[j] != time; j = up(j)) {
          stamp[j] = time;
          dist[j] = d--;
        }
      }

      if (best_arc != kNone) {
        parent[v] = best_arc;
        stamp[v] = time;
        dist[v] = best_dist + 1;
        continue;
      }

      for (int a : out_[v]) {
        const int u = head_[a];
        if (tree[u] != tree[v]) continue;
        const int arc = in_source ? (a ^ 1) : a;
        if (residual_[arc] > kEpsilon) activate(u);
        if (parent[u] >= 0 && up(u) == v) {
          parent[u] = kNone;
          orphans.push_back(u);
        }
      }
      tree[v] = Tree::kFree;
    }
  }

  Result r;
  r.value = total;
  r.side.resize(n);
  for (int v = 0; v < n; ++v) r.side[v] = tree[v] == Tree::kSink ? 1 : 0;
  return r;
}

// ---------------------------------------------------------------------------
// Inner submodular problem

InnerNet build_flownet(const CharGraph& sub, const ModularFn& m) {
  const int n = sub.num_nodes();
  InnerNet inner;
  inner.net = FlowNet(n + 2, n, n + 1);
  inner.source_arc.resize(n);
  inner.sink_arc.resize(n);
  for (int u = 0; u < n; ++u) {
    inner.source_arc[u] = inner.net.add_arc(n, u, 0.0);
    inner.sink_arc[u] = inner.net.add_arc(u, n + 1, 0.0);
  }
  for (const auto& e : sub.edges()) {
    if (e.cap < 0.0) throw std::logic_error("build_flownet: negative variable edge in submodular graph");
    inner.net.add_edge(e.u, e.v, e.cap);
  }
  set_modular(inner, sub, m);
  return inner;
}

void set_modular(InnerNet& inner, const CharGraph& sub, const ModularFn& m) {
  const int n = sub.num_nodes();
  if (!m.weights.empty() && static_cast<int>(m.weights.size()) != n)
    throw std::invalid_argument("set_modular: weight count mismatch");
  double c = sub.constant() + m.constant;
  for (int u = 0; u < n; ++u) {
    const auto& ind = sub.indicator(u);
    // Energy contribution w·x + to_one, with w the coefficient of x.
    const double w = ind.to_zero - ind.to_one + (m.weights.empty() ? 0.0 : m.weights[u]);
    c += ind.to_one;
    if (w >= 0.0) {
      inner.net.set_capacity(inner.source_arc[u], w);
      inner.net.set_capacity(inner.sink_arc[u], 0.0);
    } else {
      inner.net.set_capacity(inner.source_arc[u], 0.0);
      inner.net.set_capacity(inner.sink_arc[u], -w);
      c += w;
    }
  }
  inner.constant = c;
}

InnerSolution solve_inner(InnerNet& inner) {
  const auto r = inner.net.solve();
  const int n = inner.net.num_nodes() - 2;
  InnerSolution s;
  s.labels = Labeling(n, 0);
  for (int u = 0; u < n; ++u) s.labels[u] = r.side[u];
  s.value = r.value + inner.constant;
  return s;
}

}  // namespace qpbf
