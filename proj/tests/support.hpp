#pragma once

// Test-only generators and oracles. Nothing here calls into the solver
// paths it is used to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "qpbf/char_graph.hpp"
#include "qpbf/maxflow.hpp"
#include "qpbf/qpbf.hpp"

namespace qpbf::test {

/// General-table QPBF: every unordered pair present with probability
/// `density`, all entries uniform in [-scale, scale].
inline Qpbf random_qpbf(int n, double density, std::mt19937_64& rng, double scale = 10.0) {
  std::uniform_real_distribution<double> val(-scale, scale);
  std::bernoulli_distribution keep(density);
  Qpbf f(n);
  f.add_constant(val(rng));
  for (int u = 0; u < n; ++u) f.add_unary(u, val(rng), val(rng));
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (keep(rng)) f.add_pairwise(u, v, {val(rng), val(rng), val(rng), val(rng)});
  return f;
}

/// Random QPBF whose pairwise terms all satisfy θ00 + θ11 ≤ θ01 + θ10.
inline Qpbf random_submodular_qpbf(int n, double density, std::mt19937_64& rng, double scale = 10.0) {
  std::uniform_real_distribution<double> val(-scale, scale);
  std::uniform_real_distribution<double> mag(0.0, scale);
  std::bernoulli_distribution keep(density);
  Qpbf f(n);
  for (int u = 0; u < n; ++u) f.add_unary(u, val(rng), val(rng));
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (keep(rng)) {
        const double t00 = val(rng), t01 = val(rng), t10 = val(rng);
        // θ11 = θ01 + θ10 − θ00 − slack
        f.add_pairwise(u, v, {t00, t01, t10, t01 + t10 - t00 - mag(rng)});
      }
  return f;
}

/// Energy by looping over every unordered pair and looking the term up,
/// independent of Qpbf's own accumulation order.
inline double oracle_energy(const Qpbf& f, const Labeling& x) {
  double e = f.constant();
  for (int u = 0; u < f.num_vars(); ++u) e += x[u] == 0 ? f.unary(u)[0] : f.unary(u)[1];
  for (int u = 0; u < f.num_vars(); ++u)
    for (int v = u + 1; v < f.num_vars(); ++v)
      if (const auto* p = f.find_pair(u, v)) e += p->table[2 * x[u] + x[v]];
  return e;
}

inline void for_each_labeling(int n, const std::function<void(const Labeling&)>& fn) {
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << n); ++k) fn(Labeling::from_index(k, n));
}

inline bool close(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Scale-aware tolerance for comparisons of energies summed from many terms.
inline double energy_tol(const Qpbf& f, double rel = 1e-9) {
  double s = std::abs(f.constant());
  for (int u = 0; u < f.num_vars(); ++u) s += std::abs(f.unary(u)[0]) + std::abs(f.unary(u)[1]);
  for (const auto& p : f.pairs())
    for (double t : p.table) s += std::abs(t);
  return rel * std::max(1.0, s);
}

/// Minimum s–t cut by enumerating every side assignment of the inner nodes.
inline double exhaustive_min_cut(const FlowNet& net) {
  const int n = net.num_nodes();
  std::vector<int> inner;
  for (int v = 0; v < n; ++v)
    if (v != net.source() && v != net.sink()) inner.push_back(v);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> side(n, 0);
  side[net.sink()] = 1;
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << inner.size()); ++k) {
    for (std::size_t i = 0; i < inner.size(); ++i) side[inner[i]] = static_cast<int>((k >> i) & 1);
    double cut = 0.0;
    for (int a = 0; a < net.num_arcs(); ++a)
      if (side[net.tail(a)] == 0 && side[net.head(a)] == 1) cut += net.capacity(a);
    best = std::min(best, cut);
  }
  return best;
}

inline double cut_of_sides(const FlowNet& net, const std::vector<std::int8_t>& side) {
  double cut = 0.0;
  for (int a = 0; a < net.num_arcs(); ++a)
    if (side[net.tail(a)] == 0 && side[net.head(a)] == 1) cut += net.capacity(a);
  return cut;
}

/// Random graph of negative variable edges, as produced by decomposition.
inline CharGraph random_sup_graph(int n, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.1, 5.0);
  std::bernoulli_distribution keep(density);
  CharGraph::Builder b(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (keep(rng)) b.add_edge(u, v, -mag(rng));
  return std::move(b).build();
}

/// Cut of a graph of variable edges for the node set S = {u : x_u = 1}.
inline double set_cut(const CharGraph& g, const Labeling& x) {
  double s = 0.0;
  for (const auto& e : g.edges())
    if (x[e.u] != x[e.v]) s += e.cap;
  return s;
}

}  // namespace qpbf::test
