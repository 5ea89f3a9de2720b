#include "qpbf/essp.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>

#include "qpbf/maxflow.hpp"

namespace qpbf {

Permutation Permutation::consistent_with(const Labeling& x, std::mt19937_64& rng) {
  std::vector<int> ones, zeros;
  for (int u = 0; u < static_cast<int>(x.size()); ++u) (x[u] == 1 ? ones : zeros).push_back(u);
  std::shuffle(ones.begin(), ones.end(), rng);
  std::shuffle(zeros.begin(), zeros.end(), rng);
  ones.insert(ones.end(), zeros.begin(), zeros.end());
  return Permutation(std::move(ones));
}

bool Permutation::is_valid() const {
  std::vector<char> seen(order_.size(), 0);
  for (int u : order_) {
    if (u < 0 || u >= static_cast<int>(order_.size()) || seen[u]) return false;
    seen[u] = 1;
  }
  return true;
}

bool Permutation::is_consistent_with(const Labeling& x) const {
  if (x.size() != order_.size() || !is_valid()) return false;
  bool in_zeros = false;
  for (int u : order_) {
    if (x[u] == 0) in_zeros = true;
    else if (in_zeros) return false;
  }
  return true;
}

ModularFn modular_approximation(const CharGraph& sup, const Permutation& order) {
  const int n = sup.num_nodes();
  if (static_cast<int>(order.size()) != n) throw std::invalid_argument("modular_approximation: permutation size");
  ModularFn m;
  m.weights.assign(n, 0.0);
  std::vector<char> in_chain(n, 0);
  for (int u : order.order()) {
    double w = 0.0;
    for (const auto& [v, e] : sup.adjacency(u)) {
      const double c = sup.edges()[e].cap;
      // Adding u cuts edges to nodes outside the chain and uncuts edges inside it.
      w += in_chain[v] ? -c : c;
    }
    m.weights[u] = w;
    in_chain[u] = 1;
  }
  return m;
}

namespace {

using Clock = std::chrono::steady_clock;

bool out_of_time(const EsspOptions& opts, Clock::time_point start) {
  if (!opts.time_budget) return false;
  return std::chrono::duration<double>(Clock::now() - start).count() >= *opts.time_budget;
}

void check_init(const Qpbf& f, const Labeling& init) {
  if (static_cast<int>(init.size()) != f.num_vars()) throw std::invalid_argument("essp: init length mismatch");
  if (!init.is_complete()) throw std::invalid_argument("essp: init labeling is incomplete");
}

}  // namespace

EsspReport essp_on_graph(const Qpbf& f, const CharGraph& g, const Labeling& init, const EsspOptions& opts) {
  check_init(f, init);
  if (opts.permutations_per_iteration < 1) throw std::invalid_argument("essp: need at least one permutation");
  const auto start = Clock::now();

  EsspReport report;
  report.labeling = init;
  report.energy = evaluate(f, init);
  report.energies.push_back(report.energy);

  auto suppressed = suppress_supermodular(g);
  report.suppression_flips = suppressed.flips;
  const auto parts = decompose(suppressed.graph);
  const CharGraph& sub = parts.sub;
  const CharGraph& sup = parts.sup;

  auto accept = [&](const Labeling& full, double energy, double bound) {
    report.labeling = full;
    report.energy = energy;
    report.energies.push_back(energy);
    report.upper_bounds.push_back(bound);
    ++report.iterations;
    if (opts.on_improve) opts.on_improve(energy, full);
  };

  InnerNet inner = build_flownet(sub, ModularFn{});

  if (sup.num_edges() == 0) {
    const auto sol = solve_inner(inner);
    ++report.maxflow_solves;
    report.global_optimum_certified = true;
    Labeling full = init;
    sub.write_back(sol.labels, full);
    const double e = evaluate(f, full);
    if (e < report.energy || (e == report.energy && full != report.labeling)) accept(full, e, sol.value);
    return report;
  }

  std::mt19937_64 rng(opts.seed);
  Labeling nodes = sub.to_node_space(init);
  std::optional<ModularFn> last_m;
  InnerSolution last_sol;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if (out_of_time(opts, start)) break;

    double best_energy = std::numeric_limits<double>::infinity();
    double best_bound = 0.0;
    Labeling best_full;
    Labeling best_nodes;
    for (int k = 0; k < opts.permutations_per_iteration; ++k) {
      if (k > 0 && out_of_time(opts, start)) break;
      const auto order = Permutation::consistent_with(nodes, rng);
      ModularFn m = modular_approximation(sup, order);

      // An unchanged modular term gives the same inner problem.
      if (last_m && *last_m == m) {
        ++report.reused_solves;
      } else {
        set_modular(inner, sub, m);
        last_sol = solve_inner(inner);
        last_m = std::move(m);
        ++report.maxflow_solves;
      }

      Labeling full = report.labeling;
      sub.write_back(last_sol.labels, full);
      const double e = evaluate(f, full);
      if (e < best_energy) {
        best_energy = e;
        best_bound = last_sol.value;
        best_full = std::move(full);
        best_nodes = last_sol.labels;
      }
    }

    // A tie with the current energy counts as convergence.
    if (!(best_energy < report.energy)) break;
    nodes = std::move(best_nodes);
    accept(best_full, best_energy, best_bound);
  }
  return report;
}

EsspReport essp_minimize(const Qpbf& f, const Labeling& init, const EsspOptions& opts) {
  check_init(f, init);
  return essp_on_graph(f, characterize(f), init, opts);
}

EsspReport essp_refine_local(const Qpbf& f, const Labeling& init, const std::vector<VarId>& free_vars,
                             const EsspOptions& opts) {
  check_init(f, init);
  if (free_vars.empty()) {
    EsspReport report;
    report.labeling = init;
    report.energy = evaluate(f, init);
    report.energies.push_back(report.energy);
    return report;
  }
  Labeling partial = init;
  for (VarId u : free_vars) {
    if (u < 0 || u >= f.num_vars()) throw std::out_of_range("essp_refine_local: free variable out of range");
    partial[u] = kUnlabeled;
  }
  // characterize() does not flip, so node i is variable i.
  return essp_on_graph(f, simplify(characterize(f), partial), init, opts);
}

}  // namespace qpbf
