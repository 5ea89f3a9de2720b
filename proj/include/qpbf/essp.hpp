#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "qpbf/char_graph.hpp"
#include "qpbf/modular_fn.hpp"
#include "qpbf/qpbf.hpp"

namespace qpbf {

/// Called with the energy of every newly accepted labeling.
using ImproveCallback = std::function<void(double energy, const Labeling& x)>;

/// Ordering of nodes in which every node labeled 1 precedes every node
/// labeled 0; the order inside each group is random.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> order) : order_(std::move(order)) {}

  /// Random permutation consistent with the complete node labeling `x`.
  static Permutation consistent_with(const Labeling& x, std::mt19937_64& rng);

  const std::vector<int>& order() const { return order_; }
  std::size_t size() const { return order_.size(); }
  bool is_valid() const;
  bool is_consistent_with(const Labeling& x) const;

 private:
  std::vector<int> order_;
};

/// Modular upper bound of the cut function of a graph of negative edges,
///   g(S) = Σ_(u,v) c_uv · [exactly one of u, v in S],
/// that is tight on the chain W_k = {π_1..π_k}:
///   weight(π_k) = g(W_k) − g(W_(k−1)).
/// g is supermodular, so m(S) ≥ g(S) for every S.
ModularFn modular_approximation(const CharGraph& sup, const Permutation& order);

struct EsspOptions {
  std::uint64_t seed = 0;
  int permutations_per_iteration = 5;
  int max_iterations = 100;
  std::optional<double> time_budget;  // seconds
  ImproveCallback on_improve;
};

struct EsspReport {
  Labeling labeling;  // source-variable space
  double energy = 0.0;
  int iterations = 0;  // accepted improvements
  /// Energy of the initial labeling followed by one entry per accepted iteration.
  std::vector<double> energies;
  /// Value of the minimized upper bound sub + m at each accepted iteration.
  std::vector<double> upper_bounds;
  bool global_optimum_certified = false;
  int maxflow_solves = 0;
  int reused_solves = 0;
  std::vector<int> suppression_flips;
};

/// Submodular–supermodular descent: characterize, suppress supermodular
/// edges by flipping, split into sub/sup parts, then repeatedly replace sup
/// by a permutation-tight modular bound and minimize exactly by max-flow,
/// keeping the best of K permutations while the energy strictly drops.
/// When no supermodular edge survives suppression a single cut gives the
/// global optimum.
EsspReport essp_minimize(const Qpbf& f, const Labeling& init, const EsspOptions& opts = {});

/// Runs the same descent over the variables in `free_vars` only; all other
/// variables keep their values from `init`.
EsspReport essp_refine_local(const Qpbf& f, const Labeling& init, const std::vector<VarId>& free_vars,
                             const EsspOptions& opts = {});

/// Descent on an already characterized graph (possibly simplified) whose
/// node origins index variables of `f`; labels of variables outside the
/// graph come from `init`.
EsspReport essp_on_graph(const Qpbf& f, const CharGraph& g, const Labeling& init, const EsspOptions& opts);

}  // namespace qpbf
