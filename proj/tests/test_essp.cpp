#include <numeric>
#include <stdexcept>

#include "doctest.h"
#include "qpbf/baselines.hpp"
#include "qpbf/essp.hpp"
#include "support.hpp"

using namespace qpbf;
using qpbf::test::close;

namespace {

Qpbf std_function(int n, std::vector<QuadTerm> quad, std::vector<double> linear = {}) {
  StdQpbf s;
  s.linear = linear.empty() ? std::vector<double>(n, 0.0) : std::move(linear);
  s.quad = std::move(quad);
  return from_standard(s);
}

// Minimum of f over the listed variables with everything else held at x.
double restricted_min(const Qpbf& f, const Labeling& x, const std::vector<VarId>& free_vars) {
  double best = std::numeric_limits<double>::infinity();
  Labeling y = x;
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << free_vars.size()); ++k) {
    for (std::size_t i = 0; i < free_vars.size(); ++i) y[free_vars[i]] = static_cast<std::int8_t>((k >> i) & 1);
    best = std::min(best, evaluate(f, y));
  }
  return best;
}

}  // namespace

TEST_CASE("permutations consistent with a labeling put the ones first") {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const Labeling x = random_labeling(12, rng());
    const auto p = Permutation::consistent_with(x, rng);
    CHECK(p.is_valid());
    CHECK(p.is_consistent_with(x));
  }
  CHECK(!Permutation({0, 0, 1}).is_valid());
  CHECK(!Permutation({1, 0}).is_consistent_with(Labeling{1, 0}));
  CHECK(Permutation({0, 1}).is_consistent_with(Labeling{1, 0}));
}

TEST_CASE("modular approximation of a single negative edge") {
  CharGraph::Builder b(2);
  b.add_edge(0, 1, -2.0);
  const CharGraph sup = std::move(b).build();
  const ModularFn m = modular_approximation(sup, Permutation({0, 1}));
  CHECK(m.weights == std::vector<double>{-2.0, 2.0});
  CHECK(m.constant == 0.0);
  CHECK(m(Labeling{0, 1}) == 2.0);
  CHECK(test::set_cut(sup, Labeling{0, 1}) == -2.0);
  CHECK_THROWS_AS(modular_approximation(sup, Permutation({0})), std::invalid_argument);
}

TEST_CASE("modular approximation bounds the supermodular cut and is tight on the chain") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 9);
    const CharGraph sup = test::random_sup_graph(n, 0.5, rng);
    const Labeling init = random_labeling(n, rng());
    const auto order = Permutation::consistent_with(init, rng);
    const ModularFn m = modular_approximation(sup, order);

    test::for_each_labeling(n, [&](const Labeling& x) { CHECK(m(x) >= test::set_cut(sup, x) - 1e-9); });

    Labeling prefix(n, 0);
    CHECK(m(prefix) == 0.0);
    for (int u : order.order()) {
      prefix[u] = 1;
      CHECK(close(m(prefix), test::set_cut(sup, prefix)));
    }
    CHECK(close(m(init), test::set_cut(sup, init)));
  }
}

TEST_CASE("submodular functions are solved exactly and certified") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const Qpbf f = test::random_submodular_qpbf(n, 0.5, rng);
    const auto opt = brute_force_min(f);
    const auto r = essp_minimize(f, random_labeling(n, rng()));
    CHECK(r.global_optimum_certified);
    CHECK(r.maxflow_solves == 1);
    CHECK(std::abs(r.energy - opt.energy) <= test::energy_tol(f));
    CHECK(r.energy == evaluate(f, r.labeling));
  }
}

TEST_CASE("a function that becomes submodular after flipping is certified") {
  // −x1x2 + x2x3 with linear terms: flipping x3 removes the only negative edge.
  const Qpbf f = std_function(3, {{0, 1, -1.0}, {1, 2, 1.0}}, {0.3, -0.2, 0.4});
  const auto r = essp_minimize(f, Labeling{0, 0, 0});
  CHECK(r.global_optimum_certified);
  CHECK(r.suppression_flips == std::vector<int>{2});
  CHECK(r.energy == doctest::Approx(brute_force_min(f).energy));
}

TEST_CASE("ESSP descends and its bounds sandwich consecutive energies") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 4 + static_cast<int>(rng() % 11);
    const Qpbf f = test::random_qpbf(n, 0.6, rng);
    const Labeling init = random_labeling(n, rng());
    std::vector<double> seen;
    EsspOptions opts;
    opts.seed = rng();
    opts.on_improve = [&](double e, const Labeling& x) { CHECK(close(e, evaluate(f, x))); seen.push_back(e); };
    const auto r = essp_minimize(f, init, opts);
    const double tol = test::energy_tol(f);

    REQUIRE(!r.energies.empty());
    CHECK(r.energies.front() == evaluate(f, init));
    CHECK(r.energies.back() == r.energy);
    CHECK(r.energy == evaluate(f, r.labeling));
    CHECK(r.upper_bounds.size() + 1 == r.energies.size());
    CHECK(seen.size() == r.upper_bounds.size());
    for (std::size_t k = 0; k < r.upper_bounds.size(); ++k) {
      CHECK(r.energies[k + 1] < r.energies[k]);
      CHECK(r.energies[k + 1] <= r.upper_bounds[k] + tol);
      CHECK(r.upper_bounds[k] <= r.energies[k] + tol);
    }
    CHECK(r.energy >= brute_force_min(f).energy - tol);
  }
}

TEST_CASE("ESSP is deterministic for a fixed seed") {
  std::mt19937_64 rng(42);
  const Qpbf f = test::random_qpbf(14, 0.5, rng);
  const Labeling init = random_labeling(14, 5);
  EsspOptions opts;
  opts.seed = 99;
  const auto a = essp_minimize(f, init, opts);
  const auto b = essp_minimize(f, init, opts);
  CHECK(a.labeling == b.labeling);
  CHECK(a.energies == b.energies);
}

TEST_CASE("an unchanged modular term reuses the previous solve") {
  // Frustrated triangle: after suppression only the edge {1, 2} stays negative.
  const Qpbf f = std_function(3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}});
  const auto r = essp_minimize(f, Labeling{0, 1, 0});
  CHECK(!r.global_optimum_certified);
  CHECK(r.iterations == 0);
  CHECK(r.maxflow_solves == 1);
  CHECK(r.reused_solves == 4);
  CHECK(r.energy == 0.0);
}

TEST_CASE("ESSP option and input errors") {
  Qpbf f(3);
  CHECK_THROWS_AS(essp_minimize(f, Labeling{0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(essp_minimize(f, Labeling::from_string("0.1")), std::invalid_argument);
  EsspOptions opts;
  opts.permutations_per_iteration = 0;
  CHECK_THROWS_AS(essp_minimize(f, Labeling{0, 1, 0}, opts), std::invalid_argument);
}

TEST_CASE("iteration cap and time budget stop the loop") {
  std::mt19937_64 rng(43);
  const Qpbf f = test::random_qpbf(20, 0.5, rng);
  EsspOptions opts;
  opts.max_iterations = 1;
  CHECK(essp_minimize(f, random_labeling(20, 1), opts).iterations <= 1);
  opts.max_iterations = 1000;
  opts.time_budget = 1e-9;
  const auto r = essp_minimize(f, random_labeling(20, 1), opts);
  CHECK(r.iterations == 0);
}

TEST_CASE("local refinement with no free variables returns the input") {
  std::mt19937_64 rng(50);
  const Qpbf f = test::random_qpbf(6, 0.6, rng);
  const Labeling init = random_labeling(6, 3);
  const auto r = essp_refine_local(f, init, {});
  CHECK(r.labeling == init);
  CHECK(r.energy == evaluate(f, init));
  CHECK(r.maxflow_solves == 0);
}

TEST_CASE("local refinement only moves free variables") {
  std::mt19937_64 rng(51);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 10;
    const Qpbf f = test::random_qpbf(n, 0.6, rng);
    const Labeling init = random_labeling(n, rng());
    std::vector<VarId> free_vars;
    for (int u = 0; u < n; ++u)
      if (rng() % 2) free_vars.push_back(u);
    const auto r = essp_refine_local(f, init, free_vars);
    for (int u = 0; u < n; ++u)
      if (std::find(free_vars.begin(), free_vars.end(), u) == free_vars.end()) CHECK(r.labeling[u] == init[u]);
    CHECK(r.energy <= evaluate(f, init));
    CHECK(r.energy >= restricted_min(f, init, free_vars) - test::energy_tol(f));
  }
}

TEST_CASE("local refinement of a submodular function is exact on the free set") {
  std::mt19937_64 rng(52);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 10;
    const Qpbf f = test::random_submodular_qpbf(n, 0.6, rng);
    const Labeling init = random_labeling(n, rng());
    const std::vector<VarId> free_vars{1, 2, 5, 7, 8};
    const auto r = essp_refine_local(f, init, free_vars);
    CHECK(r.global_optimum_certified);
    CHECK(std::abs(r.energy - restricted_min(f, init, free_vars)) <= test::energy_tol(f));
  }
}

TEST_CASE("local refinement over every variable matches the global run") {
  std::mt19937_64 rng(53);
  const Qpbf f = test::random_qpbf(12, 0.6, rng);
  const Labeling init = random_labeling(12, 8);
  std::vector<VarId> all(12);
  std::iota(all.begin(), all.end(), 0);
  EsspOptions opts;
  opts.seed = 4;
  const auto local = essp_refine_local(f, init, all, opts);
  const auto global = essp_minimize(f, init, opts);
  CHECK(local.labeling == global.labeling);
  CHECK(local.energies == global.energies);
  CHECK_THROWS_AS(essp_refine_local(f, init, {12}), std::out_of_range);
}
