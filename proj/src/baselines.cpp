#include "qpbf/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qpbf/char_graph.hpp"
#include "qpbf/maxflow.hpp"

namespace qpbf {

namespace {

using Clock = std::chrono::steady_clock;

bool out_of_time(const SolverOpts& opts, Clock::time_point start) {
  if (!opts.time_budget) return false;
  return std::chrono::duration<double>(Clock::now() - start).count() >= *opts.time_budget;
}

void check_init(const Qpbf& f, const Labeling& init) {
  if (static_cast<int>(init.size()) != f.num_vars()) throw std::invalid_argument("init length mismatch");
  if (!init.is_complete()) throw std::invalid_argument("init labeling is incomplete");
}

}  // namespace

void SolverOpts::validate() const {
  if (!(damping >= 0.0 && damping < 1.0)) throw std::invalid_argument("damping must lie in [0, 1)");
  if (max_iterations < 0) throw std::invalid_argument("max_iterations must be nonnegative");
  if (time_budget && !(*time_budget > 0.0)) throw std::invalid_argument("time budget must be positive");
}

Labeling random_labeling(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Labeling x(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) x[i] = static_cast<std::int8_t>(rng() >> 63);
  return x;
}

// ---------------------------------------------------------------------------
// ICM

SolveResult icm(const Qpbf& f, const Labeling& init, const SolverOpts& opts) {
  check_init(f, init);
  opts.validate();
  const auto start = Clock::now();
  SolveResult r{init, 0.0, 0};

  auto local = [&](VarId u, int a) {
    double e = f.unary(u)[a];
    for (int idx : f.incident(u)) {
      const auto& p = f.pairs()[idx];
      const VarId other = p.u == u ? p.v : p.u;
      e += pair_energy_from(p, u, a, r.labeling[other]);
    }
    return e;
  };

  bool changed = true;
  while (changed && r.iterations < opts.max_iterations && !out_of_time(opts, start)) {
    changed = false;
    for (VarId u = 0; u < f.num_vars(); ++u) {
      const int cur = r.labeling[u];
      if (local(u, 1 - cur) < local(u, cur)) {
        r.labeling[u] = static_cast<std::int8_t>(1 - cur);
        changed = true;
      }
    }
    ++r.iterations;
    if (changed && opts.on_improve) opts.on_improve(evaluate(f, r.labeling), r.labeling);
  }
  r.energy = evaluate(f, r.labeling);
  return r;
}

// ---------------------------------------------------------------------------
// Min-sum BP

SolveResult bp_min_sum(const Qpbf& f, const SolverOpts& opts) {
  opts.validate();
  const auto start = Clock::now();
  const int n = f.num_vars();
  const auto& pairs = f.pairs();
  const std::size_t m = pairs.size();

  // msg[2p] : u→v as a function of x_v ; msg[2p+1] : v→u as a function of x_u
  std::vector<std::array<double, 2>> msg(2 * m, {0.0, 0.0});
  std::vector<std::array<double, 2>> next(2 * m);
  std::vector<std::array<double, 2>> belief(n);

  auto compute_beliefs = [&]() {
    for (int u = 0; u < n; ++u) belief[u] = f.unary(u);
    for (std::size_t p = 0; p < m; ++p) {
      for (int a = 0; a < 2; ++a) {
        belief[pairs[p].v][a] += msg[2 * p][a];
        belief[pairs[p].u][a] += msg[2 * p + 1][a];
      }
    }
  };
  auto decode = [&]() {
    Labeling x(static_cast<std::size_t>(n), 0);
    for (int u = 0; u < n; ++u) x[u] = belief[u][1] < belief[u][0] ? 1 : 0;
    return x;
  };

  SolveResult best{Labeling{}, std::numeric_limits<double>::infinity(), 0};
  auto consider = [&](int iteration) {
    Labeling x = decode();
    const double e = evaluate(f, x);
    if (e < best.energy) {
      best = {std::move(x), e, iteration};
      if (opts.on_improve) opts.on_improve(best.energy, best.labeling);
    }
  };

  const double lambda = opts.damping;
  int it = 0;
  compute_beliefs();
  consider(0);
  for (it = 1; it <= opts.max_iterations; ++it) {
    if (out_of_time(opts, start)) break;
    double change = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      const auto& t = pairs[p];
      for (int dir = 0; dir < 2; ++dir) {
        // dir 0: u→v, dir 1: v→u
        const VarId from = dir == 0 ? t.u : t.v;
        const auto& back = msg[2 * p + (1 - dir)];
        std::array<double, 2> out{};
        for (int b = 0; b < 2; ++b) {
          double best_a = std::numeric_limits<double>::infinity();
          for (int a = 0; a < 2; ++a) {
            const double pot = dir == 0 ? table_at(t.table, a, b) : table_at(t.table, b, a);
            best_a = std::min(best_a, belief[from][a] - back[a] + pot);
          }
          out[b] = best_a;
        }
        const double shift = std::min(out[0], out[1]);
        auto& dst = next[2 * p + dir];
        const auto& old = msg[2 * p + dir];
        for (int b = 0; b < 2; ++b) {
          dst[b] = lambda * old[b] + (1.0 - lambda) * (out[b] - shift);
          change = std::max(change, std::abs(dst[b] - old[b]));
        }
      }
    }
    msg.swap(next);
    compute_beliefs();
    consider(it);
    if (change < 1e-6) break;
  }
  best.iterations = std::min(it, opts.max_iterations);
  return best;
}

// ---------------------------------------------------------------------------
// QPBO

Labeling qpbo(const Qpbf& f) {
  const int n = f.num_vars();
  const StdQpbf s = to_standard(f);

  // Node p carries x_p and node n+p carries 1 − x_p; each monomial is
  // represented half on each copy.
  const int src = 2 * n;
  const int snk = 2 * n + 1;
  FlowNet net(2 * n + 2, src, snk);
  auto comp = [n](int p) { return n + p; };

  std::vector<double> linear = s.linear;
  for (const auto& q : s.quad) {
    const double h = 0.5 * std::abs(q.coef);
    if (q.coef < 0.0) {
      // b·x_p·x_q = b·x_p + |b|·x_p·(1 − x_q)
      linear[q.u] += q.coef;
      net.add_arc(q.v, q.u, h);
      net.add_arc(comp(q.u), comp(q.v), h);
    } else {
      net.add_arc(comp(q.v), q.u, h);
      net.add_arc(comp(q.u), q.v, h);
    }
  }
  for (int p = 0; p < n; ++p) {
    const double a = linear[p];
    if (a > 0.0) {
      net.add_arc(src, p, 0.5 * a);
      net.add_arc(comp(p), snk, 0.5 * a);
    } else if (a < 0.0) {
      net.add_arc(p, snk, -0.5 * a);
      net.add_arc(src, comp(p), -0.5 * a);
    }
  }

  const auto cut = net.solve();
  Labeling x(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p)
    if (cut.side[p] != cut.side[comp(p)]) x[p] = cut.side[p];
  return x;
}

SolveResult qpbo_improve(const Qpbf& f, const Labeling& init, const SolverOpts& opts) {
  check_init(f, init);
  opts.validate();
  const auto start = Clock::now();
  const int n = f.num_vars();
  SolveResult r{init, evaluate(f, init), 0};
  if (opts.max_iterations == 0 || n == 0) return r;

  std::mt19937_64 rng(opts.seed);
  const CharGraph g = characterize(f);
  std::vector<VarId> vars(n);
  std::iota(vars.begin(), vars.end(), 0);

  auto fuse = [&](Labeling cand) {
    const double e = evaluate(f, cand);
    if (e <= r.energy) {
      const bool better = e < r.energy;
      r.labeling = std::move(cand);
      r.energy = e;
      if (better && opts.on_improve) opts.on_improve(e, r.labeling);
    }
  };

  {
    const Labeling partial = qpbo(f);
    Labeling cand = r.labeling;
    for (int u = 0; u < n; ++u)
      if (partial.is_labeled(u)) cand[u] = partial[u];
    fuse(std::move(cand));
    r.iterations = 1;
  }

  while (r.iterations < opts.max_iterations && !out_of_time(opts, start)) {
    std::shuffle(vars.begin(), vars.end(), rng);
    Labeling partial = r.labeling;
    for (int k = n / 2; k < n; ++k) partial[vars[k]] = kUnlabeled;  // second half stays free

    const CharGraph rest = simplify(g, partial);
    const Labeling local = qpbo(to_qpbf(rest));
    Labeling cand = r.labeling;
    for (int i = 0; i < rest.num_nodes(); ++i)
      if (local.is_labeled(i)) cand[rest.origin(i)] = local[i];
    fuse(std::move(cand));
    ++r.iterations;
  }
  return r;
}

}  // namespace qpbf
