#include "qpbf/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <stdexcept>

#include "qpbf/baselines.hpp"
#include "qpbf/essp.hpp"

namespace qpbf {

namespace {

using Clock = std::chrono::steady_clock;

enum class Stage { kRand, kBp, kQpbo, kIcm, kEssp, kQpboI };

std::vector<Stage> parse_stages(const std::string& name) {
  std::vector<std::string> tokens;
  std::stringstream ss(name);
  for (std::string t; std::getline(ss, t, '+');) tokens.push_back(t);
  if (tokens.empty()) throw std::invalid_argument("empty solver name");

  std::vector<Stage> stages;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    const bool first = i == 0;
    if (first && t == "rand") stages.push_back(Stage::kRand);
    else if (first && t == "bp") stages.push_back(Stage::kBp);
    else if (first && t == "qpbo") stages.push_back(Stage::kQpbo);
    else if (t == "icm") stages.push_back(Stage::kIcm);
    else if (t == "essp") stages.push_back(Stage::kEssp);
    else if (t == "qpboi" || (!first && t == "i")) stages.push_back(Stage::kQpboI);
    else throw std::invalid_argument("unknown solver '" + name + "' (bad stage '" + t + "')");
  }
  return stages;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Keeps the best energy seen so far, stamped with elapsed time.
class Recorder {
 public:
  explicit Recorder(RunTrace& trace) : trace_(trace), start_(Clock::now()) {}

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  void record(double energy) {
    if (trace_.samples.empty() || energy < trace_.samples.back().energy)
      trace_.samples.push_back({elapsed(), energy});
  }

  void finish(double energy) {
    trace_.elapsed = elapsed();
    const double best = trace_.samples.empty() ? energy : std::min(energy, trace_.samples.back().energy);
    trace_.samples.push_back({trace_.elapsed, best});
  }

 private:
  RunTrace& trace_;
  Clock::time_point start_;
};

}  // namespace

std::uint64_t RunTrace::labeling_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < labeling.size(); ++i) {
    h ^= static_cast<std::uint8_t>(labeling[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void check_solver_name(const std::string& name) { parse_stages(name); }

const std::vector<std::string>& standard_solvers() {
  static const std::vector<std::string> names{"bp",         "icm",        "qpbo",       "rand+essp",
                                              "bp+essp",    "rand+qpboi", "bp+qpboi",   "rand+essp+i"};
  return names;
}

RunTrace run_solver(const SolverSpec& spec, const Qpbf& f, const RunRequest& req) {
  const auto stages = parse_stages(spec.name);
  const int n = f.num_vars();
  if (req.init && (static_cast<int>(req.init->size()) != n || !req.init->is_complete()))
    throw std::invalid_argument("run_solver: init labeling does not fit the instance");
  if (req.budget && !(*req.budget > 0.0)) throw std::invalid_argument("run_solver: budget must be positive");

  RunTrace trace;
  trace.solver = spec.name;
  trace.instance = req.instance;
  trace.seed = req.seed;
  Recorder rec(trace);
  auto on_improve = [&](double e, const Labeling&) { rec.record(e); };

  std::optional<Labeling> x;
  double energy = 0.0;
  auto set = [&](Labeling y, double e) {
    x = std::move(y);
    energy = e;
    rec.record(e);
  };
  auto start_point = [&](std::uint64_t seed) {
    if (!x) {
      Labeling y = req.init ? *req.init : random_labeling(n, seed);
      const double e = evaluate(f, y);
      set(std::move(y), e);
    }
    return *x;
  };
  auto remaining = [&]() -> std::optional<double> {
    if (!req.budget) return std::nullopt;
    return std::max(*req.budget - rec.elapsed(), 1e-9);
  };

  for (std::size_t i = 0; i < stages.size(); ++i) {
    const bool last = i + 1 == stages.size();
    if (i > 0 && req.budget && rec.elapsed() >= *req.budget) break;
    const std::uint64_t seed = splitmix(req.seed + 0x51ed27ULL * (i + 1));

    switch (stages[i]) {
      case Stage::kRand: {
        Labeling y = random_labeling(n, seed);
        const double e = evaluate(f, y);
        set(std::move(y), e);
        break;
      }
      case Stage::kBp: {
        SolverOpts o;
        // Standalone BP follows the initializer's schedule, so bp+X starts exactly where bp ends.
        o.max_iterations = last ? spec.max_iterations.value_or(spec.init_iterations) : spec.init_iterations;
        o.time_budget = remaining();
        o.on_improve = on_improve;
        auto r = bp_min_sum(f, o);
        set(std::move(r.labeling), r.energy);
        break;
      }
      case Stage::kQpbo: {
        const Labeling partial = qpbo(f);
        trace.labeled_fraction = n == 0 ? 1.0 : static_cast<double>(partial.labeled_count()) / n;
        // Unresolved variables keep the request's start labeling, or 0.
        Labeling y = req.init ? *req.init : Labeling(n, 0);
        for (int u = 0; u < n; ++u)
          if (partial.is_labeled(u)) y[u] = partial[u];
        const double e = evaluate(f, y);
        set(std::move(y), e);
        break;
      }
      case Stage::kIcm: {
        const Labeling init = start_point(seed);
        SolverOpts o;
        o.max_iterations = spec.max_iterations.value_or(500);
        o.time_budget = remaining();
        o.on_improve = on_improve;
        auto r = icm(f, init, o);
        set(std::move(r.labeling), r.energy);
        break;
      }
      case Stage::kEssp: {
        const Labeling init = start_point(seed);
        EsspOptions o;
        o.seed = seed;
        o.permutations_per_iteration = spec.permutations;
        if (last && spec.max_iterations) o.max_iterations = *spec.max_iterations;
        o.time_budget = remaining();
        o.on_improve = on_improve;
        auto r = essp_minimize(f, init, o);
        set(std::move(r.labeling), r.energy);
        break;
      }
      case Stage::kQpboI: {
        const Labeling init = start_point(seed);
        SolverOpts o;
        o.seed = seed;
        o.max_iterations = last ? spec.max_iterations.value_or(100) : 100;
        o.time_budget = remaining();
        o.on_improve = on_improve;
        auto r = qpbo_improve(f, init, o);
        set(std::move(r.labeling), r.energy);
        break;
      }
    }
  }

  trace.labeling = *x;
  trace.energy = energy;
  rec.finish(energy);
  return trace;
}

}  // namespace qpbf
