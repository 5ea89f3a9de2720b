// bench: run a solver matrix, replot stored traces, or solve one instance.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>

#include <CLI11.hpp>

#include "qpbf/bench.hpp"
#include "qpbf/qpbf.hpp"
#include "qpbf/solvers.hpp"

using namespace qpbf;
namespace fs = std::filesystem;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int run_cmd(const std::string& config_path, const std::string& out_override) {
  BenchConfig cfg;
  try {
    cfg = load_config(config_path);
    if (!out_override.empty()) cfg.out = out_override;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const std::size_t total = make_instances(cfg).size() * cfg.solvers.size();
  std::cerr << "running " << total << " runs on " << worker_count(cfg) << " worker(s), " << cfg.budget
            << " s budget each\n";
  std::mutex mu;
  std::size_t done = 0;
  const BenchResult result = run_matrix(cfg, [&](const RunTrace& t) {
    std::lock_guard lock(mu);
    ++done;
    std::fprintf(stderr, "[%zu/%zu] %-12s %-24s %.10g (%.2f s)\n", done, total, t.solver.c_str(),
                 t.instance.c_str(), t.energy, t.elapsed);
  });
  emit_reports(factor_plots(cfg, result), result, cfg.out);
  std::cout << "wrote " << cfg.out.string() << "\n";
  return 0;
}

int plot_cmd(const std::string& dir, const std::string& factor_name_arg, double value, std::string out) {
  Factor factor;
  try {
    factor = parse_factor(factor_name_arg);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const BenchResult result = load_results(dir);
  char buf[96];
  Plot plot;
  std::snprintf(buf, sizeof buf, "%s_%g", factor_name(factor).c_str(), value);
  plot.name = buf;
  std::snprintf(buf, sizeof buf, "%s = %g", factor_name(factor).c_str(), value);
  plot.title = buf;
  try {
    plot.curves = marginalize(result, factor, value);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (out.empty()) out = (fs::path(dir) / (plot.name + ".svg")).string();
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot write " + out);
  os << render_svg(plot);
  for (const auto& c : plot.curves)
    std::printf("%-12s runs %zu  final mean %.10g\n", c.solver.c_str(), c.count, c.energies.back());
  std::cout << "wrote " << out << "\n";
  return 0;
}

int solve_cmd(const std::string& file, std::string solver, const std::string& init, std::uint64_t seed,
              std::optional<double> budget, std::optional<int> iterations, const std::string& out) {
  if (!init.empty()) solver = init + "+" + solver;
  SolverSpec spec{solver, iterations};
  try {
    check_solver_name(solver);
    if (budget && !(*budget > 0)) throw std::invalid_argument("budget must be positive");
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const Qpbf f = load_qpbf(file);
  RunRequest req;
  req.instance = fs::path(file).stem().string();
  req.seed = seed;
  req.budget = budget;
  const RunTrace t = run_solver(spec, f, req);
  std::printf("solver   %s\nenergy   %.17g\nbound    %.17g\ntime     %.6f s\n", t.solver.c_str(), t.energy,
              term_wise_lower_bound(f), t.elapsed);
  if (t.labeled_fraction) std::printf("labeled  %.4f\n", *t.labeled_fraction);
  if (!out.empty()) {
    std::ofstream os(out);
    os << t.labeling.to_string() << "\n";
  } else {
    std::printf("labeling %s\n", t.labeling.to_string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for binary pairwise energy minimizers"};
  app.require_subcommand(1);

  std::string config, out_dir;
  auto* run = app.add_subcommand("run", "Run every solver on every instance of a config");
  run->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides the config)");

  std::string traces, factor, svg;
  double value = 0;
  auto* plot = app.add_subcommand("plot", "Average stored traces over one factor value");
  plot->add_option("--traces", traces, "Directory written by `bench run`")->required()->check(CLI::ExistingDirectory);
  plot->add_option("--factor", factor, "cr, sr or ug")->required();
  plot->add_option("--value", value, "Factor value")->required();
  plot->add_option("--out", svg, "SVG path");

  std::string qpbf_file, solver = "essp", init, labeling_out;
  std::uint64_t seed = 0;
  std::optional<double> budget;
  std::optional<int> iterations;
  auto* solve = app.add_subcommand("solve", "Minimize one QPBF file");
  solve->add_option("--qpbf", qpbf_file, "Instance file")->required()->check(CLI::ExistingFile);
  solve->add_option("--solver", solver, "Solver chain, e.g. essp, bp, rand+qpboi");
  solve->add_option("--init", init, "Initializer prepended to the chain (rand, bp, qpbo)");
  solve->add_option("--seed", seed);
  solve->add_option("--budget", budget, "Seconds");
  solve->add_option("--iterations", iterations, "Iteration cap of the last stage");
  solve->add_option("--out", labeling_out, "Write the labeling here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return run_cmd(config, out_dir);
    if (*plot) return plot_cmd(traces, factor, value, svg);
    return solve_cmd(qpbf_file, solver, init, seed, budget, iterations, labeling_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
