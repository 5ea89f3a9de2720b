#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpbf/solvers.hpp"
#include "qpbf/synth.hpp"

namespace qpbf {

struct BenchConfig {
  int n = 200;
  int instances_per_cell = 5;
  std::vector<double> cr{0.1, 0.3, 0.5};
  std::vector<double> sr{0.1, 0.3, 0.5};
  std::vector<double> ug{0.0, 0.1};
  double scale = 10.0;
  std::vector<SolverSpec> solvers;
  double budget = 10.0;  // seconds per run
  std::filesystem::path out = "bench_out";
  std::uint64_t seed = 1;
  int workers = 0;  // 0: hardware concurrency, further capped by QPBF_THREADS

  void validate() const;
};

/// Fields absent from the JSON keep the defaults above; unknown keys and
/// bad values throw std::invalid_argument.
BenchConfig parse_config(const nlohmann::json& j);
BenchConfig load_config(const std::filesystem::path& file);

struct Instance {
  std::string id;
  FactorSpec spec;
};

struct BenchResult {
  std::vector<Instance> instances;
  std::vector<RunTrace> traces;  // instance-major, solvers in config order
};

std::vector<Instance> make_instances(const BenchConfig& cfg);

int worker_count(const BenchConfig& cfg);

BenchResult run_matrix(const BenchConfig& cfg, const std::function<void(const RunTrace&)>& on_done = {});

enum class Factor { kCr, kSr, kUg };
Factor parse_factor(const std::string& name);
std::string factor_name(Factor f);
double factor_of(const FactorSpec& spec, Factor f);

struct Curve {
  std::string solver;
  std::vector<double> times;
  std::vector<double> energies;  // pointwise mean
  std::size_t count = 0;         // traces averaged
};

/// Best-so-far energy of a trace at time t; times before the first sample
/// take the first energy.
double energy_at(const RunTrace& trace, double t);

/// `points` log-spaced times covering every sample of the traces.
std::vector<double> log_grid(const std::vector<const RunTrace*>& traces, int points = 60);

/// Per-solver mean curves over the traces whose instance has `factor == value`.
/// An empty grid means log_grid over the matching traces.
std::vector<Curve> marginalize(const BenchResult& result, Factor factor, double value,
                               std::vector<double> grid = {});

struct Plot {
  std::string name;  // file stem
  std::string title;
  std::vector<Curve> curves;
};

std::string render_svg(const Plot& plot);

/// Writes traces.csv, summary.json and <plot.name>.svg for each plot.
/// Throws before touching the directory when there is nothing to plot.
void emit_reports(const std::vector<Plot>& plots, const BenchResult& result, const std::filesystem::path& dir);

/// Plots for every value of every factor in the grid.
std::vector<Plot> factor_plots(const BenchConfig& cfg, const BenchResult& result);

/// Reads back what emit_reports wrote (instances, final labelings, samples).
BenchResult load_results(const std::filesystem::path& dir);

}  // namespace qpbf
