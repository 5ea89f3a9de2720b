#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpbf/qpbf.hpp"

namespace qpbf {

/// Solver pipeline by name. A name is a chain of stages joined by '+':
///   bp, icm, qpbo, essp, qpboi          single solver
///   rand+essp, bp+essp, qpbo+essp       initializer then ESSP
///   rand+qpboi, bp+qpboi                initializer then QPBO-I
///   rand+essp+i                         ESSP, then QPBO-I on its output
/// A chain without an initializer (essp, qpboi, icm) starts from the labeling
/// passed in the request, or a random one.
struct SolverSpec {
  std::string name;
  std::optional<int> max_iterations;  // of the last stage; solver default if unset
  int init_iterations = 50;           // BP iterations when BP only initializes
  int permutations = 5;               // ESSP permutations per iteration
};

struct TraceSample {
  double time;    // seconds since the run started
  double energy;  // best energy seen so far
};

struct RunTrace {
  std::string solver;
  std::string instance;
  std::uint64_t seed = 0;
  std::vector<TraceSample> samples;
  Labeling labeling;
  double energy = 0.0;
  double elapsed = 0.0;
  std::optional<double> labeled_fraction;  // QPBO stages only

  std::uint64_t labeling_hash() const;
};

struct RunRequest {
  std::string instance;
  std::uint64_t seed = 0;
  std::optional<double> budget;  // seconds for the whole chain
  std::optional<Labeling> init;
};

/// Throws std::invalid_argument for names that do not parse.
void check_solver_name(const std::string& name);

/// Names used by the default benchmark configuration.
const std::vector<std::string>& standard_solvers();

RunTrace run_solver(const SolverSpec& spec, const Qpbf& f, const RunRequest& req);

}  // namespace qpbf
