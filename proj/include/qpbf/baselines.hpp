#pragma once

#include <cstdint>
#include <optional>

#include "qpbf/essp.hpp"
#include "qpbf/qpbf.hpp"

namespace qpbf {

struct SolverOpts {
  std::uint64_t seed = 0;
  int max_iterations = 500;
  double damping = 0.5;  // BP only, in [0, 1)
  std::optional<double> time_budget;  // seconds
  ImproveCallback on_improve;

  void validate() const;
};

struct SolveResult {
  Labeling labeling;
  double energy = 0.0;
  int iterations = 0;
};

/// iid fair bits.
Labeling random_labeling(int n, std::uint64_t seed);

/// Iterated conditional modes: sweeps variables in index order, moving each
/// to its conditional minimizer (strict improvements only) until a sweep
/// changes nothing. The result is stable under any single flip.
SolveResult icm(const Qpbf& f, const Labeling& init, const SolverOpts& opts = {});

/// Synchronous min-sum loopy belief propagation with damping. Messages are
/// shifted to min 0 after every update; iteration stops at max_iterations
/// or when no message moves by more than 1e-6. Each variable is decoded by
/// its smallest belief (ties to 0).
SolveResult bp_min_sum(const Qpbf& f, const SolverOpts& opts = {});

/// Roof-duality partial labeling. Every labeled variable takes the value it
/// has in some global minimizer, and all labeled variables can be kept at
/// once; unresolved variables are left unlabeled.
Labeling qpbo(const Qpbf& f);

/// QPBO-I: starting from `init`, the first round fuses the plain QPBO
/// labeling into the current one; later rounds fix a random half of the
/// variables at their current labels, run QPBO on the remaining ones and
/// fuse whatever it labels. Energy never increases.
SolveResult qpbo_improve(const Qpbf& f, const Labeling& init, const SolverOpts& opts = {});

}  // namespace qpbf
