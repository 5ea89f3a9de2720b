#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qpbf/qpbf.hpp"

namespace qpbf {

/// Target hardness factors for a random instance.
///   cr: connectivity, 2·(edge count)/n²
///   sr: fraction of variable edges with negative capacity
///   ug: mean indicator magnitude over mean variable-edge magnitude
struct FactorSpec {
  int n = 0;
  double cr = 0.5;
  double sr = 0.5;
  double ug = 0.1;
  double scale = 10.0;
  std::uint64_t seed = 0;

  /// Number of pairwise terms the spec asks for.
  std::size_t target_edges() const;
  /// Throws std::invalid_argument when the spec is out of range or infeasible.
  void validate() const;
};

struct Factors {
  double cr = 0.0;
  double sr = 0.0;
  double ug = 0.0;
};

/// Standard-form instance hitting cr and sr exactly (up to rounding of the
/// edge counts) and ug up to floating point round-off.
Qpbf generate(const FactorSpec& spec);

/// Factors of the normalized characterization of f, before any flipping.
Factors measure_factors(const Qpbf& f);

/// One JSON object per line with keys n, cr, sr, ug, scale, seed.
/// Blank lines are skipped; missing scale/seed take defaults.
std::vector<FactorSpec> read_spec_lines(std::istream& is);
FactorSpec parse_spec(const std::string& json_line);

}  // namespace qpbf
