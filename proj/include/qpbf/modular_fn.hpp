#pragma once

#include <vector>

#include "qpbf/qpbf.hpp"

namespace qpbf {

/// Modular set function m(x) = const + Σ weights_u · x_u.
struct ModularFn {
  std::vector<double> weights;
  double constant = 0.0;

  double operator()(const Labeling& x) const {
    double s = constant;
    for (std::size_t u = 0; u < weights.size(); ++u)
      if (x[u] == 1) s += weights[u];
    return s;
  }

  friend bool operator==(const ModularFn&, const ModularFn&) = default;
};

}  // namespace qpbf
