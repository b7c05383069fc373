#pragma once

#include <cstddef>
#include <random>

#include "wstl/formula.hpp"
#include "wstl/semantics.hpp"

namespace wstl {

using Rng = std::mt19937_64;

struct RandomFormulaOptions {
  /// Nodes on the longest root-to-leaf path.
  std::size_t max_depth = 3;
  std::size_t dimension = 2;
  /// Upper bound on horizon(phi).
  std::size_t max_horizon = 12;
  std::size_t max_interval_length = 4;
  bool allow_true = false;
  double min_weight = 0.5;
  double max_weight = 1.5;
  double coefficient_range = 1.0;
};

/// Random formula with every operator kind reachable. Predicate coefficients
/// and offsets are uniform in +-coefficient_range, weights uniform in
/// [min_weight, max_weight].
Formula random_formula(Rng& rng, const RandomFormulaOptions& options);

/// l x T signal with entries uniform in [lo, hi].
SignalMatrix random_signal(Rng& rng, std::size_t features, std::size_t steps, double lo = -2.0, double hi = 2.0);

}  // namespace wstl
