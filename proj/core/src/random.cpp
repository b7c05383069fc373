#include "wstl/random.hpp"

#include <algorithm>

namespace wstl {

namespace {

Formula generate(Rng& rng, const RandomFormulaOptions& o, std::size_t depth_left, std::size_t horizon_budget) {
  std::uniform_real_distribution<double> coef(-o.coefficient_range, o.coefficient_range);
  std::uniform_real_distribution<double> weight(o.min_weight, o.max_weight);

  auto leaf = [&]() {
    if (o.allow_true && std::uniform_int_distribution<int>(0, 5)(rng) == 0) return Formula::truth();
    std::vector<double> a(o.dimension);
    for (double& v : a) v = coef(rng);
    return Formula::predicate(std::move(a), coef(rng));
  };

  if (depth_left <= 1) return leaf();

  // 0 leaf, 1 not, 2 and, 3 or, 4 always, 5 eventually
  int choice = std::uniform_int_distribution<int>(0, 5)(rng);
  if ((choice == 4 || choice == 5) && horizon_budget < 2) choice = 2 + (choice - 4);

  switch (choice) {
    case 0: return leaf();
    case 1: return Formula::negation(generate(rng, o, depth_left - 1, horizon_budget));
    case 2:
    case 3: {
      double w1 = weight(rng);
      Formula lhs = generate(rng, o, depth_left - 1, horizon_budget);
      double w2 = weight(rng);
      Formula rhs = generate(rng, o, depth_left - 1, horizon_budget);
      return choice == 2 ? Formula::conjunction(w1, std::move(lhs), w2, std::move(rhs))
                         : Formula::disjunction(w1, std::move(lhs), w2, std::move(rhs));
    }
    default: {
      // k2 <= budget - 1 leaves room for a child of horizon >= 1
      const std::size_t k2 = std::uniform_int_distribution<std::size_t>(0, horizon_budget - 1)(rng);
      const std::size_t min_k1 = k2 + 1 >= o.max_interval_length ? k2 + 1 - o.max_interval_length : 0;
      const std::size_t k1 = std::uniform_int_distribution<std::size_t>(min_k1, k2)(rng);
      std::vector<double> w(k2 - k1 + 1);
      for (double& v : w) v = weight(rng);
      Formula child = generate(rng, o, depth_left - 1, horizon_budget - k2);
      Interval I{k1, k2};
      return choice == 4 ? Formula::always(I, std::move(w), std::move(child))
                         : Formula::eventually(I, std::move(w), std::move(child));
    }
  }
}

}  // namespace

Formula random_formula(Rng& rng, const RandomFormulaOptions& options) {
  return generate(rng, options, std::max<std::size_t>(1, options.max_depth), std::max<std::size_t>(1, options.max_horizon));
}

SignalMatrix random_signal(Rng& rng, std::size_t features, std::size_t steps, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  SignalMatrix s(features, steps);
  for (std::size_t f = 0; f < features; ++f) {
    for (std::size_t t = 0; t < steps; ++t) s(f, t) = dist(rng);
  }
  return s;
}

}  // namespace wstl
