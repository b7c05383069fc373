#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace wstl {

/// Outcome of one randomized property check.
struct PropertyResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double worst = 0.0;  // largest observed deviation, property-specific
  double tolerance = 0.0;
  std::string first_failure;

  bool passed() const { return instances > 0 && failures == 0; }
};

/// Perturbing inputs of zero-weight entries leaves the output bit-identical,
/// both for bare aggregates and for sparsified Always formulas.
PropertyResult check_non_influence(std::size_t instances, std::uint64_t seed);
/// Adding d >= 0 to every input of an And/Always aggregate never decreases it.
PropertyResult check_monotonicity(std::size_t instances, std::uint64_t seed);
/// !(!a & !b) against (a | b), and !G!a against Fa, within 1e-12.
PropertyResult check_demorgan(std::size_t instances, std::uint64_t seed);
/// !!phi evaluates bit-identically to phi.
PropertyResult check_double_negation(std::size_t instances, std::uint64_t seed);
/// Aggregate output lies in [min r_i, max r_i] over entries with w_i > 0.
PropertyResult check_convex_bounds(std::size_t instances, std::uint64_t seed);
/// Scaling one operator's weights by a positive factor changes robustness by <= 1e-10.
PropertyResult check_weight_scaling(std::size_t instances, std::uint64_t seed);
/// Equal inputs, larger weight => strictly larger |d out / d r|.
PropertyResult check_ordering_of_influence(std::size_t instances, std::uint64_t seed);
/// Equal weights, sigma = 1e-3, inputs separated by >= 0.1: weighted within 1e-6 of classical.
PropertyResult check_sigma_limit(std::size_t instances, std::uint64_t seed);

/// Every check above.
std::vector<PropertyResult> run_property_suite(std::size_t instances, std::uint64_t seed);

std::string format_property_result(const PropertyResult& r);

}  // namespace wstl
