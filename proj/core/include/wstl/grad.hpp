#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wstl/formula.hpp"
#include "wstl/semantics.hpp"

namespace wstl {

enum class NodeKind : std::uint8_t { Constant, Predicate, Negate, Aggregate };

/// One recorded computation. `input_partials[i]` is d value / d inputs[i];
/// `param_partials[i]` is d value / d params[param_indices[i]].
struct TapeNode {
  NodeKind kind = NodeKind::Constant;
  Op op = Op::True;        // formula operator this node evaluates
  std::size_t time = 0;    // evaluation time index
  double value = 0.0;
  std::vector<std::size_t> inputs;
  std::vector<double> input_partials;
  std::vector<std::size_t> param_indices;
  std::vector<double> param_partials;
};

/// Reverse-mode record of one weighted robustness evaluation. Nodes are in
/// topological order; each (subformula, time) pair is evaluated once.
/// Predicate leaves are laid out over every sample from the evaluation time
/// to the last one they read, forming the network's input layer.
class Tape {
 public:
  const std::vector<TapeNode>& nodes() const { return nodes_; }
  std::size_t output() const { return output_; }
  std::size_t param_count() const { return param_count_; }
  double value() const { return nodes_[output_].value; }

  /// Number of nodes evaluating operator `op`.
  std::size_t count(Op op) const;

 private:
  friend struct TapeBuilder;
  std::vector<TapeNode> nodes_;
  std::size_t output_ = 0;
  std::size_t param_count_ = 0;
};

/// Gradient with respect to the formula's ParamView, in the same order.
using Gradient = std::vector<double>;

struct Recorded {
  double value;
  Tape tape;
};

/// Evaluates robustness_weighted and records the tape. The value is bit-identical
/// to robustness_weighted on the same inputs.
Recorded forward_record(const SignalMatrix& s, const Formula& phi, std::size_t k, Sigma sigma);

Gradient backward(const Tape& tape);

/// Adds `seed * d output / d param` into `grad` (sized to tape.param_count()).
void backward_accumulate(const Tape& tape, double seed, std::span<double> grad);

/// Value and partial derivatives of softmin_aggregate.
///
/// `d_values` covers every entry. `d_weights` is the derivative with respect
/// to the raw weights, through the normalization wbar = w / sum(w). Entries
/// with zero weight get d_values = 0 and a finite d_weights (the rate at
/// which admitting them would change the output).
struct AggregatePartials {
  double value;
  std::vector<double> d_values;
  std::vector<double> d_weights;
};

AggregatePartials softmin_aggregate_partials(std::span<const double> weights, std::span<const double> values,
                                             Sigma sigma);

// ---------------------------------------------------------------------------
// Finite-difference verification

struct GradCheckOptions {
  Sigma sigma{1.0};
  std::uint64_t seed = 0;
  /// Resample predicate coefficients/offsets and weights on every trial.
  /// Zero weights of sparsified formulas are never resampled.
  bool randomize_parameters = true;
  /// Signal length; 0 means horizon(phi).
  std::size_t signal_length = 0;
  double step = 1e-5;
};

struct GradCheckReport {
  std::size_t trials = 0;
  std::size_t checked = 0;  // individual (trial, parameter) comparisons
  double worst_relative_error = 0.0;
  std::string worst_location;
  double tolerance = 0.0;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
  void merge(const GradCheckReport& other);
};

/// |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|)
double gradient_relative_error(double ad, double fd);

/// Compares backward() against central finite differences on random signals
/// (entries uniform in [-2, 2]). The finite differences use an independent
/// extended-precision evaluator. Failures are reported, not thrown.
GradCheckReport grad_check(const Formula& phi, std::size_t trials, double tolerance,
                           const GradCheckOptions& options = {});

/// grad_check over `formulas` random formulas (depth <= 4, l <= 5, T <= 12),
/// cycling sigma through {0.1, 1, 10}.
GradCheckReport grad_check_random(std::size_t formulas, double tolerance, std::uint64_t seed = 0);

}  // namespace wstl
