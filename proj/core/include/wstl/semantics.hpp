#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "wstl/formula.hpp"

namespace wstl {

/// l x T real signal: rows are features, columns are time steps.
class SignalMatrix {
 public:
  SignalMatrix() = default;
  SignalMatrix(std::size_t features, std::size_t steps, double fill = 0.0);
  /// `rows[f][t]`; all rows must have the same length.
  static SignalMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t features() const { return features_; }
  std::size_t steps() const { return steps_; }

  double operator()(std::size_t feature, std::size_t t) const { return values_[feature * steps_ + t]; }
  double& operator()(std::size_t feature, std::size_t t) { return values_[feature * steps_ + t]; }

  std::span<const double> row(std::size_t feature) const {
    return std::span<const double>(values_).subspan(feature * steps_, steps_);
  }

  /// True when every entry is finite.
  bool finite() const;

  friend bool operator==(const SignalMatrix&, const SignalMatrix&) = default;

 private:
  std::size_t features_ = 0;
  std::size_t steps_ = 0;
  std::vector<double> values_;
};

/// Softmin temperature, strictly positive.
class Sigma {
 public:
  explicit Sigma(double value);
  double value() const { return value_; }

 private:
  double value_;
};

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Weighted softmin aggregate
///
///   (sum_i wbar_i s_i r_i) / (sum_i wbar_i s_i),
///   wbar_i = w_i / sum_j w_j,   s_i = exp(-r_i / sigma) / sum_j exp(-r_j / sigma).
///
/// Entries with zero weight are excluded before the softmax is formed, which
/// leaves the value unchanged (the softmax normalizer cancels) and makes it
/// independent of their r_i bit for bit. The softmax is shifted by the
/// smallest active r_i. An active +inf input (the robustness of TRUE) drops
/// out; an active -inf input makes the result -inf.
///
/// Throws EvaluationError on size mismatch, negative or non-finite weights,
/// all-zero weights, or NaN inputs.
double softmin_aggregate(std::span<const double> weights, std::span<const double> values, Sigma sigma);

/// Weights an aggregate node evaluates with: raw weights, times the current
/// gate sample when gates are attached.
std::vector<double> effective_weights(const Formula& node);

/// Classical min/max robustness. Weights are ignored. TRUE evaluates to +inf.
double robustness_classical(const SignalMatrix& s, const Formula& phi, std::size_t k = 0);

/// Weighted robustness with the softmin aggregate for And/Always and its
/// negate-aggregate-negate dual for Or/Eventually.
double robustness_weighted(const SignalMatrix& s, const Formula& phi, std::size_t k, Sigma sigma);

enum class Satisfaction { Satisfied, Violated };

/// Satisfied iff classical robustness >= 0.
Satisfaction boolean_sat(const SignalMatrix& s, const Formula& phi, std::size_t k = 0);

/// Throws EvaluationError("insufficient signal length ...") unless k + horizon(phi) <= T.
void require_signal_length(const SignalMatrix& s, const Formula& phi, std::size_t k);

}  // namespace wstl
