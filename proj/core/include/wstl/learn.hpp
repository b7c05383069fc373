#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wstl/dataset.hpp"
#include "wstl/formula.hpp"
#include "wstl/optimizer.hpp"
#include "wstl/random.hpp"
#include "wstl/semantics.hpp"

namespace wstl {

struct TrainConfig {
  double zeta = 1.0;
  Sigma sigma{1.0};
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  OptimizerKind optimizer = OptimizerKind::Adam;
  AdamSettings adam;
  std::uint64_t seed = 0;
  /// Operator weights are clamped to at least this after every step.
  double weight_floor = 1e-6;
  /// Standardize features with the split's scaler; the returned formula is
  /// expressed in raw feature units either way.
  bool scale = true;
  /// Draw fresh initial parameters. When false, training starts from the
  /// structure's own values.
  bool initialize = true;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

struct DiagConfig {
  double gamma = 1e3;
};

/// Exponent of each term is clamped at +50.
constexpr double kLossExponentCap = 50.0;

/// sum_j exp(-zeta * l_j * r_j)
double loss_exponential(std::span<const double> robustness, std::span<const Label> labels, double zeta);

/// One term of loss_exponential and its derivative with respect to r.
struct LossTerm {
  double value;
  double d_robustness;
};
LossTerm loss_exponential_term(double robustness, Label label, double zeta);

/// sum_j (zeta * l_j * r_j if l_j * r_j > 0 else gamma). Not differentiable;
/// reported for diagnostics only.
double loss_discrete_diag(std::span<const double> robustness, std::span<const Label> labels, double zeta,
                          const DiagConfig& diag = {});

struct EpochRecord {
  std::size_t epoch;      // 1-based
  double loss;            // loss_exponential over the training set after the epoch
  double train_accuracy;  // in [0, 1]
};

struct TrainResult {
  Formula formula;
  std::vector<EpochRecord> history;
  double seconds = 0.0;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mini-batch gradient descent on the exponential loss over every parameter
/// of `structure`. Throws DataError when the structure does not fit the data,
/// TrainingError on a non-finite loss.
TrainResult train(const DataSplit& data, const Formula& structure, const TrainConfig& cfg);

/// Weights ~ U(0.5, 1.5), coefficients ~ N(0, 1/sqrt(l)), offsets 0, drawn
/// in ParamView order. Gates are left untouched.
void initialize_parameters(Formula& phi, Rng& rng);

/// Rewrites every predicate so that the formula evaluated on raw signals
/// equals `phi` evaluated on scaler-transformed signals.
Formula fold_scaler(const Formula& phi, const Scaler& scaler);

/// "epoch,loss,train_accuracy" rows.
std::string history_csv(std::span<const EpochRecord> history);

/// Accuracy of sign(robustness_weighted) at k = 0 against the labels.
double accuracy(const Formula& phi, std::span<const LabeledWindow> windows, Sigma sigma);

namespace detail {

struct GateTraining {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double initial = 0.95;
  /// Draw a fresh Bernoulli mask per mini-batch; otherwise the mask stays all ones.
  bool resample = true;
};

/// Shared loop behind train and train_gated. With `gates` set, one gate per
/// operator weight is attached before training and left attached (with its
/// final probabilities) on the returned formula.
TrainResult train_loop(const DataSplit& data, const Formula& structure, const TrainConfig& cfg,
                       const GateTraining* gates);

/// Visits every node in depth-first pre-order.
template <typename F>
void for_each_node(Formula& phi, F&& fn) {
  fn(phi);
  for (auto& c : phi.children()) for_each_node(c, fn);
}

template <typename F>
void for_each_node(const Formula& phi, F&& fn) {
  fn(phi);
  for (const auto& c : phi.children()) for_each_node(c, fn);
}

}  // namespace detail

}  // namespace wstl
