#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wstl/dataset.hpp"
#include "wstl/formula.hpp"
#include "wstl/learn.hpp"
#include "wstl/semantics.hpp"

namespace wstl {

class PruneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OperatorPrune {
  NodePath path;
  Op op;
  std::vector<double> pre;   // normalized weights before pruning
  std::vector<double> post;  // stored weights after pruning
  std::vector<std::size_t> kept;
  std::vector<std::size_t> zeroed;
};

struct PruneReport {
  std::vector<OperatorPrune> operators;

  std::size_t total_weights() const;
  std::size_t zeroed_weights() const;
  /// zeroed / total over every operator weight.
  double fraction_pruned() const;

  std::string text() const;
  /// "path,index,pre,post" rows.
  std::string csv() const;
};

struct Pruned {
  Formula formula;
  PruneReport report;
};

/// Every operator's weights become w̄ with entries w̄_i <= tau set to zero.
/// Throws std::invalid_argument unless 0 <= tau < 1, and PruneError when an
/// operator loses every weight.
Pruned prune_tau(const Formula& phi, double tau);

/// Keeps the sbar largest normalized weights of every operator (lower index
/// wins ties) and zeroes the rest. Throws std::invalid_argument when sbar is 0
/// and PruneError when it exceeds some operator's weight count.
Pruned prune_top_sbar(const Formula& phi, std::size_t sbar);

/// Number of strictly positive operator weights in the tree.
std::size_t nonzero_weight_count(const Formula& phi);

// ---------------------------------------------------------------------------
// Prunable-fraction analysis of an Always operator

struct FractionAnalysis {
  double robustness = 0.0;      // weighted robustness of the Always node
  std::vector<double> inputs;   // child robustness per time point
  std::vector<double> contributions;  // z_i
  double delta = 0.0;           // min z_i over r_i < 0
  double gamma_a = 0.0;         // max z_i over r_i > 0
  double wbar_positive = 0.0;   // sum of normalized weights with r_i > 0
  double wbar_negative = 0.0;   // sum of normalized weights with r_i < 0
  double raw_fraction = 0.0;    // unclamped bound
  double fraction = 0.0;        // raw_fraction clamped to [0, 1]

  /// Weight mass that can be zeroed on the side matching the robustness sign.
  double prunable_mass() const { return fraction * (robustness > 0.0 ? wbar_positive : wbar_negative); }
};

/// Raw bound: 1 + delta (1 - ws) / (gamma_a ws) for positive robustness, with
/// ws the positive-side mass; 1 + gamma_a (1 - ws) / (delta ws) for negative
/// robustness, with ws the negative-side mass.
double fraction_from_bounds(double delta, double gamma_a, double wbar_s, bool positive_robustness);

/// Throws PruneError when phi is not an Always, when the robustness is exactly
/// zero, or when a needed bound is undefined because every input has one sign.
FractionAnalysis prunable_fraction(const SignalMatrix& s, const Formula& phi, std::size_t k, Sigma sigma);

// ---------------------------------------------------------------------------
// Gate-variable sparsification

struct GateSet {
  std::vector<double> g;       // probabilities, DFS order over operators
  std::vector<double> sample;  // last Bernoulli draw
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  std::size_t size() const { return g.size(); }
  std::size_t open() const;  // gates with g >= 0.5
};

/// sum g (1 - g)
double bimodal_regularizer(std::span<const double> g);
/// sum g
double l1_regularizer(std::span<const double> g);
/// d/dg of lambda1 * bimodal + lambda2 * l1 for one gate.
double regularizer_gradient(double g, double lambda1, double lambda2);

GateSet collect_gates(const Formula& phi, double lambda1, double lambda2);

struct GatedOptions {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double initial = 0.95;
  bool resample = true;
};

struct GatedResult {
  Formula formula;  // gates removed, closed gates' weights zeroed, marked sparsified
  GateSet gates;    // final probabilities
  PruneReport report;  // normalized weights before and after finalization
  std::vector<EpochRecord> history;
  double seconds = 0.0;
};

/// Trains with one Bernoulli gate per operator weight and finalizes the mask
/// at g >= 0.5. Throws PruneError if an operator ends with every gate closed.
GatedResult train_gated(const DataSplit& data, const Formula& structure, const TrainConfig& cfg,
                        const GatedOptions& options);

/// Zeroes the weights whose gate is below 0.5 and removes the gates. Kept
/// weights keep their raw values.
Pruned finalize_gates(const Formula& gated);

}  // namespace wstl
