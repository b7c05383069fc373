#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace wstl {

enum class OptimizerKind { Sgd, Adam };

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First-order update rule over a flat parameter vector of fixed size.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, std::size_t size, AdamSettings adam = {});

  /// params -= update(grad). Sizes must match the constructor's.
  void step(std::span<double> params, std::span<const double> grad);

  OptimizerKind kind() const { return kind_; }
  std::size_t steps_taken() const { return t_; }

 private:
  OptimizerKind kind_;
  double lr_;
  AdamSettings adam_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

OptimizerKind parse_optimizer_kind(const std::string& name);
const char* optimizer_kind_name(OptimizerKind kind);

}  // namespace wstl
