#include "wstl/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace wstl {

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, std::size_t size, AdamSettings adam)
    : kind_(kind), lr_(learning_rate), adam_(adam) {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (kind == OptimizerKind::Adam) {
    m_.assign(size, 0.0);
    v_.assign(size, 0.0);
  }
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size()) throw std::invalid_argument("optimizer: parameter/gradient size mismatch");
  ++t_;
  if (kind_ == OptimizerKind::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grad[i];
    return;
  }
  if (params.size() != m_.size()) throw std::invalid_argument("optimizer: parameter count changed");
  const double c1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = adam_.beta1 * m_[i] + (1.0 - adam_.beta1) * grad[i];
    v_[i] = adam_.beta2 * v_[i] + (1.0 - adam_.beta2) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + adam_.epsilon);
  }
}

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  throw std::invalid_argument("unknown optimizer '" + name + "' (expected sgd or adam)");
}

const char* optimizer_kind_name(OptimizerKind kind) { return kind == OptimizerKind::Sgd ? "sgd" : "adam"; }

}  // namespace wstl
