#include "wstl/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wstl {

SignalMatrix::SignalMatrix(std::size_t features, std::size_t steps, double fill)
    : features_(features), steps_(steps), values_(features * steps, fill) {}

SignalMatrix SignalMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  SignalMatrix s(rows.size(), rows.front().size());
  for (std::size_t f = 0; f < rows.size(); ++f) {
    if (rows[f].size() != s.steps_) throw std::invalid_argument("SignalMatrix rows differ in length");
    std::copy(rows[f].begin(), rows[f].end(), s.values_.begin() + static_cast<std::ptrdiff_t>(f * s.steps_));
  }
  return s;
}

bool SignalMatrix::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Sigma::Sigma(double value) : value_(value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("sigma must be a finite positive number");
  }
}

double softmin_aggregate(std::span<const double> weights, std::span<const double> values, Sigma sigma) {
  if (weights.size() != values.size() || weights.empty()) {
    throw EvaluationError("softmin_aggregate: need equally sized, non-empty weights and values");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw EvaluationError("softmin_aggregate: weights must be finite and non-negative");
    }
    if (std::isnan(values[i])) throw EvaluationError("softmin_aggregate: NaN input");
    total += weights[i];
  }
  if (!(total > 0.0)) throw EvaluationError("softmin_aggregate: all weights are zero");

  constexpr double inf = std::numeric_limits<double>::infinity();
  double shift = inf;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) {
      if (values[i] == -inf) return -inf;
      shift = std::min(shift, values[i]);
    }
  }
  if (shift == inf) return inf;

  const double t = sigma.value();
  double z = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0 && values[i] != inf) z += std::exp(-(values[i] - shift) / t);
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || values[i] == inf) continue;
    const double wbar = weights[i] / total;
    const double s = std::exp(-(values[i] - shift) / t) / z;
    num += wbar * s * values[i];
    den += wbar * s;
  }
  return num / den;
}

std::vector<double> effective_weights(const Formula& node) {
  std::vector<double> w(node.weights().begin(), node.weights().end());
  if (node.has_gates()) {
    const auto sample = node.gate_sample();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= sample[i];
  }
  return w;
}

void require_signal_length(const SignalMatrix& s, const Formula& phi, std::size_t k) {
  const std::size_t h = horizon(phi);
  if (k + h > s.steps()) {
    throw EvaluationError("insufficient signal length: evaluating at k=" + std::to_string(k) + " needs " +
                          std::to_string(k + h) + " samples, signal has " + std::to_string(s.steps()));
  }
}

namespace {

double predicate_value(const SignalMatrix& s, const Predicate& p, std::size_t k) {
  if (p.a.size() != s.features()) {
    throw EvaluationError("predicate dimension " + std::to_string(p.a.size()) + " != signal dimension " +
                          std::to_string(s.features()));
  }
  double dot = 0.0;
  for (std::size_t j = 0; j < p.a.size(); ++j) dot += p.a[j] * s(j, k);
  return p.c - dot;
}

double classical(const SignalMatrix& s, const Formula& phi, std::size_t k) {
  switch (phi.op()) {
    case Op::True: return std::numeric_limits<double>::infinity();
    case Op::Predicate: return predicate_value(s, phi.predicate(), k);
    case Op::Not: return -classical(s, phi.child(0), k);
    case Op::And: return std::min(classical(s, phi.child(0), k), classical(s, phi.child(1), k));
    case Op::Or: return std::max(classical(s, phi.child(0), k), classical(s, phi.child(1), k));
    case Op::Always:
    case Op::Eventually: {
      const auto& I = phi.interval();
      const bool always = phi.op() == Op::Always;
      double acc = always ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      for (std::size_t t = k + I.k1; t <= k + I.k2; ++t) {
        const double r = classical(s, phi.child(0), t);
        acc = always ? std::min(acc, r) : std::max(acc, r);
      }
      return acc;
    }
  }
  return 0.0;
}

double weighted(const SignalMatrix& s, const Formula& phi, std::size_t k, Sigma sigma) {
  switch (phi.op()) {
    case Op::True: return std::numeric_limits<double>::infinity();
    case Op::Predicate: return predicate_value(s, phi.predicate(), k);
    case Op::Not: return -weighted(s, phi.child(0), k, sigma);
    case Op::And:
    case Op::Or:
    case Op::Always:
    case Op::Eventually: {
      std::vector<double> r;
      if (phi.is_temporal()) {
        const auto& I = phi.interval();
        r.reserve(I.length());
        for (std::size_t t = k + I.k1; t <= k + I.k2; ++t) r.push_back(weighted(s, phi.child(0), t, sigma));
      } else {
        r = {weighted(s, phi.child(0), k, sigma), weighted(s, phi.child(1), k, sigma)};
      }
      const auto w = effective_weights(phi);
      if (!phi.is_dual()) return softmin_aggregate(w, r, sigma);
      for (double& v : r) v = -v;
      return -softmin_aggregate(w, r, sigma);
    }
  }
  return 0.0;
}

}  // namespace

double robustness_classical(const SignalMatrix& s, const Formula& phi, std::size_t k) {
  require_signal_length(s, phi, k);
  return classical(s, phi, k);
}

double robustness_weighted(const SignalMatrix& s, const Formula& phi, std::size_t k, Sigma sigma) {
  require_signal_length(s, phi, k);
  return weighted(s, phi, k, sigma);
}

Satisfaction boolean_sat(const SignalMatrix& s, const Formula& phi, std::size_t k) {
  return robustness_classical(s, phi, k) >= 0.0 ? Satisfaction::Satisfied : Satisfaction::Violated;
}

}  // namespace wstl
