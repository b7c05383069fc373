#include "wstl/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace wstl {

namespace {

template <typename F>
void walk(Formula& node, NodePath& path, F& fn) {
  fn(node, path);
  for (std::size_t i = 0; i < node.children().size(); ++i) {
    path.push_back(i);
    walk(node.children()[i], path, fn);
    path.pop_back();
  }
}

// Applies `rule(wbar) -> kept mask` to every operator.
template <typename Rule>
Pruned prune_with(const Formula& phi, Rule rule) {
  Pruned out{phi, {}};
  detach_gates(out.formula);
  NodePath path;
  auto visit = [&](Formula& node, const NodePath& p) {
    if (!node.is_aggregate()) return;
    auto& w = node.weights();
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    OperatorPrune op{p, node.op(), std::vector<double>(w.size()), std::vector<double>(w.size(), 0.0), {}, {}};
    for (std::size_t i = 0; i < w.size(); ++i) op.pre[i] = w[i] / total;
    const std::vector<bool> keep = rule(op.pre, p);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (keep[i] && op.pre[i] > 0.0) {
        op.post[i] = op.pre[i];
        op.kept.push_back(i);
      } else {
        op.zeroed.push_back(i);
      }
    }
    if (op.kept.empty()) {
      throw PruneError("operator fully pruned: every weight of " + std::string(op_name(node.op())) + " at " +
                       path_to_string(p) + " would be zero");
    }
    w = op.post;
    out.report.operators.push_back(std::move(op));
  };
  walk(out.formula, path, visit);
  out.formula.set_sparsified(true);
  return out;
}

}  // namespace

std::size_t PruneReport::total_weights() const {
  std::size_t n = 0;
  for (const auto& op : operators) n += op.pre.size();
  return n;
}

std::size_t PruneReport::zeroed_weights() const {
  std::size_t n = 0;
  for (const auto& op : operators) n += op.zeroed.size();
  return n;
}

double PruneReport::fraction_pruned() const {
  const std::size_t total = total_weights();
  return total == 0 ? 0.0 : static_cast<double>(zeroed_weights()) / static_cast<double>(total);
}

std::string PruneReport::text() const {
  std::string out;
  char buf[128];
  for (const auto& op : operators) {
    out += std::string(op_name(op.op)) + " at " + path_to_string(op.path) + ": kept " +
           std::to_string(op.kept.size()) + " of " + std::to_string(op.pre.size()) + "\n";
    for (std::size_t i = 0; i < op.pre.size(); ++i) {
      std::snprintf(buf, sizeof buf, "  [%zu] %.6f -> %.6f\n", i, op.pre[i], op.post[i]);
      out += buf;
    }
  }
  std::snprintf(buf, sizeof buf, "pruned %zu of %zu weights (%.4f)\n", zeroed_weights(), total_weights(),
                fraction_pruned());
  out += buf;
  return out;
}

std::string PruneReport::csv() const {
  std::string out = "path,index,pre,post\n";
  char buf[128];
  for (const auto& op : operators) {
    for (std::size_t i = 0; i < op.pre.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%zu,%.17g,%.17g\n", i, op.pre[i], op.post[i]);
      out += path_to_string(op.path) + buf;
    }
  }
  return out;
}

Pruned prune_tau(const Formula& phi, double tau) {
  if (!(tau >= 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in [0, 1)");
  return prune_with(phi, [tau](const std::vector<double>& wbar, const NodePath&) {
    std::vector<bool> keep(wbar.size());
    for (std::size_t i = 0; i < wbar.size(); ++i) keep[i] = wbar[i] > tau;
    return keep;
  });
}

Pruned prune_top_sbar(const Formula& phi, std::size_t sbar) {
  if (sbar == 0) throw std::invalid_argument("top-sbar must be >= 1");
  return prune_with(phi, [sbar](const std::vector<double>& wbar, const NodePath& path) {
    if (sbar > wbar.size()) {
      throw PruneError("top-sbar " + std::to_string(sbar) + " out of range [1, " + std::to_string(wbar.size()) +
                       "] for operator at " + path_to_string(path));
    }
    std::vector<std::size_t> order(wbar.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return wbar[a] > wbar[b]; });
    std::vector<bool> keep(wbar.size(), false);
    for (std::size_t i = 0; i < sbar; ++i) keep[order[i]] = true;
    return keep;
  });
}

std::size_t nonzero_weight_count(const Formula& phi) {
  std::size_t n = 0;
  detail::for_each_node(phi, [&](const Formula& node) {
    for (double w : node.weights()) n += w > 0.0 ? 1 : 0;
  });
  return n;
}

// ---------------------------------------------------------------------------

double fraction_from_bounds(double delta, double gamma_a, double wbar_s, bool positive_robustness) {
  if (positive_robustness) return 1.0 + delta * (1.0 - wbar_s) / (gamma_a * wbar_s);
  return 1.0 + gamma_a * (1.0 - wbar_s) / (delta * wbar_s);
}

FractionAnalysis prunable_fraction(const SignalMatrix& s, const Formula& phi, std::size_t k, Sigma sigma) {
  if (phi.op() != Op::Always) throw PruneError("prunable_fraction: formula root must be an Always operator");
  require_signal_length(s, phi, k);

  FractionAnalysis a;
  a.robustness = robustness_weighted(s, phi, k, sigma);
  if (a.robustness == 0.0) throw PruneError("prunable_fraction: robustness is exactly zero");

  const auto& I = phi.interval();
  for (std::size_t t = k + I.k1; t <= k + I.k2; ++t) a.inputs.push_back(robustness_weighted(s, phi.child(0), t, sigma));
  const auto w = phi.weights();
  const double total = std::accumulate(w.begin(), w.end(), 0.0);

  const double shift = *std::min_element(a.inputs.begin(), a.inputs.end());
  double z = 0.0;
  for (double r : a.inputs) z += std::exp(-(r - shift) / sigma.value());

  constexpr double inf = std::numeric_limits<double>::infinity();
  a.delta = inf;
  a.gamma_a = -inf;
  for (std::size_t i = 0; i < a.inputs.size(); ++i) {
    const double r = a.inputs[i];
    const double zi = std::exp(-(r - shift) / sigma.value()) * r / z;
    a.contributions.push_back(zi);
    if (r > 0.0) {
      a.gamma_a = std::max(a.gamma_a, zi);
      a.wbar_positive += w[i] / total;
    } else if (r < 0.0) {
      a.delta = std::min(a.delta, zi);
      a.wbar_negative += w[i] / total;
    }
  }
  const bool positive = a.robustness > 0.0;
  if (a.delta == inf) throw PruneError("prunable_fraction: delta undefined, no input has negative robustness");
  if (a.gamma_a == -inf) throw PruneError("prunable_fraction: gamma_a undefined, no input has positive robustness");

  const double ws = positive ? a.wbar_positive : a.wbar_negative;
  if (!(ws > 0.0) || ws >= 1.0) {
    throw PruneError("prunable_fraction: inconsistent weight mass " + std::to_string(ws) +
                     " on the robustness side with mixed-sign inputs");
  }
  a.raw_fraction = fraction_from_bounds(a.delta, a.gamma_a, ws, positive);
  a.fraction = std::clamp(a.raw_fraction, 0.0, 1.0);
  return a;
}

// ---------------------------------------------------------------------------

std::size_t GateSet::open() const {
  return static_cast<std::size_t>(std::count_if(g.begin(), g.end(), [](double v) { return v >= 0.5; }));
}

double bimodal_regularizer(std::span<const double> g) {
  double sum = 0.0;
  for (double v : g) sum += v * (1.0 - v);
  return sum;
}

double l1_regularizer(std::span<const double> g) { return std::accumulate(g.begin(), g.end(), 0.0); }

double regularizer_gradient(double g, double lambda1, double lambda2) { return lambda1 * (1.0 - 2.0 * g) + lambda2; }

GateSet collect_gates(const Formula& phi, double lambda1, double lambda2) {
  GateSet set;
  set.lambda1 = lambda1;
  set.lambda2 = lambda2;
  detail::for_each_node(phi, [&](const Formula& node) {
    set.g.insert(set.g.end(), node.gates().begin(), node.gates().end());
    set.sample.insert(set.sample.end(), node.gate_sample().begin(), node.gate_sample().end());
  });
  return set;
}

Pruned finalize_gates(const Formula& gated) {
  Pruned out{gated, {}};
  NodePath path;
  auto visit = [&](Formula& node, const NodePath& p) {
    if (!node.has_gates()) return;
    auto& w = node.weights();
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    OperatorPrune op{p, node.op(), std::vector<double>(w.size()), std::vector<double>(w.size(), 0.0), {}, {}};
    for (std::size_t i = 0; i < w.size(); ++i) {
      op.pre[i] = w[i] / total;
      if (node.gates()[i] < 0.5 || w[i] == 0.0) {
        w[i] = 0.0;
        op.zeroed.push_back(i);
      } else {
        op.post[i] = op.pre[i];
        op.kept.push_back(i);
      }
    }
    if (op.kept.empty()) {
      throw PruneError("operator fully pruned: every gate of " + std::string(op_name(node.op())) + " at " +
                       path_to_string(p) + " closed");
    }
    out.report.operators.push_back(std::move(op));
  };
  walk(out.formula, path, visit);
  detach_gates(out.formula);
  out.formula.set_sparsified(true);
  return out;
}

GatedResult train_gated(const DataSplit& data, const Formula& structure, const TrainConfig& cfg,
                        const GatedOptions& options) {
  const detail::GateTraining gt{options.lambda1, options.lambda2, options.initial, options.resample};
  TrainResult r = detail::train_loop(data, structure, cfg, &gt);
  GatedResult out;
  out.gates = collect_gates(r.formula, options.lambda1, options.lambda2);
  Pruned finalized = finalize_gates(r.formula);
  out.formula = std::move(finalized.formula);
  out.report = std::move(finalized.report);
  out.history = std::move(r.history);
  out.seconds = r.seconds;
  return out;
}

}  // namespace wstl
