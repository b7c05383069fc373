#include "wstl/learn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "wstl/grad.hpp"

namespace wstl {

void TrainConfig::validate() const {
  if (!(zeta > 0.0) || !std::isfinite(zeta)) throw std::invalid_argument("zeta must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (!(weight_floor > 0.0)) throw std::invalid_argument("weight floor must be positive");
}

LossTerm loss_exponential_term(double robustness, Label label, double zeta) {
  const double l = label_value(label);
  const double e = std::min(-zeta * l * robustness, kLossExponentCap);
  const double v = std::exp(e);
  return {v, -zeta * l * v};
}

double loss_exponential(std::span<const double> robustness, std::span<const Label> labels, double zeta) {
  if (robustness.size() != labels.size()) throw std::invalid_argument("loss: length mismatch");
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
  double sum = 0.0;
  for (std::size_t j = 0; j < robustness.size(); ++j) sum += loss_exponential_term(robustness[j], labels[j], zeta).value;
  return sum;
}

double loss_discrete_diag(std::span<const double> robustness, std::span<const Label> labels, double zeta,
                          const DiagConfig& diag) {
  if (robustness.size() != labels.size()) throw std::invalid_argument("loss: length mismatch");
  double sum = 0.0;
  for (std::size_t j = 0; j < robustness.size(); ++j) {
    const double lr = label_value(labels[j]) * robustness[j];
    sum += lr > 0.0 ? zeta * lr : diag.gamma;
  }
  return sum;
}

void initialize_parameters(Formula& phi, Rng& rng) {
  const std::size_t l = std::max<std::size_t>(1, dimension(phi));
  std::normal_distribution<double> coef(0.0, 1.0 / std::sqrt(static_cast<double>(l)));
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  for (const auto& p : params(phi)) {
    switch (p.kind) {
      case ParamKind::PredicateCoefficient: p.set(coef(rng)); break;
      case ParamKind::PredicateOffset: p.set(0.0); break;
      case ParamKind::OperatorWeight:
        if (!(phi.sparsified() && p.value() == 0.0)) p.set(weight(rng));
        break;
      case ParamKind::Gate: break;
    }
  }
}

Formula fold_scaler(const Formula& phi, const Scaler& scaler) {
  Formula out = phi;
  detail::for_each_node(out, [&](Formula& node) {
    if (node.op() != Op::Predicate) return;
    auto& p = node.predicate();
    if (p.a.size() != scaler.mean.size()) throw DataError("scaler dimension does not match predicate");
    for (std::size_t j = 0; j < p.a.size(); ++j) {
      p.a[j] /= scaler.scale[j];
      p.c += p.a[j] * scaler.mean[j];
    }
  });
  return out;
}

std::string history_csv(std::span<const EpochRecord> history) {
  std::string out = "epoch,loss,train_accuracy\n";
  char buf[96];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.6f\n", r.epoch, r.loss, r.train_accuracy);
    out += buf;
  }
  return out;
}

double accuracy(const Formula& phi, std::span<const LabeledWindow> windows, Sigma sigma) {
  if (windows.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& w : windows) {
    const Label predicted = robustness_weighted(w.signal, phi, 0, sigma) >= 0.0 ? Label::Positive : Label::Negative;
    if (predicted == w.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(windows.size());
}

namespace detail {

namespace {

void check_fit(const Formula& structure, std::span<const LabeledWindow> windows, std::size_t l, const char* set) {
  const std::size_t h = horizon(structure);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& s = windows[i].signal;
    if (s.features() != l) {
      throw DataError(std::string(set) + " window " + std::to_string(i) + " has " + std::to_string(s.features()) +
                      " features, expected " + std::to_string(l));
    }
    if (s.steps() < h) {
      throw DataError(std::string(set) + " window " + std::to_string(i) + " has " + std::to_string(s.steps()) +
                      " samples, structure horizon is " + std::to_string(h));
    }
  }
}

// Bernoulli(g) per gate; an operator whose sample closes every gate keeps its
// most probable one open so the aggregate stays defined.
void sample_gates(Formula& phi, Rng& rng) {
  for_each_node(phi, [&](Formula& node) {
    if (!node.has_gates()) return;
    auto& g = node.gates();
    auto& s = node.gate_sample();
    bool any = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
      s[i] = std::bernoulli_distribution(std::clamp(g[i], 0.0, 1.0))(rng) ? 1.0 : 0.0;
      any = any || s[i] != 0.0;
    }
    if (!any) s[static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin())] = 1.0;
  });
}

[[noreturn]] void report_non_finite(const ParamView& view, std::span<const double> grad, std::size_t epoch,
                                    std::size_t step, const std::string& what) {
  std::size_t worst = 0;
  bool found = false;
  for (std::size_t i = 0; i < view.size(); ++i) {
    if (!std::isfinite(view[i].value()) || !std::isfinite(grad[i])) {
      worst = i;
      found = true;
      break;
    }
  }
  if (!found) {
    for (std::size_t i = 1; i < view.size(); ++i) {
      if (std::fabs(view[i].value()) > std::fabs(view[worst].value())) worst = i;
    }
  }
  std::ostringstream msg;
  msg << "non-finite " << what << " at epoch " << epoch << ", step " << step;
  if (view.size() > 0) {
    const auto& p = view[worst];
    msg << "; parameter " << worst << " (" << param_kind_name(p.kind) << " " << p.index << " at "
        << path_to_string(p.path) << ") = " << p.value() << ", gradient " << grad[worst];
  }
  throw TrainingError(msg.str());
}

}  // namespace

TrainResult train_loop(const DataSplit& data, const Formula& structure, const TrainConfig& cfg,
                       const GateTraining* gates) {
  cfg.validate();
  if (gates && !(gates->lambda1 >= 0.0 && gates->lambda2 >= 0.0)) {
    throw std::invalid_argument("gate regularizer coefficients must be non-negative");
  }
  if (data.train.empty()) throw DataError("empty training set");
  const std::size_t l = data.train.front().signal.features();
  if (const auto violations = validate(structure, l); !violations.empty()) {
    throw DataError("structure does not fit the data: " + violations.front().message + " at " +
                    path_to_string(violations.front().path));
  }
  check_fit(structure, data.train, l, "train");
  check_fit(structure, data.test, l, "test");

  const auto start = std::chrono::steady_clock::now();
  const std::vector<LabeledWindow> train_set =
      cfg.scale ? data.scaler.apply(data.train) : std::vector<LabeledWindow>(data.train);

  Formula work = structure;
  Rng rng(cfg.seed);
  if (cfg.initialize) initialize_parameters(work, rng);
  if (gates) attach_gates(work, gates->initial);
  Rng gate_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  const ParamView view = params(work);
  const std::size_t n_params = view.size();
  std::vector<bool> pinned_zero(n_params, false);  // pruned weights of a sparsified structure
  for (std::size_t i = 0; i < n_params; ++i) {
    pinned_zero[i] = view[i].kind == ParamKind::OperatorWeight && view[i].value() == 0.0;
  }

  Optimizer opt(cfg.optimizer, cfg.learning_rate, n_params, cfg.adam);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(n_params);
  std::vector<double> values(n_params);

  TrainResult result;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      ++step;
      const std::size_t end = std::min(order.size(), b + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - b);
      if (gates && gates->resample) sample_gates(work, gate_rng);

      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t j = b; j < end; ++j) {
        const auto& w = train_set[order[j]];
        const auto rec = forward_record(w.signal, work, 0, cfg.sigma);
        const LossTerm term = loss_exponential_term(rec.value, w.label, cfg.zeta);
        if (std::isnan(rec.value) || !std::isfinite(term.value)) report_non_finite(view, grad, epoch, step, "loss");
        backward_accumulate(rec.tape, term.d_robustness * inv_batch, grad);
      }
      if (gates) {
        for (std::size_t i = 0; i < n_params; ++i) {
          if (view[i].kind != ParamKind::Gate) continue;
          grad[i] += gates->lambda1 * (1.0 - 2.0 * view[i].value()) + gates->lambda2;
        }
      }
      if (!std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); })) {
        report_non_finite(view, grad, epoch, step, "gradient");
      }

      for (std::size_t i = 0; i < n_params; ++i) values[i] = view[i].value();
      opt.step(values, grad);
      for (std::size_t i = 0; i < n_params; ++i) {
        double v = values[i];
        if (view[i].kind == ParamKind::OperatorWeight) v = pinned_zero[i] ? 0.0 : std::max(v, cfg.weight_floor);
        if (view[i].kind == ParamKind::Gate) v = std::clamp(v, 0.0, 1.0);
        view[i].set(v);
      }
      if (!std::all_of(view.begin(), view.end(), [](const ParamRef& p) { return std::isfinite(p.value()); })) {
        report_non_finite(view, grad, epoch, step, "parameter update");
      }
    }

    std::vector<double> r;
    std::vector<Label> labels;
    r.reserve(train_set.size());
    labels.reserve(train_set.size());
    std::size_t correct = 0;
    for (const auto& w : train_set) {
      r.push_back(robustness_weighted(w.signal, work, 0, cfg.sigma));
      labels.push_back(w.label);
      if ((r.back() >= 0.0 ? Label::Positive : Label::Negative) == w.label) ++correct;
    }
    const double loss = loss_exponential(r, labels, cfg.zeta);
    if (!std::isfinite(loss)) report_non_finite(view, grad, epoch, step, "epoch loss");
    result.history.push_back(
        {epoch, loss, static_cast<double>(correct) / static_cast<double>(train_set.size())});
  }

  result.formula = cfg.scale ? fold_scaler(work, data.scaler) : std::move(work);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace detail

TrainResult train(const DataSplit& data, const Formula& structure, const TrainConfig& cfg) {
  return detail::train_loop(data, structure, cfg, nullptr);
}

}  // namespace wstl
