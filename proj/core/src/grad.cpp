#include "wstl/grad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wstl/random.hpp"

namespace wstl {

std::size_t Tape::count(Op op) const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [op](const TapeNode& n) { return n.op == op; }));
}

AggregatePartials softmin_aggregate_partials(std::span<const double> weights, std::span<const double> values,
                                             Sigma sigma) {
  const std::size_t n = weights.size();
  AggregatePartials out{softmin_aggregate(weights, values, sigma), std::vector<double>(n, 0.0),
                        std::vector<double>(n, 0.0)};
  if (!std::isfinite(out.value)) return out;

  constexpr double inf = std::numeric_limits<double>::infinity();
  const double t = sigma.value();
  double total = 0.0;
  double shift = inf;
  for (std::size_t i = 0; i < n; ++i) {
    total += weights[i];
    if (weights[i] > 0.0) shift = std::min(shift, values[i]);
  }

  auto active = [&](std::size_t i) { return weights[i] > 0.0 && values[i] != inf; };

  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (active(i)) z += std::exp(-(values[i] - shift) / t);
  }
  std::vector<double> s(n, 0.0), wbar(n, 0.0);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wbar[i] = weights[i] / total;
    if (active(i)) {
      s[i] = std::exp(-(values[i] - shift) / t) / z;
      num += wbar[i] * s[i] * values[i];
      den += wbar[i] * s[i];
    } else if (values[i] != inf) {
      // Inactive entry: same softmax scale, exponent capped so the weight
      // derivative stays finite for inputs far below the active minimum.
      s[i] = std::exp(std::min(-(values[i] - shift) / t, 50.0)) / z;
    }
  }
  const double value = out.value;

  // d value / d r_i. r_i enters the numerator directly and, through the
  // softmax Jacobian ds_j/dr_i = -s_j (delta_ij - s_i) / sigma, both the
  // numerator and the denominator.
  for (std::size_t i = 0; i < n; ++i) {
    if (!active(i)) continue;
    const double ws = wbar[i] * s[i];
    const double d_num = ws - (ws * values[i] - s[i] * num) / t;
    const double d_den = -(ws - s[i] * den) / t;
    out.d_values[i] = (d_num - value * d_den) / den;
  }

  // d value / d wbar_i, then through wbar = w / sum(w):
  // d value / d w_j = (g_j - sum_i g_i wbar_i) / sum(w).
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(values[i])) g[i] = s[i] * (values[i] - value) / den;
  }
  double g_dot_wbar = 0.0;
  for (std::size_t i = 0; i < n; ++i) g_dot_wbar += g[i] * wbar[i];
  for (std::size_t j = 0; j < n; ++j) out.d_weights[j] = (g[j] - g_dot_wbar) / total;
  return out;
}

struct TapeBuilder {
  struct Info {
    const Formula* node;
    std::size_t param_offset;
    std::vector<std::size_t> children;
    std::vector<std::size_t> times;
    std::vector<std::size_t> tape_index;  // parallel to times
  };

  const SignalMatrix& s;
  Sigma sigma;
  std::size_t k;
  std::vector<Info> infos;
  Tape tape;

  std::size_t index(const Formula& f, std::size_t& offset) {
    const std::size_t id = infos.size();
    infos.push_back({&f, offset, {}, {}, {}});
    if (f.op() == Op::Predicate) offset += f.predicate().a.size() + 1;
    if (f.is_aggregate()) offset += f.weights().size() + f.gates().size();
    for (const auto& c : f.children()) {
      const std::size_t cid = index(c, offset);
      infos[id].children.push_back(cid);
    }
    return id;
  }

  void propagate_times() {
    infos[0].times = {k};
    for (std::size_t id = 0; id < infos.size(); ++id) {
      auto& info = infos[id];
      std::sort(info.times.begin(), info.times.end());
      info.times.erase(std::unique(info.times.begin(), info.times.end()), info.times.end());
      if (info.node->op() == Op::Predicate && !info.times.empty()) {
        const std::size_t last = info.times.back();
        info.times.clear();
        for (std::size_t t = k; t <= last; ++t) info.times.push_back(t);
      }
      for (std::size_t cid : info.children) {
        auto& child_times = infos[cid].times;
        for (std::size_t t : info.times) {
          if (info.node->is_temporal()) {
            const auto& I = info.node->interval();
            for (std::size_t d = I.k1; d <= I.k2; ++d) child_times.push_back(t + d);
          } else {
            child_times.push_back(t);
          }
        }
      }
    }
  }

  std::size_t lookup(std::size_t id, std::size_t t) const {
    const auto& info = infos[id];
    auto it = std::lower_bound(info.times.begin(), info.times.end(), t);
    return info.tape_index[static_cast<std::size_t>(it - info.times.begin())];
  }

  TapeNode make_node(const Info& info, std::size_t t) {
    const Formula& f = *info.node;
    TapeNode node;
    node.op = f.op();
    node.time = t;
    switch (f.op()) {
      case Op::True:
        node.kind = NodeKind::Constant;
        node.value = std::numeric_limits<double>::infinity();
        break;
      case Op::Predicate: {
        const auto& p = f.predicate();
        if (p.a.size() != s.features()) {
          throw EvaluationError("predicate dimension " + std::to_string(p.a.size()) +
                                " != signal dimension " + std::to_string(s.features()));
        }
        node.kind = NodeKind::Predicate;
        double dot = 0.0;
        for (std::size_t j = 0; j < p.a.size(); ++j) dot += p.a[j] * s(j, t);
        node.value = p.c - dot;
        for (std::size_t j = 0; j < p.a.size(); ++j) {
          node.param_indices.push_back(info.param_offset + j);
          node.param_partials.push_back(-s(j, t));
        }
        node.param_indices.push_back(info.param_offset + p.a.size());
        node.param_partials.push_back(1.0);
        break;
      }
      case Op::Not: {
        node.kind = NodeKind::Negate;
        const std::size_t in = lookup(info.children[0], t);
        node.inputs = {in};
        node.input_partials = {-1.0};
        node.value = -tape.nodes_[in].value;
        break;
      }
      case Op::And:
      case Op::Or:
      case Op::Always:
      case Op::Eventually: {
        node.kind = NodeKind::Aggregate;
        if (f.is_temporal()) {
          for (std::size_t d = f.interval().k1; d <= f.interval().k2; ++d) {
            node.inputs.push_back(lookup(info.children[0], t + d));
          }
        } else {
          node.inputs = {lookup(info.children[0], t), lookup(info.children[1], t)};
        }
        std::vector<double> r;
        r.reserve(node.inputs.size());
        const double sign = f.is_dual() ? -1.0 : 1.0;
        for (std::size_t in : node.inputs) r.push_back(sign * tape.nodes_[in].value);

        const auto w = effective_weights(f);
        const auto partials = softmin_aggregate_partials(w, r, sigma);
        node.value = sign * partials.value;
        // dual: value = -agg(-r), so d/dr keeps its sign and d/dw flips
        node.input_partials = partials.d_values;

        const std::size_t n = w.size();
        for (std::size_t i = 0; i < n; ++i) {
          const double sample = f.has_gates() ? f.gate_sample()[i] : 1.0;
          node.param_indices.push_back(info.param_offset + i);
          node.param_partials.push_back(sign * partials.d_weights[i] * sample);
        }
        if (f.has_gates()) {
          // straight-through: the Bernoulli sample is treated as the identity in g
          for (std::size_t i = 0; i < n; ++i) {
            node.param_indices.push_back(info.param_offset + n + i);
            node.param_partials.push_back(sign * partials.d_weights[i] * f.weights()[i]);
          }
        }
        break;
      }
    }
    return node;
  }

  void build() {
    std::size_t offset = 0;
    index(*infos_root, offset);
    tape.param_count_ = offset;
    propagate_times();
    for (std::size_t id = infos.size(); id-- > 0;) {
      auto& info = infos[id];
      info.tape_index.reserve(info.times.size());
      for (std::size_t t : info.times) {
        TapeNode node = make_node(info, t);
        info.tape_index.push_back(tape.nodes_.size());
        tape.nodes_.push_back(std::move(node));
      }
    }
    tape.output_ = infos[0].tape_index.front();
  }

  const Formula* infos_root = nullptr;
};

Recorded forward_record(const SignalMatrix& s, const Formula& phi, std::size_t k, Sigma sigma) {
  require_signal_length(s, phi, k);
  TapeBuilder builder{s, sigma, k, {}, {}, &phi};
  builder.build();
  const double value = builder.tape.value();
  return {value, std::move(builder.tape)};
}

void backward_accumulate(const Tape& tape, double seed, std::span<double> grad) {
  if (grad.size() != tape.param_count()) {
    throw std::invalid_argument("backward: gradient buffer has wrong size");
  }
  const auto& nodes = tape.nodes();
  std::vector<double> adjoint(nodes.size(), 0.0);
  adjoint[tape.output()] = seed;
  for (std::size_t i = tape.output() + 1; i-- > 0;) {
    const double a = adjoint[i];
    if (a == 0.0) continue;
    const auto& node = nodes[i];
    for (std::size_t j = 0; j < node.inputs.size(); ++j) adjoint[node.inputs[j]] += a * node.input_partials[j];
    for (std::size_t j = 0; j < node.param_indices.size(); ++j) {
      grad[node.param_indices[j]] += a * node.param_partials[j];
    }
  }
}

Gradient backward(const Tape& tape) {
  Gradient g(tape.param_count(), 0.0);
  backward_accumulate(tape, 1.0, g);
  return g;
}

// ---------------------------------------------------------------------------

void GradCheckReport::merge(const GradCheckReport& other) {
  trials += other.trials;
  checked += other.checked;
  if (other.checked > 0 && other.worst_relative_error >= worst_relative_error) {
    worst_relative_error = other.worst_relative_error;
    worst_location = other.worst_location;
  }
  tolerance = std::max(tolerance, other.tolerance);
  failures.insert(failures.end(), other.failures.begin(), other.failures.end());
}

double gradient_relative_error(double ad, double fd) {
  return std::fabs(ad - fd) / std::max(1e-8, std::fabs(ad) + std::fabs(fd));
}

namespace {

// Reference evaluator for the finite-difference oracle: a literal transcription
// of the weighted semantics in long double, sharing no code with the tape.
using Real = long double;

Real ref_aggregate(const std::vector<Real>& w, const std::vector<Real>& r, Real sigma) {
  Real wsum = 0;
  for (Real v : w) wsum += v;
  Real m = std::numeric_limits<Real>::infinity();
  for (Real v : r) m = std::min(m, v);
  Real z = 0;
  for (Real v : r) z += std::exp(-(v - m) / sigma);
  Real num = 0, den = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Real s = std::exp(-(r[i] - m) / sigma) / z;
    num += (w[i] / wsum) * s * r[i];
    den += (w[i] / wsum) * s;
  }
  return num / den;
}

Real ref_eval(const Formula& f, const SignalMatrix& s, std::size_t k, Real sigma) {
  switch (f.op()) {
    case Op::True: return std::numeric_limits<Real>::infinity();
    case Op::Predicate: {
      Real dot = 0;
      for (std::size_t j = 0; j < f.predicate().a.size(); ++j) {
        dot += static_cast<Real>(f.predicate().a[j]) * static_cast<Real>(s(j, k));
      }
      return static_cast<Real>(f.predicate().c) - dot;
    }
    case Op::Not: return -ref_eval(f.child(0), s, k, sigma);
    default: break;
  }
  std::vector<Real> r;
  if (f.is_temporal()) {
    for (std::size_t d = f.interval().k1; d <= f.interval().k2; ++d) r.push_back(ref_eval(f.child(0), s, k + d, sigma));
  } else {
    r = {ref_eval(f.child(0), s, k, sigma), ref_eval(f.child(1), s, k, sigma)};
  }
  std::vector<Real> w;
  for (std::size_t i = 0; i < f.weights().size(); ++i) {
    const double sample = f.has_gates() ? f.gate_sample()[i] : 1.0;
    w.push_back(static_cast<Real>(f.weights()[i]) * sample);
  }
  if (!f.is_dual()) return ref_aggregate(w, r, sigma);
  for (Real& v : r) v = -v;
  return -ref_aggregate(w, r, sigma);
}

void randomize(Formula& phi, Rng& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  for (const auto& p : params(phi)) {
    switch (p.kind) {
      case ParamKind::PredicateCoefficient:
      case ParamKind::PredicateOffset: p.set(coef(rng)); break;
      case ParamKind::OperatorWeight:
        if (p.value() != 0.0) p.set(weight(rng));
        break;
      case ParamKind::Gate: break;
    }
  }
}

}  // namespace

GradCheckReport grad_check(const Formula& phi, std::size_t trials, double tolerance, const GradCheckOptions& options) {
  GradCheckReport report;
  report.tolerance = tolerance;
  Rng rng(options.seed);
  const std::size_t l = std::max<std::size_t>(1, dimension(phi));
  const std::size_t steps = options.signal_length != 0 ? options.signal_length : horizon(phi);
  const Real sigma = options.sigma.value();
  const double h = options.step;

  for (std::size_t trial = 0; trial < trials; ++trial) {
    Formula work = phi;
    if (options.randomize_parameters) randomize(work, rng);
    const SignalMatrix s = random_signal(rng, l, steps);
    const auto rec = forward_record(s, work, 0, options.sigma);
    const Gradient ad = backward(rec.tape);
    ++report.trials;

    const ParamView view = params(work);
    for (std::size_t p = 0; p < view.size(); ++p) {
      const auto& ref = view[p];
      if (ref.kind == ParamKind::Gate) continue;  // straight-through, no true derivative
      if (ref.kind == ParamKind::OperatorWeight && ref.value() == 0.0) continue;
      const double theta = ref.value();
      const double plus = theta + h;
      const double minus = theta - h;
      ref.set(plus);
      const Real f_plus = ref_eval(work, s, 0, sigma);
      ref.set(minus);
      const Real f_minus = ref_eval(work, s, 0, sigma);
      ref.set(theta);
      const double fd = static_cast<double>((f_plus - f_minus) / (static_cast<Real>(plus) - static_cast<Real>(minus)));
      const double err = gradient_relative_error(ad[p], fd);
      ++report.checked;
      if (err >= report.worst_relative_error) {
        report.worst_relative_error = err;
        std::ostringstream loc;
        loc << "trial " << trial << ", param " << p << " (" << param_kind_name(ref.kind) << " at "
            << path_to_string(ref.path) << " [" << ref.index << "]), ad=" << ad[p] << " fd=" << fd;
        report.worst_location = loc.str();
      }
      if (!(err <= tolerance)) {
        std::ostringstream msg;
        msg << "relative error " << err << " > " << tolerance << " at trial " << trial << ", param " << p << " ("
            << param_kind_name(ref.kind) << " at " << path_to_string(ref.path) << "), ad=" << ad[p]
            << " fd=" << fd << ", formula " << op_name(phi.op());
        report.failures.push_back(msg.str());
      }
    }
  }
  return report;
}

GradCheckReport grad_check_random(std::size_t formulas, double tolerance, std::uint64_t seed) {
  constexpr double sigmas[] = {0.1, 1.0, 10.0};
  Rng rng(seed);
  GradCheckReport total;
  total.tolerance = tolerance;
  for (std::size_t i = 0; i < formulas; ++i) {
    RandomFormulaOptions o;
    o.max_depth = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    o.dimension = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
    o.max_horizon = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    const Formula phi = random_formula(rng, o);

    GradCheckOptions opts;
    opts.sigma = Sigma(sigmas[i % 3]);
    opts.seed = rng();
    opts.signal_length = std::uniform_int_distribution<std::size_t>(horizon(phi), 12)(rng);
    opts.randomize_parameters = false;
    total.merge(grad_check(phi, 1, tolerance, opts));
  }
  return total;
}

}  // namespace wstl
