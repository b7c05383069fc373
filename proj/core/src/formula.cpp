#include "wstl/formula.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wstl {

const char* op_name(Op op) {
  switch (op) {
    case Op::True: return "True";
    case Op::Predicate: return "Predicate";
    case Op::Not: return "Not";
    case Op::And: return "And";
    case Op::Or: return "Or";
    case Op::Always: return "Always";
    case Op::Eventually: return "Eventually";
  }
  return "?";
}

std::string path_to_string(const NodePath& path) {
  std::string out = "root";
  for (std::size_t i : path) {
    out += '/';
    out += std::to_string(i);
  }
  return out;
}

Formula Formula::truth() { return Formula{}; }

Formula Formula::predicate(std::vector<double> a, double c) {
  Formula f;
  f.op_ = Op::Predicate;
  f.predicate_ = Predicate{std::move(a), c};
  return f;
}

Formula Formula::negation(Formula child) {
  Formula f;
  f.op_ = Op::Not;
  f.children_.push_back(std::move(child));
  return f;
}

Formula Formula::conjunction(double w1, Formula lhs, double w2, Formula rhs) {
  Formula f;
  f.op_ = Op::And;
  f.weights_ = {w1, w2};
  f.children_.push_back(std::move(lhs));
  f.children_.push_back(std::move(rhs));
  return f;
}

Formula Formula::disjunction(double w1, Formula lhs, double w2, Formula rhs) {
  Formula f = conjunction(w1, std::move(lhs), w2, std::move(rhs));
  f.op_ = Op::Or;
  return f;
}

Formula Formula::always(Interval interval, std::vector<double> weights, Formula child) {
  Formula f;
  f.op_ = Op::Always;
  f.interval_ = interval;
  f.weights_ = std::move(weights);
  f.children_.push_back(std::move(child));
  return f;
}

Formula Formula::eventually(Interval interval, std::vector<double> weights, Formula child) {
  Formula f = always(interval, std::move(weights), std::move(child));
  f.op_ = Op::Eventually;
  return f;
}

bool Formula::is_aggregate() const {
  return op_ == Op::And || op_ == Op::Or || op_ == Op::Always || op_ == Op::Eventually;
}

const Formula& Formula::at(const NodePath& path) const {
  const Formula* node = this;
  for (std::size_t i : path) node = &node->children_.at(i);
  return *node;
}

Formula& Formula::at(const NodePath& path) {
  Formula* node = this;
  for (std::size_t i : path) node = &node->children_.at(i);
  return *node;
}

std::size_t horizon(const Formula& phi) {
  switch (phi.op()) {
    case Op::True:
    case Op::Predicate: return 1;
    case Op::Not: return horizon(phi.child(0));
    case Op::And:
    case Op::Or: return std::max(horizon(phi.child(0)), horizon(phi.child(1)));
    case Op::Always:
    case Op::Eventually: return phi.interval().k2 + horizon(phi.child(0));
  }
  return 1;
}

std::size_t dimension(const Formula& phi) {
  if (phi.op() == Op::Predicate) return phi.predicate().a.size();
  for (const auto& c : phi.children()) {
    if (std::size_t d = dimension(c); d != 0) return d;
  }
  return 0;
}

std::size_t node_count(const Formula& phi) {
  std::size_t n = 1;
  for (const auto& c : phi.children()) n += node_count(c);
  return n;
}

namespace {

void validate_node(const Formula& phi, std::size_t l, bool sparsified, NodePath& path,
                   std::vector<Violation>& out) {
  auto report = [&](std::string msg) { out.push_back({path, std::move(msg)}); };

  switch (phi.op()) {
    case Op::True: break;
    case Op::Predicate: {
      const auto& p = phi.predicate();
      if (p.a.size() != l) {
        report("predicate dimension " + std::to_string(p.a.size()) + " != signal dimension " +
               std::to_string(l));
      }
      bool finite = std::isfinite(p.c);
      for (double v : p.a) finite = finite && std::isfinite(v);
      if (!finite) report("non-finite predicate parameter");
      break;
    }
    case Op::Not:
    case Op::And:
    case Op::Or:
    case Op::Always:
    case Op::Eventually: break;
  }

  if (phi.is_aggregate()) {
    const auto w = phi.weights();
    if (phi.is_temporal()) {
      const auto& I = phi.interval();
      if (I.empty()) {
        report("empty interval [" + std::to_string(I.k1) + "," + std::to_string(I.k2) +
               "]: k1 > k2");
      } else if (w.size() != I.length()) {
        report("weight length " + std::to_string(w.size()) + " != interval length " +
               std::to_string(I.length()));
      }
    } else if (w.size() != 2) {
      report("binary operator needs 2 weights, has " + std::to_string(w.size()));
    }

    bool any_positive = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!std::isfinite(w[i])) {
        report("non-finite weight at index " + std::to_string(i));
      } else if (w[i] > 0.0) {
        any_positive = true;
      } else if (w[i] < 0.0 || !sparsified) {
        report("non-positive weight at index " + std::to_string(i));
      }
    }
    if (sparsified && !w.empty() && !any_positive) report("operator fully pruned: all weights zero");

    if (phi.has_gates()) {
      if (phi.gates().size() != w.size() || phi.gate_sample().size() != w.size()) {
        report("gate count does not match weight count");
      }
      for (double g : phi.gates()) {
        if (!(g >= 0.0 && g <= 1.0)) report("gate probability outside [0,1]");
      }
    }
  } else if (phi.has_gates()) {
    report("gates attached to a node without weights");
  }

  const std::size_t expected_children = [&] {
    switch (phi.op()) {
      case Op::True:
      case Op::Predicate: return std::size_t{0};
      case Op::Not:
      case Op::Always:
      case Op::Eventually: return std::size_t{1};
      case Op::And:
      case Op::Or: return std::size_t{2};
    }
    return std::size_t{0};
  }();
  if (phi.children().size() != expected_children) {
    report(std::string(op_name(phi.op())) + " has " + std::to_string(phi.children().size()) +
           " children, expected " + std::to_string(expected_children));
    return;
  }

  for (std::size_t i = 0; i < phi.children().size(); ++i) {
    path.push_back(i);
    validate_node(phi.child(i), l, sparsified, path, out);
    path.pop_back();
  }
}

bool close(double a, double b, double rel_tol) {
  if (a == b) return true;
  if (std::isnan(a) || std::isnan(b)) return false;
  return std::fabs(a - b) <= rel_tol * std::max(std::fabs(a), std::fabs(b));
}

bool close(std::span<const double> a, std::span<const double> b, double rel_tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!close(a[i], b[i], rel_tol)) return false;
  }
  return true;
}

}  // namespace

std::vector<Violation> validate(const Formula& phi, std::size_t dimension) {
  std::vector<Violation> out;
  NodePath path;
  validate_node(phi, dimension, phi.sparsified(), path, out);
  return out;
}

bool structurally_equal(const Formula& lhs, const Formula& rhs, double rel_tol) {
  if (lhs.op() != rhs.op()) return false;
  if (lhs.op() == Op::Predicate) {
    if (!close(lhs.predicate().a, rhs.predicate().a, rel_tol)) return false;
    if (!close(lhs.predicate().c, rhs.predicate().c, rel_tol)) return false;
  }
  if (lhs.is_temporal() && !(lhs.interval() == rhs.interval())) return false;
  if (!close(lhs.weights(), rhs.weights(), rel_tol)) return false;
  if (lhs.children().size() != rhs.children().size()) return false;
  for (std::size_t i = 0; i < lhs.children().size(); ++i) {
    if (!structurally_equal(lhs.child(i), rhs.child(i), rel_tol)) return false;
  }
  return true;
}

void attach_gates(Formula& phi, double initial) {
  if (phi.is_aggregate()) {
    phi.gates().assign(phi.weights().size(), initial);
    phi.gate_sample().assign(phi.weights().size(), 1.0);
  }
  for (auto& c : phi.children()) attach_gates(c, initial);
}

void detach_gates(Formula& phi) {
  phi.gates().clear();
  phi.gate_sample().clear();
  for (auto& c : phi.children()) detach_gates(c);
}

// ---------------------------------------------------------------------------

const char* param_kind_name(ParamKind kind) {
  switch (kind) {
    case ParamKind::PredicateCoefficient: return "predicate-coefficient";
    case ParamKind::PredicateOffset: return "predicate-offset";
    case ParamKind::OperatorWeight: return "operator-weight";
    case ParamKind::Gate: return "gate";
  }
  return "?";
}

namespace {

void collect(Formula& phi, NodePath& path, std::vector<ParamRef>& out) {
  if (phi.op() == Op::Predicate) {
    auto& p = phi.predicate();
    for (std::size_t j = 0; j < p.a.size(); ++j) {
      out.push_back({path, ParamKind::PredicateCoefficient, j, &p.a[j]});
    }
    out.push_back({path, ParamKind::PredicateOffset, 0, &p.c});
  }
  if (phi.is_aggregate()) {
    auto& w = phi.weights();
    for (std::size_t i = 0; i < w.size(); ++i) out.push_back({path, ParamKind::OperatorWeight, i, &w[i]});
    auto& g = phi.gates();
    for (std::size_t i = 0; i < g.size(); ++i) out.push_back({path, ParamKind::Gate, i, &g[i]});
  }
  for (std::size_t i = 0; i < phi.children().size(); ++i) {
    path.push_back(i);
    collect(phi.child(i), path, out);
    path.pop_back();
  }
}

void collect_values(const Formula& phi, std::vector<double>& out) {
  if (phi.op() == Op::Predicate) {
    out.insert(out.end(), phi.predicate().a.begin(), phi.predicate().a.end());
    out.push_back(phi.predicate().c);
  }
  if (phi.is_aggregate()) {
    out.insert(out.end(), phi.weights().begin(), phi.weights().end());
    out.insert(out.end(), phi.gates().begin(), phi.gates().end());
  }
  for (const auto& c : phi.children()) collect_values(c, out);
}

}  // namespace

ParamView::ParamView(Formula& phi) {
  NodePath path;
  collect(phi, path, refs_);
}

std::vector<double> ParamView::values() const {
  std::vector<double> out;
  out.reserve(refs_.size());
  for (const auto& r : refs_) out.push_back(*r.slot);
  return out;
}

void ParamView::assign(std::span<const double> values) const {
  if (values.size() != refs_.size()) {
    throw std::invalid_argument("ParamView::assign: expected " + std::to_string(refs_.size()) +
                                " values, got " + std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < refs_.size(); ++i) *refs_[i].slot = values[i];
}

std::size_t param_count(const Formula& phi) { return param_values(phi).size(); }

std::vector<double> param_values(const Formula& phi) {
  std::vector<double> out;
  collect_values(phi, out);
  return out;
}

}  // namespace wstl
