#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wstl {

/// Discrete time interval [k1, k2], both ends inclusive.
struct Interval {
  std::size_t k1 = 0;
  std::size_t k2 = 0;

  /// Number of time points. Only meaningful when k1 <= k2.
  std::size_t length() const { return k2 - k1 + 1; }
  bool empty() const { return k1 > k2; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Affine predicate a^T s <= c over an l-dimensional sample.
struct Predicate {
  std::vector<double> a;
  double c = 0.0;
};

enum class Op : std::uint8_t { True, Predicate, Not, And, Or, Always, Eventually };

const char* op_name(Op op);

/// Path from the root to a node: the sequence of child indices taken.
using NodePath = std::vector<std::size_t>;

std::string path_to_string(const NodePath& path);

/// Weighted STL formula tree.
///
/// Every node owns its children by value, so copies are deep. Operator
/// weights are stored raw (unnormalized); the semantics normalize them at
/// evaluation time. Construction does not check the validity rules; call
/// validate() for that.
class Formula {
 public:
  Formula() = default;

  static Formula truth();
  static Formula predicate(std::vector<double> a, double c);
  static Formula negation(Formula child);
  static Formula conjunction(double w1, Formula lhs, double w2, Formula rhs);
  static Formula disjunction(double w1, Formula lhs, double w2, Formula rhs);
  static Formula always(Interval interval, std::vector<double> weights, Formula child);
  static Formula eventually(Interval interval, std::vector<double> weights, Formula child);

  Op op() const { return op_; }

  /// And, Or, Always, Eventually: operators that carry a weight vector.
  bool is_aggregate() const;
  bool is_temporal() const { return op_ == Op::Always || op_ == Op::Eventually; }
  /// Or and Eventually are evaluated as the negated aggregate of negated inputs.
  bool is_dual() const { return op_ == Op::Or || op_ == Op::Eventually; }

  const Predicate& predicate() const { return predicate_; }
  Predicate& predicate() { return predicate_; }

  const Interval& interval() const { return interval_; }
  Interval& interval() { return interval_; }

  std::span<const double> weights() const { return weights_; }
  std::vector<double>& weights() { return weights_; }

  const std::vector<Formula>& children() const { return children_; }
  std::vector<Formula>& children() { return children_; }
  const Formula& child(std::size_t i) const { return children_.at(i); }
  Formula& child(std::size_t i) { return children_.at(i); }

  /// Gate probabilities, one per operator weight. Empty unless gates are attached.
  bool has_gates() const { return !gates_.empty(); }
  std::span<const double> gates() const { return gates_; }
  std::vector<double>& gates() { return gates_; }
  /// Current Bernoulli sample of the gates (0 or 1 per weight).
  std::span<const double> gate_sample() const { return gate_sample_; }
  std::vector<double>& gate_sample() { return gate_sample_; }

  /// Set on formulas produced by pruning, where zero weights are legal.
  bool sparsified() const { return sparsified_; }
  void set_sparsified(bool value) { sparsified_ = value; }

  /// Node reached by following `path` from this node.
  const Formula& at(const NodePath& path) const;
  Formula& at(const NodePath& path);

 private:
  Op op_ = Op::True;
  Predicate predicate_;
  Interval interval_;
  std::vector<double> weights_;
  std::vector<Formula> children_;
  std::vector<double> gates_;
  std::vector<double> gate_sample_;
  bool sparsified_ = false;
};

/// Minimal signal length T such that robustness at k = 0 reads only s(0..T-1).
std::size_t horizon(const Formula& phi);

/// Signal dimension of the first predicate found in depth-first order, 0 if none.
std::size_t dimension(const Formula& phi);

/// Number of nodes in the tree.
std::size_t node_count(const Formula& phi);

struct Violation {
  NodePath path;
  std::string message;
};

/// Checks every structural rule and returns all violations. Empty means valid.
std::vector<Violation> validate(const Formula& phi, std::size_t dimension);

/// Structural equality with relative tolerance on every scalar.
bool structurally_equal(const Formula& lhs, const Formula& rhs, double rel_tol = 0.0);

/// Attach one gate per operator weight, all set to `initial`, with an all-ones sample.
void attach_gates(Formula& phi, double initial);
void detach_gates(Formula& phi);

// ---------------------------------------------------------------------------
// Parameter enumeration

enum class ParamKind : std::uint8_t { PredicateCoefficient, PredicateOffset, OperatorWeight, Gate };

const char* param_kind_name(ParamKind kind);

struct ParamRef {
  NodePath path;
  ParamKind kind;
  std::size_t index;  // coefficient / weight / gate index within its node
  double* slot;

  double value() const { return *slot; }
  void set(double v) const { *slot = v; }
};

/// Flat, depth-first (pre-order, left-to-right) view of every trainable
/// scalar. Within a node: predicate coefficients then offset, or operator
/// weights then gates. Writes go straight into the tree; the view is
/// invalidated by structural edits to the formula.
class ParamView {
 public:
  explicit ParamView(Formula& phi);

  std::size_t size() const { return refs_.size(); }
  const ParamRef& operator[](std::size_t i) const { return refs_[i]; }
  auto begin() const { return refs_.begin(); }
  auto end() const { return refs_.end(); }

  std::vector<double> values() const;
  void assign(std::span<const double> values) const;

 private:
  std::vector<ParamRef> refs_;
};

inline ParamView params(Formula& phi) { return ParamView(phi); }

/// Read-only counterparts of ParamView for const formulas.
std::size_t param_count(const Formula& phi);
std::vector<double> param_values(const Formula& phi);

}  // namespace wstl
