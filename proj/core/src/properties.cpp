#include "wstl/properties.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "wstl/grad.hpp"
#include "wstl/learn.hpp"
#include "wstl/random.hpp"
#include "wstl/semantics.hpp"

namespace wstl {

namespace {

struct Tally {
  PropertyResult r;

  Tally(std::string name, double tolerance) {
    r.name = std::move(name);
    r.tolerance = tolerance;
  }

  // Records one instance with deviation `dev`; fails when !ok.
  void record(bool ok, double dev, const std::string& what) {
    ++r.instances;
    if (std::isfinite(dev)) r.worst = std::max(r.worst, dev);
    if (!ok) {
      if (r.failures == 0) r.first_failure = what;
      ++r.failures;
    }
  }
};

std::vector<double> random_values(Rng& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

std::string describe(const std::vector<double>& w, const std::vector<double>& r) {
  std::ostringstream os;
  os.precision(17);
  os << "w=[";
  for (std::size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
  os << "] r=[";
  for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
  os << "]";
  return os.str();
}

Sigma random_sigma(Rng& rng) {
  constexpr double sigmas[] = {0.1, 0.5, 1.0, 2.0, 10.0};
  return Sigma(sigmas[std::uniform_int_distribution<std::size_t>(0, 4)(rng)]);
}

Formula random_subformula(Rng& rng, std::size_t l, std::size_t max_horizon) {
  RandomFormulaOptions o;
  o.max_depth = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  o.dimension = l;
  o.max_horizon = max_horizon;
  return random_formula(rng, o);
}

}  // namespace

PropertyResult check_non_influence(std::size_t instances, std::uint64_t seed) {
  Tally t("zero-weight non-influence", 0.0);
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> len(2, 6);
  std::uniform_real_distribution<double> wide(-1e6, 1e6);
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t m = len(rng);
    std::vector<double> w = random_values(rng, m, 0.1, 2.0);
    std::vector<bool> zero(m, false);
    const std::size_t keep = std::uniform_int_distribution<std::size_t>(0, m - 1)(rng);
    for (std::size_t i = 0; i < m; ++i) {
      if (i != keep && std::bernoulli_distribution(0.5)(rng)) {
        w[i] = 0.0;
        zero[i] = true;
      }
    }
    const Sigma sigma = random_sigma(rng);

    if (n % 2 == 0) {
      std::vector<double> r = random_values(rng, m, -5.0, 5.0);
      const double before = softmin_aggregate(w, r, sigma);
      std::vector<double> r2 = r;
      for (std::size_t i = 0; i < m; ++i) {
        if (zero[i]) r2[i] = wide(rng);
      }
      const double after = softmin_aggregate(w, r2, sigma);
      t.record(before == after, std::fabs(before - after), "aggregate " + describe(w, r));
    } else {
      Formula phi = Formula::always({0, m - 1}, w, Formula::predicate({1.0}, 0.0));
      phi.set_sparsified(true);
      SignalMatrix s = random_signal(rng, 1, m);
      const double before = robustness_weighted(s, phi, 0, sigma);
      for (std::size_t i = 0; i < m; ++i) {
        if (zero[i]) s(0, i) = wide(rng);
      }
      const double after = robustness_weighted(s, phi, 0, sigma);
      t.record(before == after, std::fabs(before - after), "sparsified Always " + describe(w, {}));
    }
  }
  return t.r;
}

PropertyResult check_monotonicity(std::size_t instances, std::uint64_t seed) {
  Tally t("monotonicity", 0.0);
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> len(2, 6);
  std::uniform_real_distribution<double> shift(0.0, 5.0);
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t m = len(rng);
    const auto w = random_values(rng, m, 0.1, 2.0);
    auto r = random_values(rng, m, -5.0, 5.0);
    const Sigma sigma = random_sigma(rng);
    const double d = n % 10 == 0 ? 0.0 : shift(rng);
    const double before = softmin_aggregate(w, r, sigma);
    for (double& v : r) v += d;
    const double after = softmin_aggregate(w, r, sigma);
    t.record(after >= before, std::max(0.0, before - after), "d=" + std::to_string(d) + " " + describe(w, r));
  }
  return t.r;
}

PropertyResult check_demorgan(std::size_t instances, std::uint64_t seed) {
  constexpr double tol = 1e-12;
  Tally t("DeMorgan duality", tol);
  Rng rng(seed);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t l = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    const Sigma sigma = random_sigma(rng);
    Formula lhs, rhs;
    if (n % 2 == 0) {
      Formula a = random_subformula(rng, l, 6);
      Formula b = random_subformula(rng, l, 6);
      const double w1 = weight(rng), w2 = weight(rng);
      lhs = Formula::negation(Formula::conjunction(w1, Formula::negation(a), w2, Formula::negation(b)));
      rhs = Formula::disjunction(w1, a, w2, b);
    } else {
      Formula a = random_subformula(rng, l, 4);
      const std::size_t k2 = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
      const std::size_t k1 = std::uniform_int_distribution<std::size_t>(0, k2)(rng);
      const auto w = random_values(rng, k2 - k1 + 1, 0.5, 1.5);
      lhs = Formula::negation(Formula::always({k1, k2}, w, Formula::negation(a)));
      rhs = Formula::eventually({k1, k2}, w, a);
    }
    const SignalMatrix s = random_signal(rng, l, horizon(rhs));
    const double x = robustness_weighted(s, lhs, 0, sigma);
    const double y = robustness_weighted(s, rhs, 0, sigma);
    const double dev = std::fabs(x - y);
    t.record(dev <= tol, dev, "instance " + std::to_string(n));
  }
  return t.r;
}

PropertyResult check_double_negation(std::size_t instances, std::uint64_t seed) {
  Tally t("double negation", 0.0);
  Rng rng(seed);
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t l = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    const Formula phi = random_subformula(rng, l, 8);
    const Formula nn = Formula::negation(Formula::negation(phi));
    const SignalMatrix s = random_signal(rng, l, horizon(phi));
    const Sigma sigma = random_sigma(rng);
    const double x = robustness_weighted(s, phi, 0, sigma);
    const double y = robustness_weighted(s, nn, 0, sigma);
    t.record(x == y, std::fabs(x - y), "instance " + std::to_string(n));
  }
  return t.r;
}

PropertyResult check_convex_bounds(std::size_t instances, std::uint64_t seed) {
  // num/den rounding may overshoot an extreme input by a few ulps
  constexpr double rel = 1e-12;
  Tally t("convex-combination bounds", rel);
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> len(1, 8);
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t m = len(rng);
    auto w = random_values(rng, m, 0.1, 2.0);
    if (m > 1 && n % 3 == 0) w[std::uniform_int_distribution<std::size_t>(0, m - 1)(rng)] = 0.0;
    if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) w[0] = 1.0;
    const auto r = random_values(rng, m, -10.0, 10.0);
    const Sigma sigma = random_sigma(rng);
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < m; ++i) {
      if (w[i] > 0.0) {
        lo = std::min(lo, r[i]);
        hi = std::max(hi, r[i]);
      }
    }
    const double out = softmin_aggregate(w, r, sigma);
    const double slack = rel * std::max(1.0, std::max(std::fabs(lo), std::fabs(hi)));
    const double dev = std::max({0.0, lo - out, out - hi});
    t.record(out >= lo - slack && out <= hi + slack, dev, describe(w, r));
  }
  return t.r;
}

PropertyResult check_weight_scaling(std::size_t instances, std::uint64_t seed) {
  constexpr double tol = 1e-10;
  Tally t("weight-scaling invariance", tol);
  Rng rng(seed);
  std::uniform_real_distribution<double> factor(0.1, 10.0);
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t l = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    Formula phi = random_subformula(rng, l, 8);
    std::vector<Formula*> ops;
    detail::for_each_node(phi, [&](Formula& node) {
      if (node.is_aggregate()) ops.push_back(&node);
    });
    if (ops.empty()) {
      phi = Formula::always({0, 1}, {1.0, 2.0}, std::move(phi));
      ops.push_back(&phi);
    }
    const SignalMatrix s = random_signal(rng, l, horizon(phi));
    const Sigma sigma = random_sigma(rng);
    const double before = robustness_weighted(s, phi, 0, sigma);
    Formula* target = ops[std::uniform_int_distribution<std::size_t>(0, ops.size() - 1)(rng)];
    const double lambda = n % 4 == 0 ? 3.0 : factor(rng);
    for (double& w : target->weights()) w *= lambda;
    const double after = robustness_weighted(s, phi, 0, sigma);
    const double dev = std::fabs(after - before);
    t.record(dev <= tol, dev, "lambda=" + std::to_string(lambda));
  }
  return t.r;
}

PropertyResult check_ordering_of_influence(std::size_t instances, std::uint64_t seed) {
  Tally t("ordering of influence", 0.0);
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> len(2, 6);
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t m = len(rng);
    auto w = random_values(rng, m, 0.1, 2.0);
    auto r = random_values(rng, m, -3.0, 3.0);
    r[1] = r[0];
    if (w[0] == w[1]) w[0] += 0.5;
    const std::size_t big = w[0] > w[1] ? 0 : 1;
    const std::size_t small = 1 - big;
    const Sigma sigma = random_sigma(rng);
    const auto p = softmin_aggregate_partials(w, r, sigma);
    const double gb = std::fabs(p.d_values[big]);
    const double gs = std::fabs(p.d_values[small]);
    t.record(gb > gs, std::max(0.0, gs - gb), describe(w, r));
  }
  return t.r;
}

PropertyResult check_sigma_limit(std::size_t instances, std::uint64_t seed) {
  constexpr double tol = 1e-6;
  constexpr double gap = 0.1;
  Tally t("sigma -> 0 limit", tol);
  Rng rng(seed);
  const Sigma sigma(1e-3);
  std::uniform_int_distribution<std::size_t> len(2, 8);
  std::uniform_real_distribution<double> spacing(gap, 2.0);
  std::uniform_real_distribution<double> start(-5.0, 5.0);
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t m = len(rng);
    // child robustness values, pairwise separated by at least `gap`
    std::vector<double> r(m);
    r[0] = start(rng);
    for (std::size_t i = 1; i < m; ++i) r[i] = r[i - 1] + spacing(rng);
    std::shuffle(r.begin(), r.end(), rng);

    Formula phi;
    SignalMatrix s;
    const Formula pred = Formula::predicate({1.0}, 0.0);  // robustness = -s
    switch (n % 4) {
      case 0:
      case 1: {
        s = SignalMatrix(1, m);
        for (std::size_t i = 0; i < m; ++i) s(0, i) = -r[i];
        const std::vector<double> w(m, 1.0);
        phi = n % 4 == 0 ? Formula::always({0, m - 1}, w, pred) : Formula::eventually({0, m - 1}, w, pred);
        break;
      }
      default: {
        s = SignalMatrix(2, 1);
        s(0, 0) = -r[0];
        s(1, 0) = -r[1];
        const Formula p1 = Formula::predicate({1.0, 0.0}, 0.0);
        const Formula p2 = Formula::predicate({0.0, 1.0}, 0.0);
        phi = n % 4 == 2 ? Formula::conjunction(1.0, p1, 1.0, p2) : Formula::disjunction(1.0, p1, 1.0, p2);
        break;
      }
    }
    const double dev = std::fabs(robustness_weighted(s, phi, 0, sigma) - robustness_classical(s, phi, 0));
    t.record(dev <= tol, dev, std::string(op_name(phi.op())) + " " + describe({}, r));
  }
  return t.r;
}

std::vector<PropertyResult> run_property_suite(std::size_t instances, std::uint64_t seed) {
  return {
      check_non_influence(instances, seed),       check_monotonicity(instances, seed + 1),
      check_demorgan(instances, seed + 2),        check_double_negation(instances, seed + 3),
      check_convex_bounds(instances, seed + 4),   check_weight_scaling(instances, seed + 5),
      check_ordering_of_influence(instances, seed + 6), check_sigma_limit(instances, seed + 7),
  };
}

std::string format_property_result(const PropertyResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-4s %-28s instances=%zu failures=%zu worst=%.3g tol=%.3g",
                r.passed() ? "PASS" : "FAIL", r.name.c_str(), r.instances, r.failures, r.worst, r.tolerance);
  std::string out = buf;
  if (!r.first_failure.empty()) out += " first: " + r.first_failure;
  return out;
}

}  // namespace wstl
