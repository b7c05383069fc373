#pragma once

// Reference implementations used only as test oracles. They share no code
// with the library's evaluators.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "wstl/formula.hpp"
#include "wstl/semantics.hpp"

namespace oracle {

// Literal aggregate formula in long double, no max-shift. Inputs must be
// moderate (|r|/sigma well below the exp overflow range).
inline long double softmin(const std::vector<double>& w, const std::vector<double>& r, double sigma) {
  long double wsum = 0, z = 0;
  for (double v : w) wsum += v;
  for (double v : r) z += std::exp(-static_cast<long double>(v) / sigma);
  long double num = 0, den = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const long double s = std::exp(-static_cast<long double>(r[i]) / sigma) / z;
    num += (w[i] / wsum) * s * r[i];
    den += (w[i] / wsum) * s;
  }
  return num / den;
}

// Classical robustness computed bottom-up: every subformula's full trace over
// t = 0 .. T - horizon(sub), then the root trace read at k.
inline std::vector<double> classical_trace(const wstl::SignalMatrix& s, const wstl::Formula& phi) {
  using wstl::Op;
  const std::size_t h = wstl::horizon(phi);
  const std::size_t n = s.steps() >= h ? s.steps() - h + 1 : 0;
  std::vector<double> out(n);
  switch (phi.op()) {
    case Op::True:
      std::fill(out.begin(), out.end(), std::numeric_limits<double>::infinity());
      return out;
    case Op::Predicate:
      for (std::size_t t = 0; t < n; ++t) {
        double dot = 0;
        for (std::size_t j = 0; j < phi.predicate().a.size(); ++j) dot += phi.predicate().a[j] * s(j, t);
        out[t] = phi.predicate().c - dot;
      }
      return out;
    case Op::Not: {
      const auto c = classical_trace(s, phi.child(0));
      for (std::size_t t = 0; t < n; ++t) out[t] = -c[t];
      return out;
    }
    case Op::And:
    case Op::Or: {
      const auto a = classical_trace(s, phi.child(0));
      const auto b = classical_trace(s, phi.child(1));
      for (std::size_t t = 0; t < n; ++t) out[t] = phi.op() == Op::And ? std::min(a[t], b[t]) : std::max(a[t], b[t]);
      return out;
    }
    case Op::Always:
    case Op::Eventually: {
      const auto c = classical_trace(s, phi.child(0));
      const auto I = phi.interval();
      for (std::size_t t = 0; t < n; ++t) {
        double acc = c[t + I.k1];
        for (std::size_t d = I.k1 + 1; d <= I.k2; ++d) {
          acc = phi.op() == Op::Always ? std::min(acc, c[t + d]) : std::max(acc, c[t + d]);
        }
        out[t] = acc;
      }
      return out;
    }
  }
  return out;
}

inline double classical(const wstl::SignalMatrix& s, const wstl::Formula& phi, std::size_t k = 0) {
  return classical_trace(s, phi).at(k);
}

}  // namespace oracle
