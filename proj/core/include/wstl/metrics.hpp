#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "wstl/dataset.hpp"
#include "wstl/formula.hpp"
#include "wstl/semantics.hpp"

namespace wstl {

/// +1 iff robustness_weighted(s, phi, 0, sigma) >= 0.
Label classify(const Formula& phi, const SignalMatrix& s, Sigma sigma);
inline Label classify(const Formula& phi, const LabeledWindow& w, Sigma sigma) { return classify(phi, w.signal, sigma); }

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  void add(Label truth, Label predicted);
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion(const Formula& phi, std::span<const LabeledWindow> windows, Sigma sigma);

/// Each measure is empty when its denominator is zero.
struct Measures {
  std::optional<double> accuracy;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> ppv;
  std::optional<double> npv;
};

Measures measures(const ConfusionCounts& c);

/// Aligned two-column table, values to 4 decimals, "undefined" for empty measures.
std::string format_table(const ConfusionCounts& c, const Measures& m);
std::string format_json(const ConfusionCounts& c, const Measures& m);

}  // namespace wstl
