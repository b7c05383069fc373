#include "wstl/metrics.hpp"

#include <cstdio>

#include "json.hpp"

namespace wstl {

Label classify(const Formula& phi, const SignalMatrix& s, Sigma sigma) {
  return robustness_weighted(s, phi, 0, sigma) >= 0.0 ? Label::Positive : Label::Negative;
}

void ConfusionCounts::add(Label truth, Label predicted) {
  if (truth == Label::Positive) {
    ++(predicted == Label::Positive ? tp : fn);
  } else {
    ++(predicted == Label::Positive ? fp : tn);
  }
}

ConfusionCounts confusion(const Formula& phi, std::span<const LabeledWindow> windows, Sigma sigma) {
  ConfusionCounts c;
  for (const auto& w : windows) c.add(w.label, classify(phi, w, sigma));
  return c;
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string show(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

}  // namespace

Measures measures(const ConfusionCounts& c) {
  return {ratio(c.tp + c.tn, c.total()), ratio(c.tp, c.tp + c.fn), ratio(c.tn, c.tn + c.fp), ratio(c.tp, c.tp + c.fp),
          ratio(c.tn, c.tn + c.fn)};
}

std::string format_table(const ConfusionCounts& c, const Measures& m) {
  const std::pair<const char*, std::string> rows[] = {
      {"samples", std::to_string(c.total())}, {"tp", std::to_string(c.tp)},   {"fp", std::to_string(c.fp)},
      {"tn", std::to_string(c.tn)},           {"fn", std::to_string(c.fn)},   {"accuracy", show(m.accuracy)},
      {"sensitivity", show(m.sensitivity)},   {"specificity", show(m.specificity)},
      {"ppv", show(m.ppv)},                   {"npv", show(m.npv)},
  };
  std::string out;
  char buf[96];
  for (const auto& [name, value] : rows) {
    std::snprintf(buf, sizeof buf, "%-12s %12s\n", name, value.c_str());
    out += buf;
  }
  return out;
}

std::string format_json(const ConfusionCounts& c, const Measures& m) {
  auto value = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j = {
      {"samples", c.total()},
      {"tp", c.tp},
      {"fp", c.fp},
      {"tn", c.tn},
      {"fn", c.fn},
      {"accuracy", value(m.accuracy)},
      {"sensitivity", value(m.sensitivity)},
      {"specificity", value(m.specificity)},
      {"ppv", value(m.ppv)},
      {"npv", value(m.npv)},
  };
  return j.dump(2) + "\n";
}

}  // namespace wstl
