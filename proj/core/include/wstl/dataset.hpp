#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wstl/semantics.hpp"

namespace wstl {

enum class Label : int { Negative = -1, Positive = 1 };

inline int label_value(Label l) { return static_cast<int>(l); }

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-row labeled multivariate series, rows in file order.
struct LabeledSeries {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;  // rows[i].size() == feature_names.size()
  std::vector<Label> labels;              // parallel to rows

  std::size_t size() const { return rows.size(); }
  void append(const LabeledSeries& other);
};

struct LabeledWindow {
  SignalMatrix signal;  // l x K_I
  Label label;
};

/// Occupancy CSV: header with Temperature, Humidity, Light, CO2,
/// HumidityRatio and Occupancy (case-insensitive, any order). Rows may carry
/// one extra leading index column the header does not name.
LabeledSeries load_occupancy_csv(const std::filesystem::path& path);
LabeledSeries parse_occupancy_csv(std::string_view text, const std::string& source = "<memory>");

/// Loads and concatenates in argument order.
LabeledSeries load_occupancy_csvs(std::span<const std::filesystem::path> paths);

/// Greedy non-overlapping windows of `length` rows sharing one label.
std::vector<LabeledWindow> window(const LabeledSeries& series, std::size_t length);

/// Per-feature standardization x' = (x - mean) / scale.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;

  static Scaler identity(std::size_t features);
  /// Population mean/std over every sample of every window; std floored at 1e-9.
  static Scaler fit(std::span<const LabeledWindow> windows);

  bool is_identity() const;
  SignalMatrix apply(const SignalMatrix& s) const;
  SignalMatrix invert(const SignalMatrix& s) const;
  std::vector<LabeledWindow> apply(std::span<const LabeledWindow> windows) const;
};

struct DataSplit {
  std::vector<LabeledWindow> train;
  std::vector<LabeledWindow> test;
  Scaler scaler;  // fitted on train; raw windows are kept unscaled
};

/// Seeded stratified split. The test set holds round(test_fraction * N)
/// windows, apportioned across classes by largest remainder.
DataSplit split(std::vector<LabeledWindow> windows, double test_fraction, std::uint64_t seed);

/// Two-feature synthetic fixture. Positives keep x1 <= -0.1 throughout;
/// negatives exceed +0.2 at three or more time points. x2 is noise.
std::vector<LabeledWindow> synth_generate(std::size_t n_per_class, std::size_t length, std::uint64_t seed);

std::size_t count_label(std::span<const LabeledWindow> windows, Label label);

}  // namespace wstl
