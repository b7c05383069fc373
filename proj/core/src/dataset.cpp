#include "wstl/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace wstl {

void LabeledSeries::append(const LabeledSeries& other) {
  if (rows.empty() && feature_names.empty()) feature_names = other.feature_names;
  if (other.feature_names != feature_names) throw DataError("cannot concatenate series with different features");
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

namespace {

constexpr std::array<const char*, 5> kFeatures = {"Temperature", "Humidity", "Light", "CO2", "HumidityRatio"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Comma split honouring double quotes; quotes are stripped.
std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

double parse_number(std::string_view cell, const std::string& source, std::size_t line, const char* column) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw DataError(source + ":" + std::to_string(line) + ": unparseable " + column + " value '" + std::string(cell) +
                    "'");
  }
  return v;
}

}  // namespace

LabeledSeries parse_occupancy_csv(std::string_view text, const std::string& source) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos <= text.size();) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw DataError(source + ": empty file");

  const auto header = split_fields(lines[first]);
  auto find_column = [&](const char* name) -> std::size_t {
    const std::string want = lower(name);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (lower(header[i]) == want) return i;
    }
    throw DataError(source + ": missing column " + name);
  };
  std::array<std::size_t, kFeatures.size()> feature_col{};
  for (std::size_t j = 0; j < kFeatures.size(); ++j) feature_col[j] = find_column(kFeatures[j]);
  const std::size_t label_col = find_column("Occupancy");

  LabeledSeries series;
  series.feature_names.assign(kFeatures.begin(), kFeatures.end());
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::size_t line_no = i + 1;
    const auto fields = split_fields(lines[i]);
    std::size_t offset = 0;
    if (fields.size() == header.size() + 1) {
      offset = 1;  // leading row index not named in the header
    } else if (fields.size() != header.size()) {
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row(kFeatures.size());
    for (std::size_t j = 0; j < kFeatures.size(); ++j) {
      row[j] = parse_number(fields[feature_col[j] + offset], source, line_no, kFeatures[j]);
    }
    const double occ = parse_number(fields[label_col + offset], source, line_no, "Occupancy");
    if (occ != 0.0 && occ != 1.0) {
      throw DataError(source + ":" + std::to_string(line_no) + ": Occupancy must be 0 or 1");
    }
    series.rows.push_back(std::move(row));
    series.labels.push_back(occ == 1.0 ? Label::Positive : Label::Negative);
  }
  if (series.rows.empty()) throw DataError(source + ": no data rows");
  return series;
}

LabeledSeries load_occupancy_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_occupancy_csv(buf.str(), path.string());
}

LabeledSeries load_occupancy_csvs(std::span<const std::filesystem::path> paths) {
  if (paths.empty()) throw DataError("no data files given");
  LabeledSeries all;
  for (const auto& p : paths) all.append(load_occupancy_csv(p));
  return all;
}

std::vector<LabeledWindow> window(const LabeledSeries& series, std::size_t length) {
  if (length == 0) throw std::invalid_argument("window length must be >= 1");
  std::vector<LabeledWindow> out;
  const std::size_t l = series.feature_names.size();
  const std::size_t n = series.size();
  std::size_t i = 0;
  while (i + length <= n) {
    const Label label = series.labels[i];
    std::size_t run = 1;
    while (run < length && series.labels[i + run] == label) ++run;
    if (run < length) {
      ++i;
      continue;
    }
    SignalMatrix s(l, length);
    for (std::size_t t = 0; t < length; ++t) {
      for (std::size_t f = 0; f < l; ++f) s(f, t) = series.rows[i + t][f];
    }
    out.push_back({std::move(s), label});
    i += length;
  }
  return out;
}

// ---------------------------------------------------------------------------

Scaler Scaler::identity(std::size_t features) {
  return {std::vector<double>(features, 0.0), std::vector<double>(features, 1.0)};
}

Scaler Scaler::fit(std::span<const LabeledWindow> windows) {
  if (windows.empty()) throw DataError("cannot fit scaler on an empty training set");
  const std::size_t l = windows.front().signal.features();
  Scaler sc{std::vector<double>(l, 0.0), std::vector<double>(l, 0.0)};
  for (std::size_t f = 0; f < l; ++f) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& w : windows) {
      for (double v : w.signal.row(f)) sum += v;
      n += w.signal.steps();
    }
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (const auto& w : windows) {
      for (double v : w.signal.row(f)) sq += (v - mean) * (v - mean);
    }
    sc.mean[f] = mean;
    sc.scale[f] = std::max(std::sqrt(sq / static_cast<double>(n)), 1e-9);
  }
  return sc;
}

bool Scaler::is_identity() const {
  return std::all_of(mean.begin(), mean.end(), [](double v) { return v == 0.0; }) &&
         std::all_of(scale.begin(), scale.end(), [](double v) { return v == 1.0; });
}

SignalMatrix Scaler::apply(const SignalMatrix& s) const {
  if (s.features() != mean.size()) throw DataError("scaler dimension does not match signal");
  if (is_identity()) return s;
  SignalMatrix out(s.features(), s.steps());
  for (std::size_t f = 0; f < s.features(); ++f) {
    for (std::size_t t = 0; t < s.steps(); ++t) out(f, t) = (s(f, t) - mean[f]) / scale[f];
  }
  return out;
}

SignalMatrix Scaler::invert(const SignalMatrix& s) const {
  if (s.features() != mean.size()) throw DataError("scaler dimension does not match signal");
  if (is_identity()) return s;
  SignalMatrix out(s.features(), s.steps());
  for (std::size_t f = 0; f < s.features(); ++f) {
    for (std::size_t t = 0; t < s.steps(); ++t) out(f, t) = s(f, t) * scale[f] + mean[f];
  }
  return out;
}

std::vector<LabeledWindow> Scaler::apply(std::span<const LabeledWindow> windows) const {
  std::vector<LabeledWindow> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back({apply(w.signal), w.label});
  return out;
}

// ---------------------------------------------------------------------------

std::size_t count_label(std::span<const LabeledWindow> windows, Label label) {
  return static_cast<std::size_t>(
      std::count_if(windows.begin(), windows.end(), [label](const LabeledWindow& w) { return w.label == label; }));
}

DataSplit split(std::vector<LabeledWindow> windows, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::invalid_argument("test_fraction must lie in (0, 1)");
  std::mt19937_64 rng(seed);

  std::array<std::vector<std::size_t>, 2> by_class;  // [0] negative, [1] positive
  for (std::size_t i = 0; i < windows.size(); ++i) by_class[windows[i].label == Label::Positive ? 1 : 0].push_back(i);
  for (std::size_t c = 0; c < 2; ++c) {
    if (by_class[c].empty()) {
      throw DataError(std::string("split: no ") + (c == 1 ? "positive" : "negative") + " windows");
    }
    std::shuffle(by_class[c].begin(), by_class[c].end(), rng);
  }

  const std::size_t total = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(windows.size())));
  std::array<std::size_t, 2> n_test{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    const double quota = test_fraction * static_cast<double>(by_class[c].size());
    n_test[c] = static_cast<std::size_t>(std::floor(quota));
    remainder[c] = quota - std::floor(quota);
    assigned += n_test[c];
  }
  while (assigned < total) {
    const std::size_t c = remainder[1] > remainder[0] ? 1 : 0;
    ++n_test[c];
    remainder[c] = -1.0;
    ++assigned;
  }

  DataSplit out;
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& idx = by_class[c];
    test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test[c]));
    train_idx.insert(train_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test[c]), idx.end());
  }
  std::shuffle(train_idx.begin(), train_idx.end(), rng);
  std::shuffle(test_idx.begin(), test_idx.end(), rng);
  for (std::size_t i : train_idx) out.train.push_back(std::move(windows[i]));
  for (std::size_t i : test_idx) out.test.push_back(std::move(windows[i]));
  out.scaler = Scaler::fit(out.train);
  return out;
}

std::vector<LabeledWindow> synth_generate(std::size_t n_per_class, std::size_t length, std::uint64_t seed) {
  if (n_per_class == 0 || length == 0) throw std::invalid_argument("synth_generate: need n_per_class, length >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> safe(-1.0, -0.2);
  std::uniform_real_distribution<double> unsafe(0.3, 1.0);
  std::uniform_real_distribution<double> noise(-0.1, 0.1);
  std::uniform_real_distribution<double> other(-1.0, 1.0);

  std::vector<LabeledWindow> out;
  out.reserve(2 * n_per_class);
  for (std::size_t n = 0; n < 2 * n_per_class; ++n) {
    const bool positive = n < n_per_class;
    SignalMatrix s(2, length);
    for (std::size_t t = 0; t < length; ++t) {
      s(0, t) = safe(rng);
      s(1, t) = other(rng);
    }
    if (!positive) {
      std::vector<std::size_t> times(length);
      std::iota(times.begin(), times.end(), 0);
      std::shuffle(times.begin(), times.end(), rng);
      const std::size_t max_bad = std::max<std::size_t>(3, length / 2);
      const std::size_t bad =
          std::min(length, std::uniform_int_distribution<std::size_t>(3, max_bad)(rng));
      for (std::size_t i = 0; i < bad; ++i) s(0, times[i]) = unsafe(rng);
    }
    for (std::size_t t = 0; t < length; ++t) s(0, t) += noise(rng);
    out.push_back({std::move(s), positive ? Label::Positive : Label::Negative});
  }
  return out;
}

}  // namespace wstl
