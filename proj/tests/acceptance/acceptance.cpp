// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any selected criterion fails.
//
//   wstl_acceptance [core|occupancy|all]
//
// The occupancy criteria (6-9) read datatraining.txt, datatest.txt and
// datatest2.txt from $WSTL_DATA_DIR.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "wstl/grad.hpp"
#include "wstl/learn.hpp"
#include "wstl/metrics.hpp"
#include "wstl/properties.hpp"
#include "wstl/random.hpp"
#include "wstl/sparsify.hpp"
#include "wstl/text.hpp"

using namespace wstl;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets, fixed here rather than taken from the command line.
constexpr double kGradTolerance = 1e-4;
constexpr std::size_t kGradFormulas = 100;
constexpr double kGradSeconds = 10.0;
constexpr std::size_t kPropertyInstances = 1000;
constexpr double kPropertySeconds = 10.0;
constexpr std::size_t kOracleFormulas = 2000;
constexpr double kSyntheticSeconds = 5.0;
constexpr std::size_t kOccupancyWindow = 16;
constexpr double kOccupancyAccuracy = 0.980;
constexpr double kOccupancySeconds = 60.0;
constexpr double kMinSensitivity = 0.97, kMinSpecificity = 0.97, kMinPpv = 0.96, kMinNpv = 0.97;
constexpr double kSbar2Accuracy = 0.968, kSbar8Accuracy = 0.980;
constexpr double kSbarMonotoneSlack = 0.006;
constexpr std::size_t kGateMaxWeights = 6;
constexpr double kGateAccuracy = 0.974;
constexpr double kFractionTolerance = 1e-9;
constexpr std::size_t kRoundTrips = 1000;
constexpr double kRoundTripTolerance = 1e-6;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Runs a criterion body; an escaping exception is a failure with its message.
void guarded(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

void criterion_gradient() {
  const auto t0 = Clock::now();
  const GradCheckReport r = grad_check_random(kGradFormulas, kGradTolerance, 1);
  const double secs = seconds_since(t0);
  report(1, r.passed() && r.trials >= kGradFormulas && secs < kGradSeconds,
         fmt("%zu formulas, %zu comparisons, worst rel err %.3g (tol %.0e) at %s, %.2f s", r.trials, r.checked,
             r.worst_relative_error, kGradTolerance, r.worst_location.c_str(), secs));
}

void criterion_properties() {
  const auto t0 = Clock::now();
  const std::vector<PropertyResult> results{
      check_non_influence(kPropertyInstances, 11),  check_monotonicity(kPropertyInstances, 12),
      check_demorgan(kPropertyInstances, 13),       check_double_negation(kPropertyInstances, 14),
      check_convex_bounds(kPropertyInstances, 15),  check_weight_scaling(kPropertyInstances, 16),
  };
  const double secs = seconds_since(t0);
  bool ok = secs < kPropertySeconds;
  std::string detail;
  for (const auto& r : results) {
    ok = ok && r.passed() && r.instances >= kPropertyInstances;
    detail += fmt("%s %zu/%zu worst %.3g; ", r.name.c_str(), r.instances - r.failures, r.instances, r.worst);
    if (!r.passed()) detail += "first failure: " + r.first_failure + "; ";
  }
  report(2, ok, detail + fmt("%.2f s", secs));
}

void criterion_sigma_limit() {
  const PropertyResult r = check_sigma_limit(kPropertyInstances, 21);
  report(3, r.passed() && r.instances >= kPropertyInstances,
         fmt("%zu instances, worst |weighted - classical| %.3g (tol %.0e)", r.instances, r.worst, r.tolerance) +
             (r.passed() ? "" : "; " + r.first_failure));
}

void criterion_classical_oracle() {
  Rng rng(31);
  RandomFormulaOptions o;
  o.max_depth = 3;
  o.allow_true = true;
  std::size_t mismatches = 0;
  std::string first;
  for (std::size_t i = 0; i < kOracleFormulas; ++i) {
    o.dimension = 1 + i % 4;
    const Formula phi = random_formula(rng, o);
    const auto s = random_signal(rng, o.dimension, horizon(phi) + 3);
    for (std::size_t k = 0; k < 4; ++k) {
      const double got = robustness_classical(s, phi, k);
      const double want = oracle::classical(s, phi, k);
      if (got != want) {
        if (mismatches++ == 0) first = print(phi) + fmt(" at k=%zu: %.17g vs %.17g", k, got, want);
      }
    }
  }
  report(4, mismatches == 0,
         fmt("%zu formulas x 4 offsets, %zu mismatches", kOracleFormulas, mismatches) + (first.empty() ? "" : "; " + first));
}

void criterion_synthetic() {
  const DataSplit data = split(synth_generate(50, 8, 0), 0.2, 0);
  const Formula structure =
      Formula::always({0, 7}, std::vector<double>(8, 1.0), Formula::predicate(std::vector<double>(2, 0.0), 0.0));
  TrainConfig cfg;
  cfg.epochs = 10;
  const auto t0 = Clock::now();
  const TrainResult r = train(data, structure, cfg);
  const double secs = seconds_since(t0);
  const double acc = accuracy(r.formula, data.test, cfg.sigma);
  report(5, acc == 1.0 && secs < kSyntheticSeconds,
         fmt("test accuracy %.4f on %zu windows, training %.3f s", acc, data.test.size(), secs));
}

// ---------------------------------------------------------------------------
// Occupancy

struct Occupancy {
  DataSplit data;
  TrainConfig cfg;
  Formula structure;
  TrainResult trained;
  double seconds = 0.0;
};

std::optional<std::vector<fs::path>> occupancy_files(std::string& why) {
  const char* dir = std::getenv("WSTL_DATA_DIR");
  if (dir == nullptr || *dir == '\0') {
    why = "WSTL_DATA_DIR is not set; occupancy data unavailable";
    return std::nullopt;
  }
  std::vector<fs::path> files;
  for (const char* name : {"datatraining.txt", "datatest.txt", "datatest2.txt"}) {
    if (fs::exists(fs::path(dir) / name)) files.push_back(fs::path(dir) / name);
  }
  if (files.empty()) {
    why = std::string("no occupancy files in ") + dir;
    return std::nullopt;
  }
  return files;
}

std::optional<Occupancy> train_occupancy(std::string& why) {
  const auto files = occupancy_files(why);
  if (!files) return std::nullopt;
  Occupancy o;
  const auto windows = window(load_occupancy_csvs(*files), kOccupancyWindow);
  o.data = split(windows, 0.2, 0);
  o.cfg.epochs = 10;
  o.cfg.sigma = Sigma(1.0);
  o.cfg.zeta = 1.0;
  const std::size_t l = windows.front().signal.features();
  o.structure = Formula::always({0, kOccupancyWindow - 1}, std::vector<double>(kOccupancyWindow, 1.0),
                                Formula::predicate(std::vector<double>(l, 0.0), 0.0));
  const auto t0 = Clock::now();
  o.trained = train(o.data, o.structure, o.cfg);
  o.seconds = seconds_since(t0);
  return o;
}

void criteria_occupancy() {
  std::string why;
  std::optional<Occupancy> occ;
  try {
    occ = train_occupancy(why);
  } catch (const std::exception& e) {
    why = std::string("exception: ") + e.what();
  }
  if (!occ) {
    for (int id = 6; id <= 9; ++id) report(id, false, why);
    return;
  }
  const Occupancy& o = *occ;
  const Sigma sigma = o.cfg.sigma;

  const ConfusionCounts cc = confusion(o.trained.formula, o.data.test, sigma);
  const Measures m = measures(cc);
  const double acc = m.accuracy.value_or(0.0);
  report(6, acc >= kOccupancyAccuracy && o.seconds < kOccupancySeconds,
         fmt("%zu train / %zu test windows, test accuracy %.4f (min %.3f), training %.3f s", o.data.train.size(),
             o.data.test.size(), acc, kOccupancyAccuracy, o.seconds));

  const double se = m.sensitivity.value_or(-1), sp = m.specificity.value_or(-1), ppv = m.ppv.value_or(-1),
               npv = m.npv.value_or(-1);
  report(7, se >= kMinSensitivity && sp >= kMinSpecificity && ppv >= kMinPpv && npv >= kMinNpv,
         fmt("sensitivity %.4f specificity %.4f ppv %.4f npv %.4f (tp %zu fp %zu tn %zu fn %zu)", se, sp, ppv, npv, cc.tp,
             cc.fp, cc.tn, cc.fn));

  guarded(8, [&] {
    std::vector<double> acc_by_sbar;
    std::string curve;
    bool monotone = true;
    for (std::size_t sbar = 1; sbar <= kOccupancyWindow; ++sbar) {
      const double a = accuracy(prune_top_sbar(o.trained.formula, sbar).formula, o.data.test, sigma);
      if (!acc_by_sbar.empty() && sbar >= 2 && a + kSbarMonotoneSlack < acc_by_sbar.back()) monotone = false;
      acc_by_sbar.push_back(a);
      curve += fmt("%zu:%.4f ", sbar, a);
    }
    const double a2 = acc_by_sbar[1], a8 = acc_by_sbar[7];
    report(8, a2 >= kSbar2Accuracy && a8 >= kSbar8Accuracy && monotone,
           fmt("sbar=2 %.4f (min %.3f), sbar=8 %.4f (min %.3f), non-decreasing within %.3f: %s; curve ", a2,
               kSbar2Accuracy, a8, kSbar8Accuracy, kSbarMonotoneSlack, monotone ? "yes" : "no") +
               curve);
  });

  guarded(9, [&] {
    // documented grid: lambda1 in {0.01, 0.1, 1} x lambda2 in {0.01, 0.1, 1}
    const double grid[] = {0.01, 0.1, 1.0};
    std::optional<std::pair<double, std::size_t>> best;  // accuracy, weights
    std::string best_at, tried;
    for (double l1 : grid) {
      for (double l2 : grid) {
        GatedOptions opts;
        opts.lambda1 = l1;
        opts.lambda2 = l2;
        try {
          const GatedResult r = train_gated(o.data, o.structure, o.cfg, opts);
          const std::size_t kept = nonzero_weight_count(r.formula);
          const double a = accuracy(r.formula, o.data.test, sigma);
          tried += fmt("(%g,%g):%zu/%.4f ", l1, l2, kept, a);
          if (kept <= kGateMaxWeights && (!best || a > best->first)) {
            best = {a, kept};
            best_at = fmt("lambda1=%g lambda2=%g", l1, l2);
          }
        } catch (const PruneError&) {
          tried += fmt("(%g,%g):all-closed ", l1, l2);
        }
      }
    }
    const bool ok = best && best->first >= kGateAccuracy;
    report(9, ok,
           (best ? fmt("best with <= %zu weights: %zu weights, accuracy %.4f (min %.3f) at ", kGateMaxWeights,
                       best->second, best->first, kGateAccuracy) +
                       best_at
                 : fmt("no grid point left <= %zu weights", kGateMaxWeights)) +
               "; grid " + tried);
  });
}

// ---------------------------------------------------------------------------

// Hand-evaluated two-level instances: inputs take one positive value p and one
// negative value n. For equal weights the softmin factors are e^{-p}, e^{-n}
// up to a common shift, so every contribution has a closed form.
struct HandCase {
  std::vector<double> r;
  double sigma;
  double expected;  // hand-computed f-bar
};

double hand_two_level(double p, std::size_t np, double n, std::size_t nn, double sigma) {
  // z = s r / sum s with s = e^{-r/sigma}/N (equal weights)
  const double ep = std::exp(-p / sigma), en = std::exp(-n / sigma);
  const double total = np * ep + nn * en;
  const double zp = ep * p / total, zn = en * n / total;
  const double wp = static_cast<double>(np) / (np + nn), wn = static_cast<double>(nn) / (np + nn);
  const double rho = (np * ep * p + nn * en * n) / total;
  return rho > 0 ? 1 + zn * (1 - wp) / (zp * wp) : 1 + zp * (1 - wn) / (zn * wn);
}

void criterion_fraction() {
  std::string detail;
  bool ok = true;
  const double from_bounds = fraction_from_bounds(-1.0, 2.0, 0.5, true);
  ok = ok && std::fabs(from_bounds - 0.5) <= kFractionTolerance;
  detail += fmt("bounds(-1, 2, 0.5) = %.12g; ", from_bounds);

  struct Instance {
    double p;
    std::size_t np;
    double n;
    std::size_t nn;
    double sigma;
  };
  const Instance cases[] = {{1, 2, -1, 2, 1.0}, {2, 3, -0.5, 1, 1.0}, {0.3, 1, -2, 3, 0.5},
                            {1.5, 4, -1, 4, 2.0}, {0.2, 5, -0.1, 1, 0.1}, {3, 1, -0.25, 2, 1.0}};
  double worst = 0.0;
  std::size_t flips = 0, checks = 0;
  for (const auto& c : cases) {
    std::vector<double> row;
    for (std::size_t i = 0; i < c.np; ++i) row.push_back(-c.p);  // predicate 0 - x
    for (std::size_t i = 0; i < c.nn; ++i) row.push_back(-c.n);
    const auto s = SignalMatrix::from_rows({row});
    const std::size_t len = row.size();
    const Formula phi = Formula::always({0, len - 1}, std::vector<double>(len, 1.0), Formula::predicate({1.0}, 0.0));
    const FractionAnalysis a = prunable_fraction(s, phi, 0, Sigma(c.sigma));
    const double hand = std::clamp(hand_two_level(c.p, c.np, c.n, c.nn, c.sigma), 0.0, 1.0);
    worst = std::max(worst, std::fabs(a.fraction - hand));

    // zero a mass strictly below f-bar * w_s on the side matching the sign
    const bool positive = a.robustness > 0;
    const std::size_t first = positive ? 0 : c.np, count = positive ? c.np : c.nn;
    for (double share : {0.25, 0.5, 0.9, 0.999}) {
      Formula cut = phi;
      cut.set_sparsified(true);
      // removing share * f-bar of each same-side weight removes share * f-bar * w_s in total
      for (std::size_t i = first; i < first + count; ++i) cut.weights()[i] = 1.0 - share * a.fraction;
      const double rho = robustness_weighted(s, cut, 0, Sigma(c.sigma));
      ++checks;
      if ((rho > 0) != positive) ++flips;
    }
  }
  ok = ok && worst <= kFractionTolerance && flips == 0;
  detail += fmt("%zu two-level instances, worst |f - hand| %.3g (tol %.0e), %zu/%zu sign flips below f-bar mass",
                std::size(cases), worst, kFractionTolerance, flips, checks);
  report(10, ok, detail);
}

void criterion_round_trip() {
  Rng rng(41);
  RandomFormulaOptions o;
  o.max_depth = 4;
  o.allow_true = true;
  o.coefficient_range = 100.0;
  std::size_t failed = 0;
  std::string first;
  for (std::size_t i = 0; i < kRoundTrips; ++i) {
    o.dimension = 1 + i % 5;
    const Formula phi = random_formula(rng, o);
    const std::string text = print(phi);
    try {
      if (!structurally_equal(phi, parse(text, o.dimension), kRoundTripTolerance)) {
        if (failed++ == 0) first = text;
      }
    } catch (const std::exception& e) {
      if (failed++ == 0) first = text + ": " + e.what();
    }
  }
  report(11, failed == 0,
         fmt("%zu formulas, %zu failed (rel tol %.0e)", kRoundTrips, failed, kRoundTripTolerance) +
             (first.empty() ? "" : "; first: " + first));
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "all";
  const bool core = mode == "all" || mode == "core";
  const bool occupancy = mode == "all" || mode == "occupancy";
  if (!core && !occupancy) {
    std::fprintf(stderr, "usage: %s [core|occupancy|all]\n", argv[0]);
    return 2;
  }
  if (core) {
    guarded(1, criterion_gradient);
    guarded(2, criterion_properties);
    guarded(3, criterion_sigma_limit);
    guarded(4, criterion_classical_oracle);
    guarded(5, criterion_synthetic);
  }
  if (occupancy) criteria_occupancy();
  if (core) {
    guarded(10, criterion_fraction);
    guarded(11, criterion_round_trip);
  }
  return failures == 0 ? 0 : 1;
}
