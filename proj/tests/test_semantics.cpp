#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "oracles.hpp"
#include "wstl/random.hpp"
#include "wstl/semantics.hpp"

using namespace wstl;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SignalMatrix row(std::vector<double> v) { return SignalMatrix::from_rows({std::move(v)}); }

Formula pred1(double c) { return Formula::predicate({1.0}, c); }

}  // namespace

TEST(Softmin, EqualValues) {
  for (double sigma : {0.01, 1.0, 100.0}) {
    EXPECT_DOUBLE_EQ(softmin_aggregate(std::vector<double>{1, 1}, std::vector<double>{5, 5}, Sigma(sigma)), 5.0);
  }
}

TEST(Softmin, ZeroWeightIsIgnored) {
  EXPECT_EQ(softmin_aggregate(std::vector<double>{0, 1}, std::vector<double>{-100, 2}, Sigma(1)), 2.0);
}

TEST(Softmin, HandValue) {
  const double v = softmin_aggregate(std::vector<double>{1, 1}, std::vector<double>{0, 1}, Sigma(1));
  EXPECT_NEAR(v, 0.268941, 5e-7);
  EXPECT_NEAR(v, static_cast<double>(oracle::softmin({1, 1}, {0, 1}, 1.0)), 1e-15);
}

TEST(Softmin, MatchesLiteralOracle) {
  Rng rng(7);
  std::uniform_real_distribution<double> r(-5, 5), w(0.1, 3), len(1, 7);
  for (int i = 0; i < 2000; ++i) {
    const auto n = static_cast<std::size_t>(len(rng));
    std::vector<double> ws(n), rs(n);
    for (std::size_t j = 0; j < n; ++j) {
      ws[j] = w(rng);
      rs[j] = r(rng);
    }
    const double sigma = i % 2 ? 1.0 : 0.5;
    const double got = softmin_aggregate(ws, rs, Sigma(sigma));
    EXPECT_NEAR(got, static_cast<double>(oracle::softmin(ws, rs, sigma)), 1e-12 * (1 + std::fabs(got)));
  }
}

TEST(Softmin, ShiftKeepsLargeMagnitudesFinite) {
  const double v = softmin_aggregate(std::vector<double>{1, 1}, std::vector<double>{-1000, -999}, Sigma(1));
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, -1000 + 0.268941, 1e-6);
  EXPECT_TRUE(std::isfinite(softmin_aggregate(std::vector<double>{1, 1}, std::vector<double>{1e6, -1e6}, Sigma(1e-3))));
}

TEST(Softmin, Errors) {
  EXPECT_THROW(softmin_aggregate(std::vector<double>{0, 0}, std::vector<double>{1, 2}, Sigma(1)), EvaluationError);
  EXPECT_THROW(softmin_aggregate(std::vector<double>{1}, std::vector<double>{NAN}, Sigma(1)), EvaluationError);
  EXPECT_THROW(softmin_aggregate(std::vector<double>{1, 1}, std::vector<double>{1}, Sigma(1)), EvaluationError);
  EXPECT_THROW(Sigma(0.0), std::invalid_argument);
  EXPECT_THROW(Sigma(-1.0), std::invalid_argument);
}

TEST(Softmin, InfiniteInputs) {
  // TRUE evaluates to +inf: it never constrains a conjunction
  EXPECT_EQ(softmin_aggregate(std::vector<double>{1, 1}, std::vector<double>{kInf, 3}, Sigma(1)), 3.0);
  EXPECT_EQ(softmin_aggregate(std::vector<double>{1, 1}, std::vector<double>{kInf, kInf}, Sigma(1)), kInf);
  EXPECT_EQ(softmin_aggregate(std::vector<double>{1, 1}, std::vector<double>{-kInf, 3}, Sigma(1)), -kInf);
}

TEST(Classical, Examples) {
  EXPECT_EQ(robustness_classical(row({3}), pred1(5)), 2.0);
  EXPECT_EQ(robustness_classical(row({3, 4, 6}), Formula::always({0, 2}, {1, 1, 1}, pred1(5))), -1.0);
  EXPECT_EQ(robustness_classical(row({3}), Formula::negation(pred1(5))), -2.0);
  EXPECT_EQ(robustness_classical(row({3, 4, 6}), Formula::eventually({0, 2}, {1, 1, 1}, pred1(5))), 2.0);
  EXPECT_EQ(robustness_classical(row({3, 4, 6}), Formula::always({0, 1}, {1, 1}, pred1(5)), 1), -1.0);
}

TEST(Classical, IgnoresWeights) {
  const auto a = Formula::always({0, 2}, {1, 1, 1}, pred1(5));
  const auto b = Formula::always({0, 2}, {0.1, 7, 3}, pred1(5));
  EXPECT_EQ(robustness_classical(row({3, 4, 6}), a), robustness_classical(row({3, 4, 6}), b));
}

TEST(Classical, InsufficientLength) {
  const auto phi = Formula::always({0, 2}, {1, 1, 1}, pred1(5));
  try {
    robustness_classical(row({1, 2}), phi);
    FAIL();
  } catch (const EvaluationError& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient signal length"), std::string::npos);
  }
  EXPECT_THROW(robustness_weighted(row({1, 2, 3}), phi, 1, Sigma(1)), EvaluationError);
}

TEST(Classical, DimensionMismatch) {
  EXPECT_THROW(robustness_classical(SignalMatrix(2, 1), pred1(0)), EvaluationError);
}

TEST(Weighted, Examples) {
  const SignalMatrix s = SignalMatrix::from_rows({{0.0}, {1.0}});
  // child values (0, 1): predicates c - x
  const auto p1 = Formula::predicate({1.0, 0.0}, 0.0);
  const auto p2 = Formula::predicate({0.0, -1.0}, 0.0);
  const double v = robustness_weighted(s, Formula::disjunction(1, p1, 1, p2), 0, Sigma(1));
  EXPECT_NEAR(v, 0.731059, 5e-7);
  EXPECT_NEAR(v, -static_cast<double>(oracle::softmin({1, 1}, {0, -1}, 1.0)), 1e-15);

  EXPECT_EQ(robustness_weighted(row({0, 0}), Formula::always({0, 1}, {1, 1}, pred1(5)), 0, Sigma(1)), 5.0);

  Formula ev = Formula::eventually({0, 1}, {0, 1}, pred1(0));
  ev.set_sparsified(true);
  EXPECT_EQ(robustness_weighted(row({-10, 3}), ev, 0, Sigma(1)), -3.0);
}

TEST(Weighted, TrueIsNeutralInConjunction) {
  const auto phi = Formula::conjunction(1, Formula::truth(), 2, pred1(5));
  EXPECT_EQ(robustness_weighted(row({3}), phi, 0, Sigma(1)), 2.0);
  EXPECT_EQ(robustness_weighted(row({3}), Formula::negation(Formula::truth()), 0, Sigma(1)), -kInf);
}

TEST(Weighted, SingleWeightTemporalIsIdentity) {
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const SignalMatrix s = random_signal(rng, 1, 4);
    const auto phi = Formula::always({2, 2}, {3.0}, pred1(0.5));
    EXPECT_EQ(robustness_weighted(s, phi, 1, Sigma(1)), 0.5 - s(0, 3));
  }
}

TEST(Weighted, EvaluationAtOffset) {
  const auto phi = Formula::always({0, 1}, {1, 1}, pred1(0));
  const SignalMatrix s = row({9, -1, -2});
  EXPECT_NEAR(robustness_weighted(s, phi, 1, Sigma(1)), static_cast<double>(oracle::softmin({1, 1}, {1, 2}, 1.0)),
              1e-15);
}

TEST(Weighted, AgreesWithClassicalOnSingletonOperators) {
  Rng rng(21);
  RandomFormulaOptions o;
  o.max_interval_length = 1;
  for (int i = 0; i < 200; ++i) {
    Formula phi = random_formula(rng, o);
    const SignalMatrix s = random_signal(rng, o.dimension, horizon(phi));
    bool only_temporal = true;
    std::function<void(const Formula&)> scan = [&](const Formula& f) {
      if (f.op() == Op::And || f.op() == Op::Or) only_temporal = false;
      for (const auto& c : f.children()) scan(c);
    };
    scan(phi);
    if (!only_temporal) continue;
    EXPECT_EQ(robustness_weighted(s, phi, 0, Sigma(1)), robustness_classical(s, phi));
  }
}

TEST(BooleanSat, BoundaryCountsAsSatisfied) {
  EXPECT_EQ(boolean_sat(row({3}), pred1(5)), Satisfaction::Satisfied);
  EXPECT_EQ(boolean_sat(row({7}), pred1(5)), Satisfaction::Violated);
  EXPECT_EQ(boolean_sat(row({5}), pred1(5)), Satisfaction::Satisfied);
}

TEST(SignalMatrix, Layout) {
  const SignalMatrix s = SignalMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(s.features(), 2u);
  EXPECT_EQ(s.steps(), 3u);
  EXPECT_EQ(s(1, 2), 6.0);
  EXPECT_EQ(s.row(0)[1], 2.0);
  EXPECT_TRUE(s.finite());
  EXPECT_THROW(SignalMatrix::from_rows({{1, 2}, {3}}), std::invalid_argument);
}
