#include <gtest/gtest.h>

#include "json.hpp"
#include "wstl/metrics.hpp"

using namespace wstl;

TEST(Measures, Example) {
  const ConfusionCounts c{2, 1, 3, 0};
  const Measures m = measures(c);
  EXPECT_DOUBLE_EQ(*m.accuracy, 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(*m.sensitivity, 1.0);
  EXPECT_DOUBLE_EQ(*m.specificity, 0.75);
  EXPECT_NEAR(*m.ppv, 0.6667, 5e-5);
  EXPECT_DOUBLE_EQ(*m.npv, 1.0);
}

TEST(Measures, UndefinedWhenDenominatorIsZero) {
  const ConfusionCounts c{0, 0, 4, 1};
  const Measures m = measures(c);
  EXPECT_FALSE(m.ppv.has_value());
  EXPECT_FALSE(m.sensitivity.has_value() && *m.sensitivity != 0.0);
  EXPECT_TRUE(m.specificity.has_value());
  const std::string table = format_table(c, m);
  EXPECT_NE(table.find("undefined"), std::string::npos);
  const auto j = nlohmann::json::parse(format_json(c, m));
  EXPECT_TRUE(j["ppv"].is_null());
  EXPECT_EQ(j["tn"], 4);
  EXPECT_FALSE(measures(ConfusionCounts{}).accuracy.has_value());
}

TEST(Classify, BoundaryIsPositiveAndNegationFlips) {
  const Formula phi = Formula::predicate({1.0}, 5.0);
  const auto at = SignalMatrix::from_rows({{5.0}});
  EXPECT_EQ(classify(phi, at, Sigma(1)), Label::Positive);
  const auto off = SignalMatrix::from_rows({{4.0}});
  EXPECT_EQ(classify(phi, off, Sigma(1)), Label::Positive);
  EXPECT_EQ(classify(Formula::negation(phi), off, Sigma(1)), Label::Negative);
}

TEST(Confusion, CountsWindows) {
  const Formula phi = Formula::predicate({1.0}, 0.0);
  std::vector<LabeledWindow> w{
      {SignalMatrix::from_rows({{-1.0}}), Label::Positive},  // tp
      {SignalMatrix::from_rows({{-1.0}}), Label::Negative},  // fp
      {SignalMatrix::from_rows({{1.0}}), Label::Negative},   // tn
      {SignalMatrix::from_rows({{1.0}}), Label::Positive},   // fn
      {SignalMatrix::from_rows({{2.0}}), Label::Positive},   // fn
  };
  EXPECT_EQ(confusion(phi, w, Sigma(1)), (ConfusionCounts{1, 1, 1, 2}));
}

TEST(Table, Layout) {
  const std::string t = format_table(ConfusionCounts{2, 1, 3, 0}, measures(ConfusionCounts{2, 1, 3, 0}));
  EXPECT_NE(t.find("accuracy"), std::string::npos);
  EXPECT_NE(t.find("0.8333"), std::string::npos);
  EXPECT_NE(t.find("0.6667"), std::string::npos);
}
