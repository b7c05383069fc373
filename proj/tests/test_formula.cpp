#include <gtest/gtest.h>

#include "wstl/formula.hpp"
#include "wstl/random.hpp"

using namespace wstl;

namespace {

Formula pred(std::size_t l, double c = 0.0) { return Formula::predicate(std::vector<double>(l, 1.0), c); }

bool has_message(const std::vector<Violation>& v, const std::string& needle) {
  for (const auto& x : v) {
    if (x.message.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(Horizon, Examples) {
  EXPECT_EQ(horizon(pred(1)), 1u);
  EXPECT_EQ(horizon(Formula::always({0, 15}, std::vector<double>(16, 1.0), pred(5))), 16u);
  const auto inner = Formula::always({0, 3}, std::vector<double>(4, 1.0), pred(1));
  EXPECT_EQ(horizon(Formula::eventually({1, 2}, {1.0, 1.0}, inner)), 6u);
  EXPECT_EQ(horizon(Formula::truth()), 1u);
}

TEST(Horizon, NegationIsTimeFree) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Formula phi = random_formula(rng, {});
    EXPECT_EQ(horizon(Formula::negation(phi)), horizon(phi));
  }
}

TEST(Horizon, BinaryTakesMax) {
  const auto a = Formula::always({0, 4}, std::vector<double>(5, 1.0), pred(1));
  EXPECT_EQ(horizon(Formula::conjunction(1, a, 1, pred(1))), 5u);
  EXPECT_EQ(horizon(Formula::disjunction(1, pred(1), 1, a)), 5u);
}

TEST(Validate, AcceptsWellFormed) {
  EXPECT_TRUE(validate(Formula::always({0, 3}, {1, 1, 1, 1}, pred(5)), 5).empty());
  EXPECT_TRUE(validate(Formula::conjunction(0.5, Formula::truth(), 0.5, Formula::truth()), 1).empty());
}

TEST(Validate, WeightLengthMismatch) {
  const auto v = validate(Formula::always({0, 3}, {1, 1, 1}, pred(1)), 1);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].message, "weight length 3 != interval length 4");
}

TEST(Validate, NonPositiveWeightUnlessSparsified) {
  Formula phi = Formula::conjunction(0.0, pred(1), 1.0, pred(1));
  EXPECT_TRUE(has_message(validate(phi, 1), "non-positive weight"));
  phi.set_sparsified(true);
  EXPECT_TRUE(validate(phi, 1).empty());
  Formula neg = Formula::conjunction(-1.0, pred(1), 1.0, pred(1));
  neg.set_sparsified(true);
  EXPECT_TRUE(has_message(validate(neg, 1), "non-positive weight"));
}

TEST(Validate, FullyPrunedOperator) {
  Formula phi = Formula::always({0, 1}, {0.0, 0.0}, pred(1));
  phi.set_sparsified(true);
  EXPECT_TRUE(has_message(validate(phi, 1), "fully pruned"));
}

TEST(Validate, DimensionMismatchAndEmptyInterval) {
  const auto v = validate(Formula::always({3, 1}, {1.0}, pred(2)), 5);
  EXPECT_TRUE(has_message(v, "predicate dimension 2 != signal dimension 5"));
  EXPECT_TRUE(has_message(v, "empty interval"));
}

TEST(Validate, ReportsAllViolations) {
  const auto bad = Formula::conjunction(0.0, pred(3), 1.0, Formula::always({0, 2}, {1.0}, pred(2)));
  const auto v = validate(bad, 2);
  EXPECT_GE(v.size(), 3u);
}

TEST(Params, Counts) {
  EXPECT_EQ(param_count(Formula::predicate({1, 2, 3, 4, 5}, 0)), 6u);
  EXPECT_EQ(param_count(Formula::always({0, 15}, std::vector<double>(16, 1.0), pred(5))), 22u);
  EXPECT_EQ(param_count(Formula::truth()), 0u);
}

TEST(Params, OrderIsPreorderPredicateThenOffsetWeightsThenGates) {
  Formula phi = Formula::conjunction(2.0, Formula::predicate({3.0, 4.0}, 5.0), 6.0,
                                     Formula::always({0, 1}, {7.0, 8.0}, Formula::predicate({9.0, 10.0}, 11.0)));
  const ParamView view = params(phi);
  ASSERT_EQ(view.size(), 10u);
  EXPECT_EQ(view.values(), (std::vector<double>{2, 6, 3, 4, 5, 7, 8, 9, 10, 11}));
  EXPECT_EQ(view[0].kind, ParamKind::OperatorWeight);
  EXPECT_EQ(view[2].kind, ParamKind::PredicateCoefficient);
  EXPECT_EQ(view[4].kind, ParamKind::PredicateOffset);
  EXPECT_EQ(view[4].path, (NodePath{0}));
  EXPECT_EQ(view[9].path, (NodePath{1, 0}));

  attach_gates(phi, 0.95);
  const ParamView gated = params(phi);
  ASSERT_EQ(gated.size(), 14u);
  EXPECT_EQ(gated[2].kind, ParamKind::Gate);
  EXPECT_EQ(gated[3].kind, ParamKind::Gate);
  EXPECT_EQ(gated[9].kind, ParamKind::Gate);
}

TEST(Params, WritesMutateTree) {
  Formula phi = Formula::always({0, 1}, {1.0, 1.0}, Formula::predicate({1.0}, 0.0));
  const ParamView view = params(phi);
  view[0].set(3.0);
  view[3].set(-2.0);
  EXPECT_EQ(phi.weights()[0], 3.0);
  EXPECT_EQ(phi.child(0).predicate().c, -2.0);
  view.assign(std::vector<double>{4, 5, 6, 7});
  EXPECT_EQ(param_values(phi), (std::vector<double>{4, 5, 6, 7}));
  EXPECT_THROW(view.assign(std::vector<double>{1}), std::invalid_argument);
}

TEST(Params, IdempotentAndStable) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    Formula phi = random_formula(rng, {});
    const ParamView a = params(phi);
    const ParamView b = params(phi);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
      EXPECT_EQ(a[j].slot, b[j].slot);
      EXPECT_EQ(a[j].path, b[j].path);
    }
    EXPECT_EQ(a.size(), param_count(phi));
  }
}

TEST(Formula, CopiesAreDeep) {
  Formula a = Formula::negation(pred(1, 2.0));
  Formula b = a;
  b.child(0).predicate().c = 7.0;
  EXPECT_EQ(a.child(0).predicate().c, 2.0);
}

TEST(Formula, StructuralEqualityTolerance) {
  const auto a = Formula::always({0, 1}, {1.0, 2.0}, Formula::predicate({1.0}, 5.0));
  auto b = a;
  b.weights()[1] = 2.0 * (1 + 1e-9);
  EXPECT_FALSE(structurally_equal(a, b));
  EXPECT_TRUE(structurally_equal(a, b, 1e-6));
  auto c = Formula::eventually({0, 1}, {1.0, 2.0}, Formula::predicate({1.0}, 5.0));
  EXPECT_FALSE(structurally_equal(a, c, 1.0));
}

TEST(Formula, AtFollowsPath) {
  const auto phi = Formula::conjunction(1, pred(1, 1.0), 1, Formula::negation(pred(1, 2.0)));
  EXPECT_EQ(phi.at({1, 0}).predicate().c, 2.0);
  EXPECT_EQ(path_to_string({1, 0}), "root/1/0");
}

TEST(RandomFormula, RespectsBudgetsAndValidates) {
  Rng rng(5);
  RandomFormulaOptions o;
  o.max_depth = 4;
  o.dimension = 3;
  o.max_horizon = 12;
  for (int i = 0; i < 500; ++i) {
    const Formula phi = random_formula(rng, o);
    EXPECT_LE(horizon(phi), 12u);
    EXPECT_TRUE(validate(phi, 3).empty());
  }
}
