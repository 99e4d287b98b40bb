#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "fairaudit/mitigation.hpp"

using namespace fairaudit;

namespace {

PredictionSet make_set(std::vector<int> y, std::vector<double> prob, std::vector<std::size_t> group) {
  PredictionSet p;
  p.y_true = std::move(y);
  p.y_prob = std::move(prob);
  p.y_pred = threshold_labels(p.y_prob);
  p.group_of = std::move(group);
  return p;
}

PredictionSet random_set(std::mt19937_64& rng, std::size_t n, std::size_t groups) {
  std::uniform_real_distribution<double> u;
  PredictionSet p;
  for (std::size_t i = 0; i < n; ++i) {
    p.group_of.push_back(i % groups);
    p.y_true.push_back(u(rng) < 0.4 + 0.1 * static_cast<double>(i % groups) ? 1 : 0);
    p.y_prob.push_back(std::clamp(0.3 * p.y_true.back() + 0.7 * u(rng), 0.0, 1.0));
  }
  p.y_pred = threshold_labels(p.y_prob);
  return p;
}

}  // namespace

// ------------------------------------------------------------------ reweigh

TEST(Reweigh, WorkedTable) {
  // P1 x3, P0 x1, U1 x1, U0 x3
  const std::vector<int> y{1, 1, 1, 0, 1, 0, 0, 0};
  const std::vector<std::size_t> g{0, 0, 0, 0, 1, 1, 1, 1};
  const auto r = reweigh(y, g, 2);
  EXPECT_NEAR(r.cell[0][1], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.cell[0][0], 2.0, 1e-15);
  EXPECT_NEAR(r.cell[1][1], 2.0, 1e-15);
  EXPECT_NEAR(r.cell[1][0], 2.0 / 3.0, 1e-15);
  EXPECT_TRUE(r.flags.empty());
}

TEST(Reweigh, IndependentTableGivesUnitWeights) {
  const std::vector<int> y{1, 0, 1, 0, 1, 0, 1, 0};
  const std::vector<std::size_t> g{0, 0, 0, 0, 1, 1, 1, 1};
  for (double w : reweigh(y, g, 2).weights) EXPECT_EQ(w, 1.0);
}

TEST(Reweigh, EmptyCellIsZeroAndFlagged) {
  const std::vector<int> y{1, 0, 0, 0};
  const std::vector<std::size_t> g{0, 0, 1, 1};
  const auto r = reweigh(y, g, 2);
  EXPECT_EQ(r.cell[1][1], 0.0);
  ASSERT_EQ(r.flags.size(), 1U);
}

TEST(Reweigh, EmptyTrainIsAnError) { EXPECT_THROW(reweigh(std::vector<int>{}, std::vector<std::size_t>{}, 2), DataError); }

// ---------------------------------------------------------------------- EOP

TEST(Eop, AlreadyEqualKeepsDefaults) {
  const auto val = make_set({1, 1, 0, 0, 1, 1, 0, 0}, {.9, .2, .7, .1, .8, .3, .6, .2}, {0, 0, 0, 0, 1, 1, 1, 1});
  const auto pol = eop_fit(val, 2);
  EXPECT_EQ(pol.thresholds, (std::vector<double>{0.5, 0.5}));
}

TEST(Eop, LoweredUnprivilegedThreshold) {
  // At P = 0.5: TPR_P = 1/2, FPR_P = 1/4. U reaches the same rates only at 0.30.
  const auto val = make_set({1, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0},
                            {.9, .2, .6, .2, .1, .05, .31, .1, .305, .295, .05, .01},
                            {0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1});
  const auto pol = eop_fit(val, 2);
  ASSERT_EQ(pol.thresholds.size(), 2U);
  EXPECT_EQ(pol.thresholds[0], 0.5);
  EXPECT_NEAR(pol.thresholds[1], 0.30, 1e-12);
  EXPECT_EQ(odds_gap(eop_apply(pol, val), 2), 0.0);
}

TEST(Eop, ApplyIsIdempotent) {
  std::mt19937_64 rng(1);
  const auto val = random_set(rng, 60, 2);
  const auto pol = eop_fit(val, 2);
  const auto once = eop_apply(pol, val);
  EXPECT_EQ(eop_apply(pol, once).y_pred, once.y_pred);
  EXPECT_EQ(once.y_prob, val.y_prob);
}

TEST(Eop, NeverWorseThanDefaults) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 40; ++t) {
    const std::size_t groups = 2 + t % 3;
    const auto val = random_set(rng, 30 + t, groups);
    const auto pol = eop_fit(val, groups);
    for (double th : pol.thresholds) EXPECT_TRUE(th >= 0 && th <= 1);
    EXPECT_LE(odds_gap(eop_apply(pol, val), groups), odds_gap(val, groups) + 1e-12);
  }
}

TEST(Eop, MissingGroupKeepsDefaultAndFlags) {
  const auto val = make_set({1, 0, 1, 0}, {.9, .2, .7, .4}, {0, 0, 1, 1});
  const auto pol = eop_fit(val, 3);
  EXPECT_EQ(pol.thresholds[2], 0.5);
  EXPECT_FALSE(pol.flags.empty());
}

// ---------------------------------------------------------------- NaiveBase

TEST(NaiveBase, WorkedThreshold) {
  const std::vector<double> prob{.9, .2, .7, .4, .1, .8};
  const std::vector<std::size_t> group{0, 0, 1, 1, 1, 1};
  // Privileged SR at 0.5 is 1/2; unprivileged [.7, .4, .1, .8] -> top 2 -> 0.7.
  const auto pol = naivebase_policy(prob, group);
  EXPECT_EQ(pol.privileged_sr, 0.5);
  EXPECT_EQ(pol.top_k, 2U);
  EXPECT_EQ(*pol.threshold, 0.7);
}

TEST(NaiveBase, ZeroRateSelectsNone) {
  const std::vector<double> prob{.1, .2, .7, .4};
  const std::vector<std::size_t> group{0, 0, 1, 1};
  const auto pol = naivebase_policy(prob, group);
  EXPECT_TRUE(pol.select_none());
  const auto out = naivebase_apply(pol, make_set({1, 0, 1, 1}, {.1, .2, .99, .7}, {0, 0, 1, 1}));
  EXPECT_EQ(out.y_pred[2], 0);
  EXPECT_EQ(out.y_pred[3], 0);
}

TEST(NaiveBase, FullRateUsesMinimum) {
  const std::vector<double> prob{.6, .9, .7, .4, .05};
  const std::vector<std::size_t> group{0, 0, 1, 1, 1};
  EXPECT_EQ(*naivebase_policy(prob, group).threshold, 0.05);
}

TEST(NaiveBase, ApplyUsesInclusiveThreshold) {
  NaiveBasePolicy pol;
  pol.threshold = 0.7;
  const auto out = naivebase_apply(pol, make_set({1, 1, 0, 1}, {.8, .7, .6, .4}, {1, 1, 1, 0}));
  EXPECT_EQ(out.y_pred, (std::vector<int>{1, 1, 0, 0}));
}

TEST(NaiveBase, PrivilegedPredictionsUntouched) {
  std::mt19937_64 rng(3);
  const auto p = random_set(rng, 80, 2);
  const auto pol = naivebase_policy(p.y_prob, p.group_of);
  const auto out = naivebase_apply(pol, p);
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p.group_of[i] == kPrivileged) {
      EXPECT_EQ(out.y_pred[i], p.y_pred[i]);
    }
  EXPECT_EQ(out.y_prob, p.y_prob);
}

TEST(NaiveBase, ValidationRatesMatch) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    const auto val = random_set(rng, 20 + 7 * t, 2);
    const auto pol = naivebase_policy(val.y_prob, val.group_of);
    const auto out = naivebase_apply(pol, val);
    const auto rates = group_rates(out, 2);
    EXPECT_LE(std::abs(*rates.groups[1].sr - pol.privileged_sr), 1.0 / pol.unprivileged_validation_size + 1e-12);
  }
}

TEST(NaiveBase, InvariantUnderIncreasingTransforms) {
  // Transforms that keep 0.5 fixed: scale the logit by a positive factor.
  auto squash = [](double p, double a) { return 1.0 / (1.0 + std::pow((1.0 - p) / p, a)); };
  std::mt19937_64 rng(5);
  for (double a : {0.3, 2.0, 5.0}) {
    const auto val = random_set(rng, 60, 2);
    auto test = random_set(rng, 40, 2);
    auto tval = val, ttest = test;
    for (auto& p : tval.y_prob) p = squash(std::clamp(p, 1e-6, 1 - 1e-6), a);
    for (auto& p : ttest.y_prob) p = squash(std::clamp(p, 1e-6, 1 - 1e-6), a);
    for (auto& p : test.y_prob) p = std::clamp(p, 1e-6, 1 - 1e-6);
    auto cval = val;
    for (auto& p : cval.y_prob) p = std::clamp(p, 1e-6, 1 - 1e-6);
    const auto base = naivebase_apply(naivebase_policy(cval.y_prob, cval.group_of), test);
    const auto moved = naivebase_apply(naivebase_policy(tval.y_prob, tval.group_of), ttest);
    EXPECT_EQ(base.y_pred, moved.y_pred);
  }
}

TEST(NaiveBase, MissingGroupIsAnError) {
  const std::vector<double> prob{.6, .9};
  const std::vector<std::size_t> group{0, 0};
  EXPECT_THROW(naivebase_policy(prob, group), DataError);
}

TEST(NaiveBase, FitIsSeededAndDisjoint) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z;
  FeatureMatrix X;
  X.values.resize(200, 3);
  std::vector<int> y(200);
  std::vector<std::size_t> g(200);
  for (Eigen::Index i = 0; i < 200; ++i) {
    g[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i % 2);
    X.values(i, 0) = z(rng);
    X.values(i, 1) = z(rng);
    X.values(i, 2) = static_cast<double>(1 - i % 2);
    y[static_cast<std::size_t>(i)] = X.values(i, 0) + 0.5 * X.values(i, 2) > 0.2 ? 1 : 0;
  }
  const auto a = naivebase_fit(X, y, g, {}, 17), b = naivebase_fit(X, y, g, {}, 17);
  EXPECT_EQ(a.validation_rows, b.validation_rows);
  EXPECT_EQ(a.policy.threshold, b.policy.threshold);
  EXPECT_EQ(a.validation_rows.size(), 40U);
  EXPECT_EQ(a.fit_rows.size(), 160U);
}

// ------------------------------------------------------------- selective

TEST(Selective, UnprivilegedScope) {
  std::mt19937_64 rng(7);
  const auto base = random_set(rng, 50, 2);
  auto mitigated = base;
  for (auto& v : mitigated.y_pred) v = 1 - v;
  for (auto& p : mitigated.y_prob) p = 1 - p;
  const auto out = selective_apply(base, mitigated, {{1}});
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto& src = base.group_of[i] == 1 ? mitigated : base;
    EXPECT_EQ(out.y_pred[i], src.y_pred[i]);
    EXPECT_EQ(std::memcmp(&out.y_prob[i], &src.y_prob[i], sizeof(double)), 0);
  }
}

TEST(Selective, FullScopeIsMitigated) {
  std::mt19937_64 rng(8);
  const auto base = random_set(rng, 40, 4);
  auto mitigated = base;
  for (auto& v : mitigated.y_pred) v = 1 - v;
  EXPECT_EQ(selective_apply(base, mitigated, {{0, 1, 2, 3}}), mitigated);
}

TEST(Selective, LowerGroupsOfFour) {
  std::mt19937_64 rng(9);
  const auto base = random_set(rng, 40, 4);
  auto mitigated = base;
  for (auto& v : mitigated.y_pred) v = 1 - v;
  const auto out = selective_apply(base, mitigated, {{2, 3}});
  for (std::size_t i = 0; i < base.size(); ++i)
    if (base.group_of[i] < 2) {
      EXPECT_EQ(out.y_pred[i], base.y_pred[i]);
    }
}

TEST(Selective, Errors) {
  std::mt19937_64 rng(10);
  const auto base = random_set(rng, 10, 2);
  auto shorter = base;
  shorter.y_true.pop_back();
  EXPECT_THROW(selective_apply(base, shorter, {{1}}), DataError);
  EXPECT_THROW(selective_apply(base, base, {}), DataError);
}

// ------------------------------------------------ counterfactual ensemble

TEST(Ensemble, BlendArithmetic) {
  const std::vector<double> f{0.8}, cf{0.4};
  EXPECT_NEAR(blend(f, cf, 0.5)[0], 0.6, 1e-15);
  EXPECT_EQ(blend(f, cf, 1.0)[0], 0.8);
}

TEST(Ensemble, LambdaSelectorFindsUniqueMidpoint) {
  // Invariant rows: per group 50 correct positives (p = .9) and 50 correct negatives (p = .1).
  // Swing rows: a privileged positive and an unprivileged negative whose
  // factual and counterfactual scores disagree; only lambda = 0.5 balances SR.
  std::vector<double> f, cf;
  std::vector<int> y;
  std::vector<std::size_t> g;
  for (std::size_t grp = 0; grp < 2; ++grp)
    for (int i = 0; i < 100; ++i) {
      const int label = i < 50 ? 1 : 0;
      f.push_back(label ? 0.9 : 0.1);
      cf.push_back(f.back());
      y.push_back(label);
      g.push_back(grp);
    }
  f.push_back(0.75), cf.push_back(0.25), y.push_back(1), g.push_back(0);
  f.push_back(0.25), cf.push_back(0.75), y.push_back(0), g.push_back(1);
  const auto c = select_lambda(f, cf, y, g, 2);
  EXPECT_EQ(c.lambda, 0.5);
  EXPECT_EQ(c.spd, 0.0);
}

TEST(Ensemble, LambdaOneReproducesFactual) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  FeatureMatrix X;
  X.values.resize(150, 3);
  std::vector<int> y(150);
  std::vector<std::size_t> g(150);
  for (Eigen::Index i = 0; i < 150; ++i) {
    X.values(i, 0) = z(rng);
    X.values(i, 1) = z(rng);
    X.values(i, 2) = static_cast<double>(i % 3 != 0);
    g[static_cast<std::size_t>(i)] = X.values(i, 2) == 1.0 ? 0 : 1;
    y[static_cast<std::size_t>(i)] = X.values(i, 0) + X.values(i, 2) > 0.5 ? 1 : 0;
  }
  auto m = counterfactual_ensemble_fit(X, y, g, 2, {2}, {}, 3);
  m.choice.lambda = 1.0;
  EXPECT_EQ(counterfactual_ensemble_proba(m, X), predict_proba(m.factual, X));
  // Deterministic given the seed.
  const auto again = counterfactual_ensemble_fit(X, y, g, 2, {2}, {}, 3);
  EXPECT_EQ(again.to_json(), counterfactual_ensemble_fit(X, y, g, 2, {2}, {}, 3).to_json());
}

TEST(Ensemble, ConstantSensitiveColumnForcesFactual) {
  FeatureMatrix X;
  X.values.resize(20, 2);
  std::vector<int> y(20);
  std::vector<std::size_t> g(20, 0);
  for (Eigen::Index i = 0; i < 20; ++i) {
    X.values(i, 0) = static_cast<double>(i) / 10.0 - 1.0;
    X.values(i, 1) = 1.0;
    y[static_cast<std::size_t>(i)] = i >= 10 ? 1 : 0;
  }
  const auto m = counterfactual_ensemble_fit(X, y, g, 2, {1}, {}, 0);
  EXPECT_EQ(m.lambda(), 1.0);
  EXPECT_FALSE(m.flags.empty());
}

TEST(Ensemble, CounterfactualFlipsIndicators) {
  FeatureMatrix X;
  X.values.resize(2, 2);
  X.values << 0.3, 1.0, -0.2, 0.0;
  const auto cf = counterfactual(X, std::vector<std::size_t>{1});
  EXPECT_EQ(cf.values(0, 1), 0.0);
  EXPECT_EQ(cf.values(1, 1), 1.0);
  EXPECT_EQ(cf.values(0, 0), 0.3);
}
