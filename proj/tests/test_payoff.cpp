#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "drunkgames/drunk_game.hpp"
#include "drunkgames/payoff.hpp"
#include "oracles.hpp"

using namespace drunk;

TEST(Classify, Quadrants) {
  EXPECT_EQ(classify_game({1, -0.5, 1.5, 0}).quadrant, Quadrant::PD);
  EXPECT_EQ(classify_game({1, 0.5, 0.5, 0}).quadrant, Quadrant::HG);
  EXPECT_EQ(classify_game({1, 0.5, 2, 0}).quadrant, Quadrant::SD);
  EXPECT_EQ(classify_game({1, -0.5, 0.5, 0}).quadrant, Quadrant::SH);
}

TEST(Classify, BoundaryCarriesEqualities) {
  const GameClass a = classify_game(PayoffMatrix::standard(0.0, 1.5));
  EXPECT_EQ(a.quadrant, Quadrant::Boundary);
  EXPECT_TRUE(a.s_equals_p);
  EXPECT_FALSE(a.t_equals_r);
  const GameClass b = classify_game(PayoffMatrix::standard(0.0, 1.0));
  EXPECT_TRUE(b.s_equals_p && b.t_equals_r);
  EXPECT_EQ(b.label(), "Boundary(T=R,S=P)");
}

TEST(Classify, NonFiniteRejected) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    classify_game({1, nan, 1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_matrix);
  }
}

TEST(FearGreed, DirectSubstitution) {
  auto pd = fear_greed(PayoffMatrix::standard(-1, 2));
  EXPECT_EQ(pd.fear, 1.0);
  EXPECT_EQ(pd.greed, 1.0);
  auto hg = fear_greed(PayoffMatrix::standard(0.5, 0.5));
  EXPECT_EQ(hg.fear, -0.5);
  EXPECT_EQ(hg.greed, -0.5);
  auto sd = fear_greed(PayoffMatrix::standard(0.5, 2));
  EXPECT_EQ(sd.fear, -0.5);
  EXPECT_EQ(sd.greed, 1.0);
}

TEST(Incentive, Values) {
  EXPECT_DOUBLE_EQ(incentive_to_defect(PayoffMatrix::standard(-1, 2), 0.5), 1.0);
  for (double x : {0.0, 0.3, 1.0}) {
    EXPECT_DOUBLE_EQ(incentive_to_defect(PayoffMatrix::standard(0.5, 0.5), x), -0.5);
  }
  EXPECT_DOUBLE_EQ(incentive_to_defect(PayoffMatrix::standard(-0.5, 0.5), 0.5), 0.0);
}

TEST(Incentive, DomainError) {
  try {
    incentive_to_defect(PayoffMatrix::standard(-1, 2), 1.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::domain);
  }
}

TEST(SingleGame, Snowdrift) {
  const auto eq = single_game_fixed_points(PayoffMatrix::standard(0.5, 2));
  ASSERT_EQ(eq.size(), 3u);
  EXPECT_EQ(eq[0].stability, Stability::unstable);
  EXPECT_NEAR(eq[1].x, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(eq[1].stability, Stability::stable);
  EXPECT_EQ(eq[2].stability, Stability::unstable);
}

// x* = S / (S + T - 1) from equal expected payoffs; integrating the scalar
// replicator equation from both sides lands there.
TEST(SingleGame, SnowdriftRootByIntegration) {
  const PayoffMatrix m = PayoffMatrix::standard(0.5, 2);
  const double x_star = 0.5 / (0.5 + 2 - 1);
  for (double x : {0.25, 0.75}) {
    for (int i = 0; i < 20000; ++i) {
      const double pc = x * m.R + (1 - x) * m.S;
      const double pd = x * m.T + (1 - x) * m.P;
      x += 0.01 * x * (1 - x) * (pc - pd);
    }
    EXPECT_NEAR(x, x_star, 1e-9);
  }
}

TEST(SingleGame, PrisonersDilemmaAndStagHunt) {
  const auto pd = single_game_fixed_points(PayoffMatrix::standard(-1, 2));
  ASSERT_EQ(pd.size(), 2u);
  EXPECT_EQ(pd[0].stability, Stability::stable);
  EXPECT_EQ(pd[1].stability, Stability::unstable);
  const auto sh = single_game_fixed_points(PayoffMatrix::standard(-0.5, 0.5));
  ASSERT_EQ(sh.size(), 3u);
  EXPECT_EQ(sh[0].stability, Stability::stable);
  EXPECT_EQ(sh[1].x, 0.5);
  EXPECT_EQ(sh[1].stability, Stability::unstable);
  EXPECT_EQ(sh[2].stability, Stability::stable);
}

TEST(SingleGame, DegenerateRejected) {
  try {
    single_game_fixed_points(PayoffMatrix::standard(0.0, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_game);
  }
}

TEST(Presets, PayoffsAndClasses) {
  const DrunkGame pub = preset("pub_dilemma");
  EXPECT_EQ(classify_game(pub.g1).quadrant, Quadrant::PD);
  EXPECT_EQ(classify_game(pub.g2).quadrant, Quadrant::HG);
  const DrunkGame dp = preset("drunk_prisoner", {{"s", 0.5}});
  EXPECT_EQ(dp.g1, PayoffMatrix::standard(0.5, 0.5));
  EXPECT_EQ(dp.g2, PayoffMatrix::standard(-1, 2));
  const DrunkGame b = preset("battle", {{"s1", 0.25}});
  EXPECT_EQ(b.g1, PayoffMatrix::standard(0.25, 2));
  EXPECT_EQ(b.g2, PayoffMatrix::standard(-0.5, 0.5));
  EXPECT_EQ(b.kappa, 1.0);
  EXPECT_EQ(b.q, QPoly::linear(0.5));
}

TEST(Presets, Errors) {
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io;
  };
  EXPECT_EQ(code_of([] { preset("tavern"); }), ErrorCode::unknown_preset);
  EXPECT_EQ(code_of([] { preset("drunk_prisoner", {{"s", 1.5}}); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(code_of([] { preset("battle", {{"s1", -0.1}}); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(code_of([] { preset("drunk_prisoner"); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(code_of([] { preset("pub_dilemma", {{"s", 0.1}}); }), ErrorCode::invalid_parameter);
}

// Open interval: at the range ends one payoff pair coincides and the
// classification becomes a boundary.
TEST(PresetProperty, QuadrantsOverParameterRange) {
  oracle::Gen gen(11);
  for (int i = 0; i < 500; ++i) {
    const double s = gen.range(1e-6, 1.0 - 1e-6);
    const DrunkGame dp = presets::drunk_prisoner(s);
    EXPECT_EQ(classify_game(dp.g1).quadrant, Quadrant::HG);
    EXPECT_EQ(classify_game(dp.g2).quadrant, Quadrant::PD);
    const DrunkGame b = presets::battle(s);
    EXPECT_EQ(classify_game(b.g1).quadrant, Quadrant::SD);
    EXPECT_EQ(classify_game(b.g2).quadrant, Quadrant::SH);
  }
}

TEST(IncentiveProperty, EndpointsAndRoots) {
  oracle::Gen gen(12);
  for (int i = 0; i < 2000; ++i) {
    const PayoffMatrix m = gen.general_matrix();
    const FearGreed fg = fear_greed(m);
    EXPECT_EQ(incentive_to_defect(m, 0.0), fg.fear);
    EXPECT_EQ(incentive_to_defect(m, 1.0), fg.greed);
    EXPECT_EQ(fg.fear + m.S, m.P);
    EXPECT_EQ(fg.greed + m.R, m.T);
    if (auto r = interior_root(fg)) {
      EXPECT_GT(*r, 0.0);
      EXPECT_LT(*r, 1.0);
      EXPECT_LT(std::abs(incentive_to_defect(m, *r)), 1e-10);
    }
  }
}

// Stability against the sign of d/dx of xdot = -x (1 - x) h(x).
TEST(SingleGameProperty, StabilityMatchesNumericDerivative) {
  oracle::Gen gen(13);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const PayoffMatrix m = gen.standard_matrix();
    const FearGreed fg = fear_greed(m);
    auto xdot = [&](double x) { return -x * (1 - x) * ((1 - x) * fg.fear + x * fg.greed); };
    for (const auto& eq : single_game_fixed_points(m)) {
      const double h = 1e-6;
      double slope;
      if (eq.x == 0.0) slope = (xdot(h) - xdot(0)) / h;
      else if (eq.x == 1.0) slope = (xdot(1) - xdot(1 - h)) / h;
      else slope = (xdot(eq.x + h) - xdot(eq.x - h)) / (2 * h);
      if (std::abs(slope) < 1e-6) continue;
      ++checked;
      EXPECT_EQ(eq.stability == Stability::stable, slope < 0) << m.S << " " << m.T << " x=" << eq.x;
    }
  }
  EXPECT_GT(checked, 4000);
}
