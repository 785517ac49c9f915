//------------------------------------------------------------------------------
//
//   Copyright 2026 The SFL Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sfl/scheduler.hpp"

namespace {

const auto kInf = sfl::NormExponent::infinity();

double peak(const sfl::Vector &x, const sfl::Vector &g)
{
  double p = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    p = std::max(p, x[i] + g[i]);
  }
  return p;
}

sfl::ScenarioConfig scenario(std::size_t m, std::vector<double> energies, sfl::Vector d = {6, 0.1})
{
  sfl::ScenarioConfig s;
  for (std::size_t i = 0; i < m; ++i)
  {
    sfl::ClientParams c;
    c.prices.d = d;
    c.energy = energies[i];
    c.p = sfl::NormExponent(1.0);
    s.clients.push_back(c);
  }
  s.p = kInf;
  return s;
}

class QuietWarnings : public ::testing::Test
{
protected:
  void SetUp() override { previous_ = sfl::set_warning_sink([](std::string_view) {}); }
  void TearDown() override { sfl::set_warning_sink(previous_); }

  std::function<void(std::string_view)> previous_;
};

TEST(Waterfill, Examples)
{
  EXPECT_EQ(sfl::waterfill(sfl::Vector{0, 0}, 2.0).x, (sfl::Vector{1, 1}));
  const auto r = sfl::waterfill(sfl::Vector{1, 3}, 2.0);
  EXPECT_EQ(r.x, (sfl::Vector{2, 0}));
  EXPECT_EQ(r.level, 3.0);
  EXPECT_EQ(sfl::waterfill(sfl::Vector{2, 2, 2}, 3.0).x, (sfl::Vector{1, 1, 1}));
  EXPECT_THROW(sfl::waterfill(sfl::Vector{1, 1}, -1.0), sfl::ParameterError);
}

TEST(Waterfill, FrozenExampleAgreesWithSegmentOracle)
{
  const sfl::Vector g{1, 3};
  const auto        oracle = sfl::test::segment_argmin(2.0, 1e-4, [&](const sfl::Vector &x) { return peak(x, g); });
  EXPECT_NEAR(oracle[0], 2.0, 1e-4);
  EXPECT_NEAR(oracle[1], 0.0, 1e-4);
}

TEST(Waterfill, ComplementarityAndScaleEquivariance)
{
  std::mt19937_64                        gen(12);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::uniform_real_distribution<double> ue(0.0, 6.0);
  for (int trial = 0; trial < 500; ++trial)
  {
    sfl::Vector g(2 + trial % 5);
    for (auto &v : g)
    {
      v = u(gen);
    }
    const double e = ue(gen);
    const auto   r = sfl::waterfill(g, e);
    EXPECT_NEAR(std::accumulate(r.x.begin(), r.x.end(), 0.0), e, 1e-9);
    for (std::size_t i = 0; i < g.size(); ++i)
    {
      EXPECT_GE(r.x[i], 0.0);
      if (r.x[i] > 0.0)
      {
        EXPECT_NEAR(g[i] + r.x[i], r.level, 1e-9);
      }
      else
      {
        EXPECT_GE(g[i], r.level - 1e-9);
      }
    }
    const double c = 0.1 + u(gen);
    sfl::Vector  cg = g;
    for (auto &v : cg)
    {
      v *= c;
    }
    const auto scaled = sfl::waterfill(cg, c * e);
    for (std::size_t i = 0; i < g.size(); ++i)
    {
      EXPECT_NEAR(scaled.x[i], c * r.x[i], 1e-9 * (1 + c * e));
    }
  }
}

TEST(Waterfill, RaisingBaselineNeverLowersThePeak)
{
  std::mt19937_64                        gen(13);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial)
  {
    sfl::Vector g{u(gen), u(gen), u(gen)};
    const double e = u(gen);
    const double before = peak(sfl::waterfill(g, e).x, g);
    g[trial % 3] += u(gen);
    EXPECT_GE(peak(sfl::waterfill(g, e).x, g), before - 1e-12);
  }
}

TEST(SplitAllocation, Examples)
{
  auto one = sfl::split_allocation(sfl::Vector{1.5, 0.5}, std::vector<double>{2.0});
  EXPECT_EQ(one[0].x, (sfl::Vector{1.5, 0.5}));
  auto two = sfl::split_allocation(sfl::Vector{2, 0}, std::vector<double>{1, 1});
  EXPECT_EQ(two[0].x, (sfl::Vector{1, 0}));
  EXPECT_EQ(two[1].x, (sfl::Vector{1, 0}));
  auto prop = sfl::split_allocation(sfl::Vector{4, 0}, std::vector<double>{3, 1});
  EXPECT_EQ(prop[0].x, (sfl::Vector{3, 0}));
  EXPECT_EQ(prop[1].x, (sfl::Vector{1, 0}));
  EXPECT_THROW(sfl::split_allocation(sfl::Vector{1, 0}, std::vector<double>{0, 0}), sfl::ParameterError);
}

TEST(FcSchedule, SingleClientPeak)
{
  const auto x = sfl::fc_schedule({{1, 3}}, scenario(1, {1.5}));
  EXPECT_EQ(x[0].x, (sfl::Vector{1.5, 0}));
  const sfl::Vector g{1, 3};
  const auto        oracle = sfl::test::segment_argmin(1.5, 1e-4, [&](const sfl::Vector &v) { return peak(v, g); });
  EXPECT_NEAR(oracle[0], 1.5, 1e-4);
}

TEST(FcSchedule, ClippedModelGivesUniformSchedule)
{
  const auto x = sfl::fc_schedule({{0, 0}}, scenario(1, {1.5}));
  EXPECT_EQ(x[0].x, (sfl::Vector{0.75, 0.75}));
}

TEST(FcSchedule, TwoIdenticalClients)
{
  const auto s = scenario(2, {1, 1});
  const auto x = sfl::fc_schedule({{0, 2}, {0, 2}}, s);
  EXPECT_EQ(x[0].x, (sfl::Vector{1, 0}));
  EXPECT_EQ(x[1].x, (sfl::Vector{1, 0}));
  const auto bf = sfl::brute_force_schedule({{0, 2}, {0, 2}}, s, 0.01);
  EXPECT_NEAR(bf[0].x[0], 1.0, 1e-12);
  EXPECT_NEAR(bf[1].x[0], 1.0, 1e-12);
}

TEST_F(QuietWarnings, LinearFcObjectiveIsUniform)
{
  auto s = scenario(1, {2.0});
  s.p = sfl::NormExponent(1.0);
  EXPECT_EQ(sfl::fc_schedule({{0, 5}}, s)[0].x, (sfl::Vector{1, 1}));
}

TEST_F(QuietWarnings, WeightedClientPullsTowardCheapSlot)
{
  auto s = scenario(1, {1.5});
  s.clients[0].alpha = 10.0;
  const auto x = sfl::fc_schedule({{1, 1}}, s);
  EXPECT_NEAR(x[0].x[1], 1.5, 1e-12);
}

TEST(BruteForce, ZeroEnergyGivesZeroSchedules)
{
  const auto x = sfl::brute_force_schedule({{1, 2, 3}, {0, 0, 0}}, scenario(2, {0, 0}, {1, 1, 1}), 0.1);
  EXPECT_EQ(x[0].x, (sfl::Vector{0, 0, 0}));
  EXPECT_EQ(x[1].x, (sfl::Vector{0, 0, 0}));
}

TEST(BruteForce, DimensionBudgetIsEnforced)
{
  const sfl::Vector d(4, 1.0);
  EXPECT_THROW(sfl::brute_force_schedule({{0, 0, 0, 0}, {0, 0, 0, 0}}, scenario(2, {1, 1}, d), 0.1),
               sfl::BudgetError);
}

TEST(BruteForce, TiesResolveToTheLexicographicallySmallest)
{
  // Flat objective: every schedule ties, so the first grid point (all energy last) wins.
  const auto x = sfl::brute_force_maximize({1.0}, 3, 0.25, [](const std::vector<sfl::Vector> &) { return 0.0; });
  EXPECT_EQ(x[0], (sfl::Vector{0, 0, 1}));
}

TEST(BruteForce, AgreesWithWaterfillingWithinGridStep)
{
  std::mt19937_64                        gen(21);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::uniform_real_distribution<double> ue(0.0, 3.0);
  const double                           step = 1e-2;
  for (int trial = 0; trial < 50; ++trial)
  {
    const std::size_t m = 1 + trial % 2;
    std::vector<double> energies;
    std::vector<sfl::Vector> g;
    for (std::size_t i = 0; i < m; ++i)
    {
      energies.push_back(ue(gen));
      g.push_back({u(gen), u(gen)});
    }
    const auto   s = scenario(m, energies, {u(gen), u(gen)});
    const auto   wf = sfl::fc_schedule(g, s);
    const auto   bf = sfl::brute_force_schedule(g, s, step);
    const double cost_wf = -sfl::fc_common_utility(wf, g, s.p, s.delta);
    const double cost_bf = -sfl::fc_common_utility(bf, g, s.p, s.delta);
    EXPECT_LE(std::abs(cost_wf - cost_bf), step * (1 + s.clients[0].prices.d[0] + s.clients[0].prices.d[1]));
    EXPECT_LE(cost_wf, cost_bf + 1e-12);
  }
}

TEST(BruteForce, MinPeakMatchesNestedLoopOracle)
{
  std::mt19937_64                        gen(22);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 20; ++trial)
  {
    const sfl::Vector g{u(gen), u(gen), u(gen)};
    const double      e = u(gen);
    auto              s = scenario(1, {e}, {1, 1, 1});
    const auto        bf = sfl::brute_force_schedule({g}, s, 0.05);
    EXPECT_NEAR(peak(bf[0].x, g), sfl::test::min_peak_grid(g, e, 0.05), 1e-12);
  }
}

TEST(ClientIdeal, Examples)
{
  EXPECT_EQ(sfl::client_ideal_schedule({{6, 0.1}}, sfl::Vector{0, 0}, 1.5, sfl::NormExponent(1.0)).x,
            (sfl::Vector{0, 1.5}));
  EXPECT_EQ(sfl::client_ideal_schedule({{1, 1}}, sfl::Vector{0, 0}, 2.0, sfl::NormExponent(2.0)).x,
            (sfl::Vector{1, 1}));
  const auto x = sfl::client_ideal_schedule({{1, 2}}, sfl::Vector{0, 0}, 3.0, sfl::NormExponent(2.0)).x;
  EXPECT_NEAR(x[0], 2.0, 1e-12);
  EXPECT_NEAR(x[1], 1.0, 1e-12);
}

TEST(ClientIdeal, QuadraticPriceOracle)
{
  // Marginal-price waterfilling minimizes sum d(t) (x + g)^2 on the segment.
  const sfl::Vector d{1, 2};
  const auto        oracle = sfl::test::segment_argmin(3.0, 1e-4, [&](const sfl::Vector &x) {
    return d[0] * x[0] * x[0] + d[1] * x[1] * x[1];
  });
  EXPECT_NEAR(oracle[0], 2.0, 1e-4);
  EXPECT_NEAR(oracle[1], 1.0, 1e-4);
}

TEST(ClientIdeal, AllZeroPricesPickTheFirstSlot)
{
  EXPECT_EQ(sfl::client_ideal_schedule({{0, 0}}, sfl::Vector{1, 0}, 1.0, sfl::NormExponent(1.0)).x,
            (sfl::Vector{1, 0}));
}

TEST(Schedules, StayOnTheSimplex)
{
  std::mt19937_64                        gen(23);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial)
  {
    std::vector<double>      energies{u(gen), u(gen)};
    std::vector<sfl::Vector> g{{u(gen), u(gen), u(gen)}, {u(gen), u(gen), u(gen)}};
    for (const auto &x : sfl::fc_schedule(g, scenario(2, energies, {1, 2, 3})))
    {
      EXPECT_NEAR(std::accumulate(x.x.begin(), x.x.end(), 0.0), x.energy_need, 1e-9);
      for (double v : x.x)
      {
        EXPECT_GE(v, 0.0);
      }
    }
  }
}

}  // namespace
