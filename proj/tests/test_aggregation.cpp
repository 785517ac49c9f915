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

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "sfl/aggregation.hpp"

namespace {

sfl::ReportedModel model(sfl::Representatives reps)
{
  return {std::move(reps), "m"};
}

TEST(Align, SortsRepresentatives)
{
  const auto out = sfl::align({model({{4, 4}, {0, 0}})});
  EXPECT_EQ(out[0].representatives, (sfl::Representatives{{0, 0}, {4, 4}}));
  EXPECT_EQ(sfl::align(out)[0].representatives, out[0].representatives);
}

TEST(Align, ShapeMismatchIsRejected)
{
  EXPECT_THROW(sfl::align({model({{1, 1}}), model({{1, 1}, {2, 2}})}), sfl::ParameterError);
  EXPECT_THROW(sfl::align({model({{1, 1}}), model({{1, 1, 1}})}), sfl::ParameterError);
}

TEST(FedAvg, Midpoint)
{
  const auto agg = sfl::fedavg({model({{0, 0}}), model({{4, 2}})});
  EXPECT_EQ(agg.representatives, (sfl::Representatives{{2, 1}}));
  EXPECT_EQ(agg.contributor_count, 2u);
}

TEST(FedAvg, IdenticalAndSingleModels)
{
  const sfl::Representatives r{{0.25, 1.5}, {3, 0.125}};
  EXPECT_EQ(sfl::fedavg({model(r)}).representatives, r);
  EXPECT_EQ(sfl::fedavg({model(r), model(r), model(r)}).representatives, r);
}

TEST(FedAvg, EmptyIsRejected)
{
  EXPECT_THROW(sfl::fedavg({}), sfl::ParameterError);
}

TEST(FedAvg, NonNegativeInputsGiveNonNegativeOutput)
{
  std::mt19937_64                        gen(1);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial)
  {
    std::vector<sfl::ReportedModel> ms;
    for (int m = 0; m < 4; ++m)
    {
      ms.push_back(model({{u(gen), u(gen)}, {u(gen), u(gen)}}));
    }
    for (const auto &r : sfl::fedavg(sfl::align(ms)).representatives)
    {
      for (double v : r)
      {
        EXPECT_GE(v, 0.0);
      }
    }
  }
}

}  // namespace
