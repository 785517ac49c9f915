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

#pragma once

#include <vector>

#include "sfl/clustering.hpp"
#include "sfl/common.hpp"
#include "sfl/strategy.hpp"

namespace sfl {

/// FedAVG output: representative-wise mean of the reported models.
struct AggregatedModel
{
  Representatives representatives;
  std::size_t     contributor_count{0};
};

namespace detail {

inline void check_common_shape(const std::vector<ReportedModel> &models)
{
  if (models.empty())
  {
    fail_parameter("aggregation needs at least one model");
  }
  const std::size_t k = models.front().representatives.size();
  for (const auto &m : models)
  {
    check_shape(m.representatives, "reported model");
    if (m.representatives.size() != k ||
        m.representatives.front().size() != models.front().representatives.front().size())
    {
      fail_parameter("reported models disagree on shape (K x T)");
    }
  }
}

}  // namespace detail

/// Re-sorts every model into canonical order so representative k means the same
/// cluster across clients.
inline std::vector<ReportedModel> align(std::vector<ReportedModel> models)
{
  detail::check_common_shape(models);
  for (auto &m : models)
  {
    canonical_sort(m.representatives);
  }
  return models;
}

/// Unweighted mean r^k = (1/M) sum_m r_m^k. Expects aligned models.
inline AggregatedModel fedavg(const std::vector<ReportedModel> &models)
{
  detail::check_common_shape(models);
  const std::size_t k = models.front().representatives.size();
  const std::size_t t = models.front().representatives.front().size();
  AggregatedModel   out{Representatives(k, Vector(t, 0.0)), models.size()};
  for (const auto &m : models)
  {
    for (std::size_t c = 0; c < k; ++c)
    {
      for (std::size_t i = 0; i < t; ++i)
      {
        out.representatives[c][i] += m.representatives[c][i];
      }
    }
  }
  if (models.size() > 1)
  {
    const auto count = static_cast<double>(models.size());
    for (auto &r : out.representatives)
    {
      for (auto &v : r)
      {
        v /= count;
      }
    }
  }
  return out;
}

}  // namespace sfl
