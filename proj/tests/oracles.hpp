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

// Independent reference computations used only by the tests. None of these call into the
// library's solvers.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace sfl::test {

using Vec = std::vector<double>;

/// Best K-means partition by enumerating every labeling of the points into k groups
/// (empty groups allowed). Returns the minimal within-cluster sum of squares and the
/// centroids of the non-empty groups of the best labeling.
struct PartitionOptimum
{
  double           inertia{std::numeric_limits<double>::infinity()};
  std::vector<Vec> centroids;
};

inline PartitionOptimum enumerate_partitions(const std::vector<Vec> &points, std::size_t k)
{
  const std::size_t n = points.size();
  const std::size_t dim = points.front().size();
  std::size_t       total = 1;
  for (std::size_t i = 0; i < n; ++i)
  {
    total *= k;
  }
  PartitionOptimum best;
  std::vector<std::size_t> labels(n);
  for (std::size_t code = 0; code < total; ++code)
  {
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i)
    {
      labels[i] = c % k;
      c /= k;
    }
    std::vector<Vec>         sums(k, Vec(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i)
    {
      ++counts[labels[i]];
      for (std::size_t d = 0; d < dim; ++d)
      {
        sums[labels[i]][d] += points[i][d];
      }
    }
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
      for (std::size_t d = 0; d < dim; ++d)
      {
        const double mean = sums[labels[i]][d] / static_cast<double>(counts[labels[i]]);
        cost += (points[i][d] - mean) * (points[i][d] - mean);
      }
    }
    if (cost < best.inertia - 1e-15)
    {
      best.inertia = cost;
      best.centroids.clear();
      for (std::size_t g = 0; g < k; ++g)
      {
        if (counts[g] == 0)
        {
          continue;
        }
        Vec centroid(dim);
        for (std::size_t d = 0; d < dim; ++d)
        {
          centroid[d] = sums[g][d] / static_cast<double>(counts[g]);
        }
        best.centroids.push_back(centroid);
      }
    }
  }
  return best;
}

/// Minimizes f over the segment {(s, e - s) : s in [0, e]} (T = 2) at spacing `step`.
/// Returns the minimizing point; the first minimizer in increasing s wins ties.
inline Vec segment_argmin(double e, double step, const std::function<double(const Vec &)> &f)
{
  const auto n = static_cast<std::size_t>(std::llround(e / step));
  Vec        best{0.0, e};
  double     best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= n; ++i)
  {
    const double s = std::min(e, static_cast<double>(i) * step);
    const Vec    x{s, e - s};
    const double v = f(x);
    if (v < best_value - 1e-13)
    {
      best_value = v;
      best = x;
    }
  }
  return best;
}

/// Minimum over the simplex {x >= 0, sum x = e} in T = 2 or 3 dimensions at spacing `step`
/// of max_t (x_t + g_t), by direct nested loops.
inline double min_peak_grid(const Vec &g, double e, double step)
{
  const auto n = static_cast<long>(std::ceil(e / step - 1e-9));
  const double u = n == 0 ? 0.0 : e / static_cast<double>(n);
  double       best = std::numeric_limits<double>::infinity();
  if (g.size() == 2)
  {
    for (long i = 0; i <= n; ++i)
    {
      best = std::min(best, std::max(g[0] + i * u, g[1] + (n - i) * u));
    }
    return best;
  }
  for (long i = 0; i <= n; ++i)
  {
    for (long j = 0; i + j <= n; ++j)
    {
      const double peak = std::max({g[0] + i * u, g[1] + j * u, g[2] + (n - i - j) * u});
      best = std::min(best, peak);
    }
  }
  return best;
}

/// Exhaustive ε-best-response scan of a two-player cost table (row player 1, column
/// player 2, row-major). Returns the (row, column) pairs in row-major order.
inline std::vector<std::pair<std::size_t, std::size_t>> two_player_ne(const Vec &cost1, const Vec &cost2,
                                                                      std::size_t rows, std::size_t cols,
                                                                      double epsilon)
{
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t r = 0; r < rows; ++r)
  {
    for (std::size_t c = 0; c < cols; ++c)
    {
      bool stable = true;
      for (std::size_t r2 = 0; r2 < rows && stable; ++r2)
      {
        stable = cost1[r * cols + c] <= cost1[r2 * cols + c] + epsilon;
      }
      for (std::size_t c2 = 0; c2 < cols && stable; ++c2)
      {
        stable = cost2[r * cols + c] <= cost2[r * cols + c2] + epsilon;
      }
      if (stable)
      {
        out.emplace_back(r, c);
      }
    }
  }
  return out;
}

}  // namespace sfl::test
