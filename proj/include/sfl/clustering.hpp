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

#include <algorithm>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "sfl/common.hpp"
#include "sfl/dataio.hpp"
#include "sfl/random.hpp"

namespace sfl {

/// K representatives of dimension T. Shared by fitted, reported and aggregated models.
using Representatives = std::vector<Vector>;

inline double squared_distance(std::span<const double> a, std::span<const double> b)
{
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    const double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

/// Representatives sorted lexicographically by coordinates. This is the cross-client
/// cluster correspondence used by aggregation.
inline void canonical_sort(Representatives &reps)
{
  std::stable_sort(reps.begin(), reps.end());
}

inline void check_shape(const Representatives &reps, std::string_view what)
{
  if (reps.empty())
  {
    fail_parameter(what, " has no representatives");
  }
  const std::size_t t = reps.front().size();
  if (t == 0)
  {
    fail_parameter(what, " has zero-dimensional representatives");
  }
  for (const auto &r : reps)
  {
    if (r.size() != t)
    {
      fail_parameter(what, " mixes representative dimensions ", t, " and ", r.size());
    }
    if (!all_finite(r))
    {
      fail_parameter(what, " has a non-finite representative entry");
    }
  }
}

struct ClusterModel
{
  Representatives representatives;

  std::size_t k() const { return representatives.size(); }
  std::size_t dim() const { return representatives.empty() ? 0 : representatives.front().size(); }
};

/// Labels are 0-based indices into the canonical representative order.
struct ClusterAssignment
{
  std::vector<std::size_t> labels;
  double                   inertia{0.0};
};

struct KMeansOptions
{
  std::uint64_t seed{0};
  std::size_t   max_iter{300};
  double        tol{1e-8};
};

struct KMeansResult
{
  ClusterModel      model;
  ClusterAssignment assignment;
  /// Inertia of the seeding followed by the inertia after every Lloyd update.
  Vector            inertia_trace;
  std::size_t       iterations{0};
};

/// Index of the nearest representative (squared Euclidean); lowest index wins ties.
inline std::size_t nearest_index(const Representatives &reps, std::span<const double> g)
{
  std::size_t best = 0;
  double      best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < reps.size(); ++k)
  {
    const double d = squared_distance(reps[k], g);
    if (d < best_d)
    {
      best_d = d;
      best = k;
    }
  }
  return best;
}

/// Clustering rule: the representative closest to g.
inline const Vector &quantize(const Representatives &reps, std::span<const double> g)
{
  if (reps.empty())
  {
    fail_parameter("quantize needs at least one representative");
  }
  if (reps.front().size() != g.size())
  {
    fail_parameter("quantize dimension mismatch: model ", reps.front().size(), ", state ",
                   g.size());
  }
  return reps[nearest_index(reps, g)];
}

inline Vector quantize(const ClusterModel &model, std::span<const double> g)
{
  return quantize(model.representatives, g);
}

inline double inertia(const ClientDataset &data, const ClusterModel &model)
{
  if (model.k() == 0 || model.dim() != data.slots())
  {
    fail_parameter("inertia dimension mismatch: model ", model.dim(), ", data ", data.slots());
  }
  double total = 0.0;
  for (const auto &s : data.samples)
  {
    total += squared_distance(s, model.representatives[nearest_index(model.representatives, s)]);
  }
  return total;
}

namespace detail {

inline Representatives kmeanspp_seed(const std::vector<Vector> &points, std::size_t k, Rng &rng)
{
  const std::size_t n = points.size();
  Representatives   centers;
  centers.reserve(k);
  centers.push_back(points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);

  Vector dist(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    dist[i] = squared_distance(points[i], centers[0]);
  }
  while (centers.size() < k)
  {
    double total = 0.0;
    for (double d : dist)
    {
      total += d;
    }
    std::size_t pick = 0;
    if (total > 0.0)
    {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i)
      {
        if (dist[i] <= 0.0)
        {
          continue;
        }
        if (target < dist[i])
        {
          pick = i;
          break;
        }
        target -= dist[i];
      }
      // Rounding can leave `pick` on an already-chosen point; move to the last positive one.
      while (dist[pick] <= 0.0 && pick > 0)
      {
        --pick;
      }
    }
    else
    {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i)
    {
      dist[i] = std::min(dist[i], squared_distance(points[i], centers.back()));
    }
  }
  return centers;
}

inline double assign(const std::vector<Vector> &points, const Representatives &centers,
                     std::vector<std::size_t> &labels, Vector &dist)
{
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
  {
    labels[i] = nearest_index(centers, points[i]);
    dist[i] = squared_distance(points[i], centers[labels[i]]);
    total += dist[i];
  }
  return total;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding. Stops when an update improves inertia by
/// less than `tol` or after `max_iter` updates. Empty clusters are re-seeded with the
/// point farthest from its representative.
inline KMeansResult kmeans_fit(const ClientDataset &data, std::size_t k,
                               const KMeansOptions &options = {})
{
  validate(data);
  if (k == 0)
  {
    fail_parameter("k must be positive");
  }
  if (k > data.size())
  {
    fail_parameter("k = ", k, " exceeds the ", data.size(), " samples of '", data.client_id, "'");
  }
  if (options.max_iter == 0 || !(options.tol > 0.0))
  {
    fail_parameter("k-means needs max_iter >= 1 and tol > 0");
  }

  const auto       &points = data.samples;
  const std::size_t n = points.size();
  const std::size_t dim = data.slots();

  Rng             rng(derive_seed(options.seed, {0x6b6d}));
  Representatives centers = detail::kmeanspp_seed(points, k, rng);

  std::vector<std::size_t> labels(n);
  Vector                   dist(n);
  KMeansResult             result;
  double                   current = detail::assign(points, centers, labels, dist);
  result.inertia_trace.push_back(current);

  for (std::size_t iter = 0; iter < options.max_iter; ++iter)
  {
    Representatives          sums(k, Vector(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i)
    {
      ++counts[labels[i]];
      for (std::size_t d = 0; d < dim; ++d)
      {
        sums[labels[i]][d] += points[i][d];
      }
    }
    for (std::size_t c = 0; c < k; ++c)
    {
      if (counts[c] == 0)
      {
        auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) -
                                            dist.begin());
        centers[c] = points[far];
        dist[far] = 0.0;
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d)
      {
        centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
      }
    }

    const double next = detail::assign(points, centers, labels, dist);
    result.inertia_trace.push_back(next);
    result.iterations = iter + 1;
    const double improvement = current - next;
    current = next;
    if (improvement < options.tol)
    {
      break;
    }
  }

  // Canonical order, with labels remapped to follow the sort.
  std::vector<std::size_t> perm(k);
  for (std::size_t c = 0; c < k; ++c)
  {
    perm[c] = c;
  }
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t a, std::size_t b) { return centers[a] < centers[b]; });
  std::vector<std::size_t> rank(k);
  for (std::size_t pos = 0; pos < k; ++pos)
  {
    rank[perm[pos]] = pos;
    result.model.representatives.push_back(centers[perm[pos]]);
  }
  for (auto &label : labels)
  {
    label = rank[label];
  }
  result.assignment.labels = std::move(labels);
  result.assignment.inertia = current;
  return result;
}

/// One representative per row.
inline void write_representatives_csv(std::ostream &os, const Representatives &reps)
{
  const std::size_t t = reps.empty() ? 0 : reps.front().size();
  os << "representative";
  for (std::size_t i = 1; i <= t; ++i)
  {
    os << ",v_" << i;
  }
  os << '\n';
  for (std::size_t k = 0; k < reps.size(); ++k)
  {
    os << (k + 1);
    for (double v : reps[k])
    {
      os << ',' << format_double(v);
    }
    os << '\n';
  }
}

}  // namespace sfl
