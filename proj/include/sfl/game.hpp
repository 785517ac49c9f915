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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sfl/aggregation.hpp"
#include "sfl/clustering.hpp"
#include "sfl/common.hpp"
#include "sfl/dataio.hpp"
#include "sfl/random.hpp"
#include "sfl/scenario.hpp"
#include "sfl/scheduler.hpp"
#include "sfl/strategy.hpp"
#include "sfl/utility.hpp"

namespace sfl {

struct ExpectedCost
{
  Vector client_costs;
  double fc_cost{0.0};
  /// Monte-Carlo standard error of each client's mean cost.
  Vector client_stderr;
};

namespace detail {

inline void check_game_inputs(const std::vector<NoiseAction> &actions, const ScenarioConfig &scenario,
                              const std::vector<ClientDataset> &datasets,
                              const std::vector<ClusterModel> &models)
{
  const std::size_t m_count = scenario.clients.size();
  if (m_count == 0)
  {
    fail_parameter("the game needs at least one client");
  }
  if (actions.size() != m_count || datasets.size() != m_count || models.size() != m_count)
  {
    fail_parameter("expected one action, dataset and model per client (", m_count, "), got ",
                   actions.size(), ", ", datasets.size(), ", ", models.size());
  }
  const std::size_t k = models.front().k();
  const std::size_t t = models.front().dim();
  for (std::size_t m = 0; m < m_count; ++m)
  {
    if (datasets[m].samples.empty())
    {
      fail_parameter("client ", m + 1, " has an empty dataset");
    }
    if (datasets[m].slots() != t || models[m].dim() != t || models[m].k() != k)
    {
      fail_parameter("client ", m + 1, " disagrees on the model shape K x T = ", k, " x ", t);
    }
    if (actions[m].dim() != k * t)
    {
      fail_parameter("client ", m + 1, " action has dimension ", actions[m].dim(),
                     ", expected T*K = ", t * k);
    }
    if (scenario.clients[m].prices.size() != t)
    {
      fail_parameter("client ", m + 1, " prices have ", scenario.clients[m].prices.size(),
                     " slots, expected ", t);
    }
  }
}

// Stream tags keep state and noise draws of the same (sample, client) independent.
inline constexpr std::uint64_t kStateStream = 1;
inline constexpr std::uint64_t kNoiseStream = 2;

}  // namespace detail

/// Monte-Carlo estimate of every client's expected cost and of the FC cost.
///
/// Each sample draws one true state per client uniformly from its dataset and one
/// noise realization per client, both from streams derived from (seed, sample, client).
/// The FC aggregates the (aligned) reported models, quantizes every true state against
/// the aggregate and schedules on those estimates; costs are realized on the true states.
inline ExpectedCost expected_cost(const std::vector<NoiseAction> &actions,
                                  const ScenarioConfig &scenario,
                                  const std::vector<ClientDataset> &datasets,
                                  const std::vector<ClusterModel> &models, std::size_t n_samples,
                                  std::uint64_t seed)
{
  detail::check_game_inputs(actions, scenario, datasets, models);
  if (n_samples == 0)
  {
    fail_parameter("n_samples must be >= 1");
  }
  const std::size_t m_count = scenario.clients.size();

  const bool deterministic = std::all_of(actions.begin(), actions.end(),
                                         [](const NoiseAction &a) { return a.deterministic(); });

  auto aggregate = [&](std::size_t sample) {
    std::vector<ReportedModel> reports;
    reports.reserve(m_count);
    for (std::size_t m = 0; m < m_count; ++m)
    {
      Rng rng = make_rng(seed, {sample, m, detail::kNoiseStream});
      reports.push_back(report_model(models[m], actions[m], rng, datasets[m].client_id));
    }
    return fedavg(align(std::move(reports)));
  };

  AggregatedModel fixed;
  if (deterministic)
  {
    fixed = aggregate(0);
  }
  // With a fixed aggregate the schedule only depends on which representative each state maps to.
  std::map<std::vector<std::size_t>, std::vector<Schedule>> cache;

  // Welford running means: a stream of equal costs yields that cost exactly.
  Vector              mean(m_count, 0.0);
  Vector              m2(m_count, 0.0);
  double              fc_mean = 0.0;
  std::vector<Vector> g_true(m_count);
  std::vector<Vector> g_hat(m_count);
  std::vector<std::size_t> nearest(m_count);

  for (std::size_t s = 0; s < n_samples; ++s)
  {
    for (std::size_t m = 0; m < m_count; ++m)
    {
      Rng rng = make_rng(seed, {s, m, detail::kStateStream});
      std::uniform_int_distribution<std::size_t> pick(0, datasets[m].size() - 1);
      g_true[m] = datasets[m].samples[pick(rng)];
    }

    const std::vector<Schedule> *schedules = nullptr;
    std::vector<Schedule>        fresh;
    if (deterministic)
    {
      for (std::size_t m = 0; m < m_count; ++m)
      {
        nearest[m] = nearest_index(fixed.representatives, g_true[m]);
      }
      auto it = cache.find(nearest);
      if (it == cache.end())
      {
        for (std::size_t m = 0; m < m_count; ++m)
        {
          g_hat[m] = fixed.representatives[nearest[m]];
        }
        it = cache.emplace(nearest, fc_schedule(g_hat, scenario)).first;
      }
      schedules = &it->second;
    }
    else
    {
      const AggregatedModel agg = aggregate(s);
      for (std::size_t m = 0; m < m_count; ++m)
      {
        g_hat[m] = quantize(agg.representatives, g_true[m]);
      }
      fresh = fc_schedule(g_hat, scenario);
      schedules = &fresh;
    }

    const auto count = static_cast<double>(s + 1);
    for (std::size_t m = 0; m < m_count; ++m)
    {
      const double cost = -client_utility((*schedules)[m].x, g_true[m], scenario.clients[m]);
      const double delta = cost - mean[m];
      mean[m] += delta / count;
      m2[m] += delta * (cost - mean[m]);
    }
    const double fc = -fc_common_utility(*schedules, g_true, scenario.p, scenario.delta);
    fc_mean += (fc - fc_mean) / count;
  }

  const auto   n = static_cast<double>(n_samples);
  ExpectedCost out{mean, fc_mean, Vector(m_count, 0.0)};
  for (std::size_t m = 0; m < m_count; ++m)
  {
    if (n_samples > 1)
    {
      out.client_stderr[m] = std::sqrt(std::max(0.0, m2[m] / (n - 1.0)) / n);
    }
  }
  return out;
}

/// One candidate action of a client together with its grid coordinates.
struct GridAction
{
  Vector      coords;
  NoiseAction action;
};

struct ClientAxis
{
  std::vector<std::string> names;
  std::vector<GridAction>  actions;
};

/// Per-client candidate actions; the sweep evaluates their cross product.
struct ActionGrid
{
  std::vector<ClientAxis> clients;

  std::size_t cell_count() const
  {
    std::size_t n = clients.empty() ? 0 : 1;
    for (const auto &c : clients)
    {
      n *= c.actions.size();
    }
    return n;
  }
};

/// Gridded expected costs. Cells are row-major over clients (the last client varies fastest).
struct CostSurface
{
  std::vector<std::vector<std::string>> axis_names;
  std::vector<std::vector<Vector>>      axis_coords;
  std::vector<Vector>                   client_costs;
  Vector                                fc_cost;
  std::vector<Vector>                   client_stderr;
  std::size_t                           mc_samples{0};
  std::uint64_t                         seed{0};
  /// True when some action has non-zero covariance.
  bool sampled{false};

  std::size_t clients() const { return axis_coords.size(); }

  std::vector<std::size_t> shape() const
  {
    std::vector<std::size_t> s;
    for (const auto &a : axis_coords)
    {
      s.push_back(a.size());
    }
    return s;
  }

  std::size_t cell_count() const
  {
    std::size_t n = axis_coords.empty() ? 0 : 1;
    for (const auto &a : axis_coords)
    {
      n *= a.size();
    }
    return n;
  }

  std::vector<std::size_t> unravel(std::size_t cell) const
  {
    std::vector<std::size_t> idx(axis_coords.size());
    for (std::size_t m = axis_coords.size(); m-- > 0;)
    {
      idx[m] = cell % axis_coords[m].size();
      cell /= axis_coords[m].size();
    }
    return idx;
  }

  std::size_t ravel(const std::vector<std::size_t> &idx) const
  {
    std::size_t cell = 0;
    for (std::size_t m = 0; m < axis_coords.size(); ++m)
    {
      cell = cell * axis_coords[m].size() + idx[m];
    }
    return cell;
  }

  double sum_cost(std::size_t cell) const
  {
    double s = 0.0;
    for (const auto &c : client_costs)
    {
      s += c[cell];
    }
    return s;
  }
};

/// Builds a surface from explicit per-client cost tables (one value per cell); axis
/// coordinates are the action indices.
inline CostSurface surface_from_tables(const std::vector<std::size_t> &shape,
                                       std::vector<Vector> client_costs)
{
  CostSurface s;
  for (std::size_t m = 0; m < shape.size(); ++m)
  {
    s.axis_names.push_back({"a" + std::to_string(m + 1)});
    std::vector<Vector> coords;
    for (std::size_t i = 0; i < shape[m]; ++i)
    {
      coords.push_back({static_cast<double>(i)});
    }
    s.axis_coords.push_back(std::move(coords));
  }
  const std::size_t cells = s.cell_count();
  if (client_costs.size() != shape.size())
  {
    fail_parameter("need one cost table per client");
  }
  for (const auto &c : client_costs)
  {
    if (c.size() != cells)
    {
      fail_parameter("cost table has ", c.size(), " cells, expected ", cells);
    }
  }
  s.client_costs = std::move(client_costs);
  s.fc_cost.assign(cells, 0.0);
  s.client_stderr.assign(shape.size(), Vector(cells, 0.0));
  return s;
}

struct SweepOptions
{
  std::size_t jobs{1};
  std::size_t max_cells{1'000'000};
};

/// Expected costs at every cell of the action cross product.
///
/// All cells share the master seed, so they see the same state and standard-normal
/// draws (common random numbers). Each cell is a pure function of its actions, which
/// makes the surface independent of evaluation order and worker count.
inline CostSurface sweep_grid(const ActionGrid &grid, const ScenarioConfig &scenario,
                              const std::vector<ClientDataset> &datasets,
                              const std::vector<ClusterModel> &models, std::size_t n_samples,
                              std::uint64_t seed, const SweepOptions &options = {})
{
  const std::size_t m_count = scenario.clients.size();
  if (grid.clients.size() != m_count)
  {
    fail_parameter("action grid has ", grid.clients.size(), " clients, scenario has ", m_count);
  }
  for (std::size_t m = 0; m < m_count; ++m)
  {
    if (grid.clients[m].actions.empty())
    {
      fail_parameter("action grid for client ", m + 1, " is empty");
    }
  }
  const std::size_t cells = grid.cell_count();
  if (cells > options.max_cells)
  {
    throw BudgetError(detail::concat("sweep needs ", cells, " cells; the budget is ",
                                     options.max_cells));
  }

  CostSurface surface;
  surface.mc_samples = n_samples;
  surface.seed = seed;
  for (const auto &axis : grid.clients)
  {
    surface.axis_names.push_back(axis.names);
    std::vector<Vector> coords;
    for (const auto &a : axis.actions)
    {
      coords.push_back(a.coords);
      surface.sampled = surface.sampled || !a.action.deterministic();
    }
    surface.axis_coords.push_back(std::move(coords));
  }
  surface.client_costs.assign(m_count, Vector(cells, 0.0));
  surface.client_stderr.assign(m_count, Vector(cells, 0.0));
  surface.fc_cost.assign(cells, 0.0);

  auto evaluate = [&](std::size_t cell) {
    const auto               idx = surface.unravel(cell);
    std::vector<NoiseAction> actions;
    actions.reserve(m_count);
    for (std::size_t m = 0; m < m_count; ++m)
    {
      actions.push_back(grid.clients[m].actions[idx[m]].action);
    }
    const auto cost = expected_cost(actions, scenario, datasets, models, n_samples, seed);
    for (std::size_t m = 0; m < m_count; ++m)
    {
      surface.client_costs[m][cell] = cost.client_costs[m];
      surface.client_stderr[m][cell] = cost.client_stderr[m];
    }
    surface.fc_cost[cell] = cost.fc_cost;
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, cells));
  if (jobs == 1)
  {
    for (std::size_t cell = 0; cell < cells; ++cell)
    {
      evaluate(cell);
    }
    return surface;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr       failure;
  std::mutex               failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w)
  {
    workers.emplace_back([&] {
      for (std::size_t cell = next++; cell < cells; cell = next++)
      {
        try
        {
          evaluate(cell);
        }
        catch (...)
        {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure)
          {
            failure = std::current_exception();
          }
          next = cells;
        }
      }
    });
  }
  for (auto &w : workers)
  {
    w.join();
  }
  if (failure)
  {
    std::rethrow_exception(failure);
  }
  return surface;
}

/// Grid values min, min + step, ..., max. When 1/step is an integer q the values are
/// computed as j / q so that 0 and the endpoints are represented exactly.
inline Vector grid_values(double min, double max, double step)
{
  if (!std::isfinite(min) || !std::isfinite(max) || !(step > 0.0) || min > max)
  {
    fail_parameter("grid range needs finite min <= max and step > 0");
  }
  const double q = std::round(1.0 / step);
  const bool   reciprocal = q >= 1.0 && std::abs(q * step - 1.0) < 1e-12;
  const double first = std::round(min / step);
  const bool   aligned = std::abs(first * step - min) < 1e-9 * std::max(1.0, std::abs(min));
  const auto   count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;

  Vector out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
  {
    double v = 0.0;
    if (aligned && reciprocal)
    {
      v = (first + static_cast<double>(i)) / q;
    }
    else if (aligned)
    {
      v = (first + static_cast<double>(i)) * step;
    }
    else
    {
      v = min + static_cast<double>(i) * step;
    }
    out.push_back(std::clamp(v, min, max));
  }
  return out;
}

/// One varied component of the per-slot mean vector.
struct MeanAxis
{
  std::size_t component{0};
  Vector      values;
};

/// Candidate actions for client `m`: the T-vector mean has the listed components varied
/// over their values (others 0) and is broadcast to the K representatives; each
/// variance level v gives Σ = v I. Coordinates are the varied components, then v when
/// more than one level (or a non-zero level) is swept.
inline ClientAxis make_mean_axis(const ScenarioConfig &scenario, std::size_t m,
                                 const std::vector<MeanAxis> &axes, const Vector &variances = {0.0})
{
  if (m >= scenario.clients.size())
  {
    fail_parameter("client index ", m, " out of range");
  }
  if (variances.empty())
  {
    fail_parameter("client ", m + 1, ": at least one variance level is required");
  }
  const auto       &client = scenario.clients[m];
  const std::size_t t = scenario.t_slots;
  const std::size_t dim = t * scenario.k;
  const bool        with_variance = variances.size() > 1 || variances.front() != 0.0;

  ClientAxis axis;
  for (const auto &a : axes)
  {
    if (a.component >= t)
    {
      fail_parameter("client ", m + 1, ": mean component ", a.component + 1, " exceeds T = ", t);
    }
    if (a.values.empty())
    {
      fail_parameter("client ", m + 1, ": mean axis ", a.component + 1, " has no values");
    }
    axis.names.push_back("mu" + std::to_string(m + 1) + "_" + std::to_string(a.component + 1));
  }
  if (with_variance)
  {
    axis.names.push_back("var" + std::to_string(m + 1));
  }

  NoiseAction::Box box;
  if (std::isfinite(client.mu_min) || std::isfinite(client.mu_max))
  {
    box.lower.assign(dim, client.mu_min);
    box.upper.assign(dim, client.mu_max);
  }

  std::vector<std::size_t> pos(axes.size(), 0);
  for (;;)
  {
    for (double v : variances)
    {
      Vector per_slot(t, 0.0);
      Vector coords;
      for (std::size_t i = 0; i < axes.size(); ++i)
      {
        per_slot[axes[i].component] = axes[i].values[pos[i]];
        coords.push_back(axes[i].values[pos[i]]);
      }
      if (with_variance)
      {
        coords.push_back(v);
      }
      try
      {
        axis.actions.push_back(
            {coords, NoiseAction::diagonal(broadcast(per_slot, scenario.k), Vector(dim, v),
                                           client.trace_bound, box)});
      }
      catch (const ParameterError &e)
      {
        fail_parameter("client ", m + 1, ": ", e.what());
      }
    }
    std::size_t i = axes.size();
    while (i-- > 0)
    {
      if (++pos[i] < axes[i].values.size())
      {
        break;
      }
      pos[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1))
    {
      break;
    }
  }
  return axis;
}

struct EquilibriumReport
{
  /// Grid indices (one per client) of every ε-equilibrium, in cell order.
  std::vector<std::vector<std::size_t>> ne_points;
  double                                epsilon{0.0};
  /// Worst equilibrium sum-cost over the minimal sum-cost; NaN when there is no equilibrium.
  double                   poa{std::numeric_limits<double>::quiet_NaN()};
  std::vector<std::size_t> min_sum_cost_point;
  double                   min_sum_cost{0.0};
};

/// True when no client can lower its cost by more than ε with a unilateral move on its axis.
inline bool is_epsilon_best_response(const CostSurface &surface, std::size_t cell, double epsilon)
{
  const auto idx = surface.unravel(cell);
  for (std::size_t m = 0; m < surface.clients(); ++m)
  {
    const double current = surface.client_costs[m][cell];
    auto         alt = idx;
    for (std::size_t a = 0; a < surface.axis_coords[m].size(); ++a)
    {
      if (a == idx[m])
      {
        continue;
      }
      alt[m] = a;
      if (current > surface.client_costs[m][surface.ravel(alt)] + epsilon)
      {
        return false;
      }
    }
  }
  return true;
}

/// Pure ε-Nash equilibria of a surface, the min-sum-cost cell and the price of anarchy.
inline EquilibriumReport find_pure_ne(const CostSurface &surface, double epsilon)
{
  if (!(epsilon >= 0.0))
  {
    fail_parameter("epsilon must be >= 0");
  }
  const std::size_t cells = surface.cell_count();
  if (cells == 0)
  {
    fail_parameter("cannot search equilibria on an empty surface");
  }
  for (const auto &c : surface.client_costs)
  {
    if (!all_finite(c))
    {
      fail_parameter("cost surface has non-finite entries");
    }
  }

  EquilibriumReport report;
  report.epsilon = epsilon;
  std::size_t best = 0;
  double      worst_ne = -std::numeric_limits<double>::infinity();
  for (std::size_t cell = 0; cell < cells; ++cell)
  {
    const double sum = surface.sum_cost(cell);
    if (sum < surface.sum_cost(best))
    {
      best = cell;
    }
    if (is_epsilon_best_response(surface, cell, epsilon))
    {
      report.ne_points.push_back(surface.unravel(cell));
      worst_ne = std::max(worst_ne, sum);
    }
  }
  report.min_sum_cost_point = surface.unravel(best);
  report.min_sum_cost = surface.sum_cost(best);
  if (!report.ne_points.empty())
  {
    if (report.min_sum_cost > 0.0)
    {
      report.poa = worst_ne / report.min_sum_cost;
    }
    else if (worst_ne == report.min_sum_cost)
    {
      report.poa = 1.0;
    }
    else
    {
      report.poa = std::numeric_limits<double>::infinity();
    }
  }
  return report;
}

/// 1e-9 for zero-variance surfaces; otherwise 3x the largest Monte-Carlo standard error.
inline double default_epsilon(const CostSurface &surface)
{
  if (!surface.sampled)
  {
    return 1e-9;
  }
  double se = 0.0;
  for (const auto &c : surface.client_stderr)
  {
    for (double v : c)
    {
      se = std::max(se, v);
    }
  }
  return std::max(1e-9, 3.0 * se);
}

struct RegionPoint
{
  Vector coords;
  double client_cost{0.0};
  double fc_cost{0.0};
  bool   truthful{false};
};

/// (client cost, FC cost) at every cell of a single-client grid, read off an existing
/// sweep of that grid. The truthful action (μ = 0, Σ = 0) is tagged; it is evaluated and
/// appended when the grid lacks it.
inline std::vector<RegionPoint> feasible_region(const ActionGrid &grid, const CostSurface &surface,
                                                const ScenarioConfig &scenario,
                                                const std::vector<ClientDataset> &datasets,
                                                const std::vector<ClusterModel> &models,
                                                std::size_t n_samples, std::uint64_t seed)
{
  if (scenario.clients.size() != 1 || grid.clients.size() != 1 || surface.clients() != 1)
  {
    fail_parameter("feasible_region needs exactly one client");
  }
  const auto &actions = grid.clients.front().actions;
  if (surface.cell_count() != actions.size())
  {
    fail_parameter("surface does not match the action grid");
  }
  std::vector<RegionPoint> region;
  bool                     has_truthful = false;
  for (std::size_t cell = 0; cell < actions.size(); ++cell)
  {
    const auto &a = actions[cell].action;
    const bool  truthful = a.deterministic() &&
                          std::all_of(a.mu().begin(), a.mu().end(), [](double v) { return v == 0.0; });
    has_truthful = has_truthful || truthful;
    region.push_back({actions[cell].coords, surface.client_costs[0][cell], surface.fc_cost[cell],
                      truthful});
  }
  if (!has_truthful)
  {
    const auto cost = expected_cost({NoiseAction::truthful(actions.front().action.dim())}, scenario,
                                    datasets, models, n_samples, seed);
    region.push_back({Vector(grid.clients.front().names.size(), 0.0), cost.client_costs[0],
                      cost.fc_cost, true});
  }
  return region;
}

inline std::vector<RegionPoint> feasible_region(const ActionGrid &grid, const ScenarioConfig &scenario,
                                                const std::vector<ClientDataset> &datasets,
                                                const std::vector<ClusterModel> &models,
                                                std::size_t n_samples, std::uint64_t seed,
                                                const SweepOptions &options = {})
{
  if (scenario.clients.size() != 1 || grid.clients.size() != 1)
  {
    fail_parameter("feasible_region needs exactly one client");
  }
  const auto surface = sweep_grid(grid, scenario, datasets, models, n_samples, seed, options);
  return feasible_region(grid, surface, scenario, datasets, models, n_samples, seed);
}

/// a Pareto-dominates b: no worse in both costs and strictly better in one.
inline bool pareto_dominates(const RegionPoint &a, const RegionPoint &b)
{
  return a.client_cost <= b.client_cost && a.fc_cost <= b.fc_cost &&
         (a.client_cost < b.client_cost || a.fc_cost < b.fc_cost);
}

/// Cells of the region dominating the truthful point.
inline std::vector<std::size_t> dominators_of_truthful(const std::vector<RegionPoint> &region)
{
  auto truthful = std::find_if(region.begin(), region.end(),
                               [](const RegionPoint &p) { return p.truthful; });
  std::vector<std::size_t> out;
  if (truthful == region.end())
  {
    return out;
  }
  for (std::size_t i = 0; i < region.size(); ++i)
  {
    if (pareto_dominates(region[i], *truthful))
    {
      out.push_back(i);
    }
  }
  return out;
}

/// Heuristic actions: for each λ_m, μ_m = heuristic_mean(dataset_m, λ_m) on every
/// representative and Σ = 0.
inline ActionGrid heuristic_grid(const std::vector<Vector> &lambdas, const ScenarioConfig &scenario,
                                 const std::vector<ClientDataset> &datasets)
{
  const std::size_t m_count = scenario.clients.size();
  if (lambdas.size() != m_count || datasets.size() != m_count)
  {
    fail_parameter("heuristic sweep needs one lambda list and dataset per client");
  }
  const std::size_t dim = scenario.t_slots * scenario.k;
  ActionGrid        grid;
  for (std::size_t m = 0; m < m_count; ++m)
  {
    if (lambdas[m].empty())
    {
      fail_parameter("client ", m + 1, ": empty lambda list");
    }
    if (datasets[m].slots() != scenario.t_slots)
    {
      fail_parameter("client ", m + 1, ": dataset has ", datasets[m].slots(), " slots, expected ",
                     scenario.t_slots);
    }
    const auto &client = scenario.clients[m];
    NoiseAction::Box box;
    if (std::isfinite(client.mu_min) || std::isfinite(client.mu_max))
    {
      box.lower.assign(dim, client.mu_min);
      box.upper.assign(dim, client.mu_max);
    }
    const Vector avg = slot_average(datasets[m]);
    ClientAxis   axis;
    axis.names.push_back("lambda" + std::to_string(m + 1));
    for (double lambda : lambdas[m])
    {
      try
      {
        axis.actions.push_back({{lambda},
                                NoiseAction(broadcast(heuristic_mean_from_average(avg, lambda),
                                                      scenario.k),
                                            {}, client.trace_bound, box)});
      }
      catch (const ParameterError &e)
      {
        fail_parameter("client ", m + 1, ": ", e.what());
      }
    }
    grid.clients.push_back(std::move(axis));
  }
  return grid;
}

inline CostSurface heuristic_sweep(const std::vector<Vector> &lambdas, const ScenarioConfig &scenario,
                                   const std::vector<ClientDataset> &datasets,
                                   const std::vector<ClusterModel> &models, std::size_t n_samples,
                                   std::uint64_t seed, const SweepOptions &options = {})
{
  return sweep_grid(heuristic_grid(lambdas, scenario, datasets), scenario, datasets, models,
                    n_samples, seed, options);
}

/// Header: axis names..., cost_client_1..M, cost_fc, mc_stderr_1..M.
inline void write_surface_csv(std::ostream &os, const CostSurface &surface)
{
  const std::size_t m_count = surface.clients();
  bool              first = true;
  auto              sep = [&]() -> std::ostream & {
    if (!first)
    {
      os << ',';
    }
    first = false;
    return os;
  };
  for (const auto &names : surface.axis_names)
  {
    for (const auto &n : names)
    {
      sep() << n;
    }
  }
  for (std::size_t m = 1; m <= m_count; ++m)
  {
    sep() << "cost_client_" << m;
  }
  sep() << "cost_fc";
  for (std::size_t m = 1; m <= m_count; ++m)
  {
    sep() << "mc_stderr_" << m;
  }
  os << '\n';

  for (std::size_t cell = 0; cell < surface.cell_count(); ++cell)
  {
    first = true;
    const auto idx = surface.unravel(cell);
    for (std::size_t m = 0; m < m_count; ++m)
    {
      for (double c : surface.axis_coords[m][idx[m]])
      {
        sep() << format_double(c);
      }
    }
    for (std::size_t m = 0; m < m_count; ++m)
    {
      sep() << format_double(surface.client_costs[m][cell]);
    }
    sep() << format_double(surface.fc_cost[cell]);
    for (std::size_t m = 0; m < m_count; ++m)
    {
      sep() << format_double(surface.client_stderr[m][cell]);
    }
    os << '\n';
  }
}

inline nlohmann::json point_json(const CostSurface &surface, const std::vector<std::size_t> &idx)
{
  nlohmann::json coords = nlohmann::json::array();
  for (std::size_t m = 0; m < idx.size(); ++m)
  {
    coords.push_back(surface.axis_coords[m][idx[m]]);
  }
  const std::size_t cell = surface.ravel(idx);
  Vector            costs;
  for (const auto &c : surface.client_costs)
  {
    costs.push_back(c[cell]);
  }
  return {{"index", idx},
          {"coords", coords},
          {"client_costs", costs},
          {"sum_cost", surface.sum_cost(cell)},
          {"fc_cost", surface.fc_cost[cell]}};
}

/// JSON with ne_points, poa (null when undefined), min_sum_cost_point and epsilon.
inline nlohmann::json equilibria_json(const EquilibriumReport &report, const CostSurface &surface)
{
  nlohmann::json j;
  j["epsilon"] = report.epsilon;
  j["ne_points"] = nlohmann::json::array();
  for (const auto &p : report.ne_points)
  {
    j["ne_points"].push_back(point_json(surface, p));
  }
  j["poa"] = std::isfinite(report.poa) ? nlohmann::json(report.poa) : nlohmann::json(nullptr);
  j["min_sum_cost_point"] = point_json(surface, report.min_sum_cost_point);
  j["axis_names"] = surface.axis_names;
  j["mc_samples"] = surface.mc_samples;
  j["seed"] = surface.seed;
  return j;
}

}  // namespace sfl
