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
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "sfl/common.hpp"
#include "sfl/scenario.hpp"
#include "sfl/utility.hpp"

namespace sfl {

struct WaterfillResult
{
  Vector x;
  double level{0.0};
};

/// x(t) = max(0, w c(t) - g(t)) with the level w chosen so that sum x = e_total.
/// The level is found exactly from the sorted breakpoints g(t)/c(t).
inline WaterfillResult weighted_waterfill(std::span<const double> g, std::span<const double> c,
                                          double e_total, double tol = 1e-9)
{
  const std::size_t t = g.size();
  if (t == 0 || c.size() != t)
  {
    fail_parameter("waterfill needs matching non-empty level and weight vectors");
  }
  if (!(e_total >= 0.0) || !std::isfinite(e_total))
  {
    fail_parameter("energy to waterfill must be finite and >= 0, got ", e_total);
  }
  for (std::size_t i = 0; i < t; ++i)
  {
    if (!std::isfinite(g[i]) || !(c[i] > 0.0) || !std::isfinite(c[i]))
    {
      fail_parameter("waterfill needs finite levels and finite positive weights");
    }
  }

  std::vector<std::size_t> order(t);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto breakpoint = [&](std::size_t i) { return g[i] / c[i]; };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return breakpoint(a) < breakpoint(b); });

  double level = 0.0;
  double g_sum = 0.0;
  double c_sum = 0.0;
  for (std::size_t k = 0; k < t; ++k)
  {
    g_sum += g[order[k]];
    c_sum += c[order[k]];
    level = (e_total + g_sum) / c_sum;
    if (k + 1 == t || level <= breakpoint(order[k + 1]))
    {
      break;
    }
  }

  WaterfillResult out{Vector(t, 0.0), level};
  double          total = 0.0;
  for (std::size_t i = 0; i < t; ++i)
  {
    out.x[i] = std::max(0.0, level * c[i] - g[i]);
    total += out.x[i];
  }
  if (std::abs(total - e_total) > tol * std::max(1.0, e_total))
  {
    throw Error(detail::concat("waterfill missed the energy target: ", total, " vs ", e_total));
  }
  return out;
}

/// Minimizer of ||x + g||_p over {x >= 0, sum x = e_total} for every p in (1, inf].
inline WaterfillResult waterfill(std::span<const double> g_total, double e_total, double tol = 1e-9)
{
  const Vector ones(g_total.size(), 1.0);
  return weighted_waterfill(g_total, ones, e_total, tol);
}

/// Splits a total schedule in proportion to the energy needs.
inline std::vector<Schedule> split_allocation(std::span<const double> x_total,
                                              const std::vector<double> &energy_needs)
{
  double need = 0.0;
  for (double e : energy_needs)
  {
    if (!(e >= 0.0) || !std::isfinite(e))
    {
      fail_parameter("energy needs must be finite and >= 0");
    }
    need += e;
  }
  double supplied = 0.0;
  for (double v : x_total)
  {
    supplied += v;
  }
  if (std::abs(need - supplied) > 1e-9 * std::max(1.0, need))
  {
    fail_parameter("split_allocation: energy needs sum to ", need, " but the schedule holds ",
                   supplied);
  }

  std::vector<Schedule> out;
  out.reserve(energy_needs.size());
  if (need == 0.0)
  {
    for (double e : energy_needs)
    {
      out.push_back({Vector(x_total.size(), 0.0), e});
    }
    return out;
  }
  for (double e : energy_needs)
  {
    Schedule s{Vector(x_total.size(), 0.0), e};
    if (energy_needs.size() == 1)
    {
      s.x.assign(x_total.begin(), x_total.end());
    }
    else
    {
      const double share = e / need;
      for (std::size_t t = 0; t < x_total.size(); ++t)
      {
        s.x[t] = share * x_total[t];
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Limits of the exhaustive schedule search.
inline constexpr std::size_t kBruteForceMaxDimensions = 4;
inline constexpr double      kBruteForceMaxPoints = 2e9;

namespace detail {

/// Next composition of sum(c) into c.size() parts in lexicographic order.
inline bool next_composition(std::vector<std::size_t> &c)
{
  const std::size_t t = c.size();
  if (t < 2)
  {
    return false;
  }
  std::size_t suffix = 0;
  for (std::size_t i = t - 1; i-- > 0;)
  {
    suffix += c[i + 1];
    if (suffix > 0)
    {
      ++c[i];
      for (std::size_t j = i + 1; j < t; ++j)
      {
        c[j] = 0;
      }
      c[t - 1] = suffix - 1;
      return true;
    }
  }
  return false;
}

inline void first_composition(std::vector<std::size_t> &c, std::size_t units)
{
  std::fill(c.begin(), c.end(), 0);
  c.back() = units;
}

}  // namespace detail

/// Exhaustive maximization of `objective(xs)` over profiles where each xs[m] lies on the
/// discretized simplex {x >= 0, sum x = energies[m]} with spacing at most `step`.
/// Profiles are visited in lexicographic order of the concatenated vector and only a
/// strict improvement (beyond 1e-12 relative) replaces the incumbent, so ties resolve to
/// the lexicographically smallest profile.
template <typename Objective>
std::vector<Vector> brute_force_maximize(const std::vector<double> &energies, std::size_t t,
                                         double step, Objective &&objective)
{
  const std::size_t m_count = energies.size();
  if (m_count == 0 || t == 0)
  {
    fail_parameter("brute-force search needs at least one client and one slot");
  }
  if (!(step > 0.0))
  {
    fail_parameter("brute-force grid step must be > 0");
  }
  const std::size_t dims = m_count * (t - 1);
  if (dims > kBruteForceMaxDimensions)
  {
    throw BudgetError(detail::concat("brute-force schedule search needs M*(T-1) = ", dims,
                                     " dimensions; the limit is ", kBruteForceMaxDimensions));
  }

  std::vector<std::size_t>              units(m_count);
  Vector                                unit(m_count);
  double                                points = 1.0;
  for (std::size_t m = 0; m < m_count; ++m)
  {
    const double e = energies[m];
    if (!(e >= 0.0) || !std::isfinite(e))
    {
      fail_parameter("energy needs must be finite and >= 0");
    }
    units[m] = e == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(e / step - 1e-9));
    unit[m] = units[m] == 0 ? 0.0 : e / static_cast<double>(units[m]);
    // Number of compositions of units[m] into t parts.
    double count = 1.0;
    for (std::size_t j = 1; j < t; ++j)
    {
      count *= static_cast<double>(units[m] + j) / static_cast<double>(j);
    }
    points *= count;
  }
  if (points > kBruteForceMaxPoints)
  {
    throw BudgetError(detail::concat("brute-force schedule search needs ", points,
                                     " grid points; the limit is ", kBruteForceMaxPoints));
  }

  std::vector<std::vector<std::size_t>> counts(m_count, std::vector<std::size_t>(t));
  std::vector<Vector>                   xs(m_count, Vector(t, 0.0));
  auto refresh = [&](std::size_t m) {
    for (std::size_t i = 0; i < t; ++i)
    {
      xs[m][i] = static_cast<double>(counts[m][i]) * unit[m];
    }
  };
  for (std::size_t m = 0; m < m_count; ++m)
  {
    detail::first_composition(counts[m], units[m]);
    refresh(m);
  }

  std::vector<Vector> best = xs;
  double              best_value = -std::numeric_limits<double>::infinity();
  for (;;)
  {
    const double value = objective(static_cast<const std::vector<Vector> &>(xs));
    if (value > best_value + 1e-12 * (1.0 + std::abs(best_value)) ||
        best_value == -std::numeric_limits<double>::infinity())
    {
      best_value = value;
      best = xs;
    }
    std::size_t m = m_count;
    while (m-- > 0)
    {
      if (detail::next_composition(counts[m]))
      {
        refresh(m);
        break;
      }
      detail::first_composition(counts[m], units[m]);
      refresh(m);
    }
    if (m == static_cast<std::size_t>(-1))
    {
      break;
    }
  }
  return best;
}

/// Exhaustive solver for the FC problem: maximizes U(x; g_hat) on the grid.
inline std::vector<Schedule> brute_force_schedule(const std::vector<Vector> &g_hat,
                                                  const ScenarioConfig &scenario, double grid_step)
{
  const std::size_t m_count = scenario.clients.size();
  if (g_hat.size() != m_count || m_count == 0)
  {
    fail_parameter("brute_force_schedule needs one state estimate per client");
  }
  const std::size_t t = g_hat.front().size();
  std::vector<double> energies;
  for (std::size_t m = 0; m < m_count; ++m)
  {
    if (g_hat[m].size() != t || scenario.clients[m].prices.size() != t)
    {
      fail_parameter("brute_force_schedule dimension mismatch for client ", m + 1);
    }
    energies.push_back(scenario.clients[m].energy);
  }

  Vector total(t);
  Vector scratch(t);
  auto   objective = [&](const std::vector<Vector> &xs) {
    std::fill(total.begin(), total.end(), 0.0);
    double u = 0.0;
    for (std::size_t m = 0; m < m_count; ++m)
    {
      const auto &client = scenario.clients[m];
      for (std::size_t i = 0; i < t; ++i)
      {
        total[i] += xs[m][i] + scenario.delta * g_hat[m][i];
      }
      if (client.alpha != 0.0)
      {
        for (std::size_t i = 0; i < t; ++i)
        {
          scratch[i] = client.prices.d[i] * (xs[m][i] + client.delta * g_hat[m][i]);
        }
        u -= client.alpha * lp_norm(scratch, client.p);
      }
    }
    return u - lp_norm(total, scenario.p);
  };

  auto                  xs = brute_force_maximize(energies, t, grid_step, objective);
  std::vector<Schedule> out;
  for (std::size_t m = 0; m < m_count; ++m)
  {
    out.push_back({std::move(xs[m]), energies[m]});
  }
  return out;
}

/// True when the FC problem reduces to waterfilling over the summed estimates.
inline bool waterfill_applies(const ScenarioConfig &scenario)
{
  return scenario.delta == 1 &&
         std::all_of(scenario.clients.begin(), scenario.clients.end(),
                     [](const ClientParams &c) { return c.alpha == 0.0; });
}

/// The FC decision: argmax of U(x; g_hat) under the energy-need constraints (taken with
/// equality). Waterfills when all alpha are 0, delta = +1 and p > 1; otherwise searches
/// the grid exhaustively.
inline std::vector<Schedule> fc_schedule(const std::vector<Vector> &g_hat,
                                         const ScenarioConfig &scenario)
{
  const std::size_t m_count = scenario.clients.size();
  if (g_hat.size() != m_count || m_count == 0)
  {
    fail_parameter("fc_schedule needs one state estimate per client, got ", g_hat.size(), " for ",
                   m_count);
  }
  const std::size_t t = g_hat.front().size();
  for (const auto &g : g_hat)
  {
    if (g.size() != t)
    {
      fail_parameter("fc_schedule state estimates disagree on T");
    }
  }

  std::vector<double> energies;
  double              e_total = 0.0;
  for (const auto &c : scenario.clients)
  {
    energies.push_back(c.energy);
    e_total += c.energy;
  }

  if (waterfill_applies(scenario))
  {
    if (!scenario.p.is_infinite() && scenario.p.value() == 1.0)
    {
      warn("FC objective with p = 1 and delta = +1 does not depend on the allocation; "
           "returning the uniform schedule");
      std::vector<Schedule> out;
      for (double e : energies)
      {
        out.push_back({Vector(t, e / static_cast<double>(t)), e});
      }
      return out;
    }
    Vector g_total(t, 0.0);
    for (const auto &g : g_hat)
    {
      for (std::size_t i = 0; i < t; ++i)
      {
        g_total[i] += g[i];
      }
    }
    const auto filled = waterfill(g_total, e_total);
    return split_allocation(filled.x, energies);
  }

  if (scenario.delta == -1 ||
      std::any_of(scenario.clients.begin(), scenario.clients.end(),
                  [](const ClientParams &c) { return c.alpha != 0.0 && c.delta == -1; }))
  {
    warn("tracking objective (delta = -1): the energy constraint is solved on its equality face");
  }
  return brute_force_schedule(g_hat, scenario, scenario.brute_force_step);
}

/// The schedule a client would pick for itself: cheapest slot for p = 1, price-weighted
/// waterfilling x(t) = max(0, w / (2 d(t)) - g(t)) for p = 2, grid search otherwise.
inline Schedule client_ideal_schedule(const PriceMatrix &prices, std::span<const double> g,
                                      double e, const NormExponent &p, double grid_step = 1e-3)
{
  const std::size_t t = prices.size();
  if (t == 0 || g.size() != t)
  {
    fail_parameter("client_ideal_schedule dimension mismatch");
  }
  if (!(e >= 0.0) || !std::isfinite(e))
  {
    fail_parameter("energy need must be finite and >= 0, got ", e);
  }
  Schedule out{Vector(t, 0.0), e};

  if (!p.is_infinite() && p.value() == 1.0)
  {
    const auto cheapest = static_cast<std::size_t>(
        std::min_element(prices.d.begin(), prices.d.end()) - prices.d.begin());
    out.x[cheapest] = e;
    return out;
  }
  if (!p.is_infinite() && p.value() == 2.0)
  {
    auto free_slot = std::find(prices.d.begin(), prices.d.end(), 0.0);
    if (free_slot != prices.d.end())
    {
      out.x[static_cast<std::size_t>(free_slot - prices.d.begin())] = e;
      return out;
    }
    Vector weights(t);
    for (std::size_t i = 0; i < t; ++i)
    {
      weights[i] = 1.0 / (2.0 * prices.d[i]);
    }
    out.x = weighted_waterfill(g, weights, e).x;
    return out;
  }

  ClientParams client;
  client.prices = prices;
  client.p = p;
  client.delta = 1;
  Vector scratch(t);
  auto   xs = brute_force_maximize({e}, t, grid_step, [&](const std::vector<Vector> &x) {
    for (std::size_t i = 0; i < t; ++i)
    {
      scratch[i] = prices.d[i] * (x[0][i] + g[i]);
    }
    return -lp_norm(scratch, p);
  });
  out.x = std::move(xs[0]);
  return out;
}

}  // namespace sfl
