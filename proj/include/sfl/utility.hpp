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
#include <span>
#include <vector>

#include "sfl/common.hpp"
#include "sfl/scenario.hpp"

namespace sfl {

/// (sum |v_t|^p)^(1/p); max |v_t| for p = inf.
inline double lp_norm(std::span<const double> v, const NormExponent &p)
{
  if (p.is_infinite())
  {
    double m = 0.0;
    for (double x : v)
    {
      m = std::max(m, std::abs(x));
    }
    return m;
  }
  const double e = p.value();
  if (e == 1.0)
  {
    double s = 0.0;
    for (double x : v)
    {
      s += std::abs(x);
    }
    return s;
  }
  if (e == 2.0)
  {
    double s = 0.0;
    for (double x : v)
    {
      s += x * x;
    }
    return std::sqrt(s);
  }
  // Scale by the max entry so large exponents neither overflow nor underflow.
  double scale = 0.0;
  for (double x : v)
  {
    scale = std::max(scale, std::abs(x));
  }
  if (scale == 0.0)
  {
    return 0.0;
  }
  double s = 0.0;
  for (double x : v)
  {
    s += std::pow(std::abs(x) / scale, e);
  }
  return scale * std::pow(s, 1.0 / e);
}

inline double lp_norm(std::span<const double> v, double p)
{
  return lp_norm(v, NormExponent(p));
}

/// u_m = -|| D_m (x_m + delta_m g_m) ||_{p_m}.
inline double client_utility(std::span<const double> x, std::span<const double> g,
                             const ClientParams &client)
{
  const std::size_t t = x.size();
  if (g.size() != t || client.prices.size() != t)
  {
    fail_parameter("client utility dimension mismatch: x ", t, ", g ", g.size(), ", prices ",
                   client.prices.size());
  }
  Vector v(t);
  for (std::size_t i = 0; i < t; ++i)
  {
    v[i] = client.prices.d[i] * (x[i] + client.delta * g[i]);
  }
  return -lp_norm(v, client.p);
}

inline double client_utility(const Schedule &x, std::span<const double> g,
                             const ScenarioConfig &scenario, std::size_t m)
{
  if (m >= scenario.clients.size())
  {
    fail_parameter("client index ", m, " out of range");
  }
  return client_utility(x.x, g, scenario.clients[m]);
}

/// u = -|| sum_m (x_m + delta g_m) ||_p.
inline double fc_common_utility(const std::vector<Schedule> &x_all, const std::vector<Vector> &g_all,
                                const NormExponent &p, int delta)
{
  if (x_all.empty() || x_all.size() != g_all.size())
  {
    fail_parameter("common utility needs matching non-empty schedule and state lists");
  }
  const std::size_t t = x_all.front().x.size();
  Vector            total(t, 0.0);
  for (std::size_t m = 0; m < x_all.size(); ++m)
  {
    if (x_all[m].x.size() != t || g_all[m].size() != t)
    {
      fail_parameter("common utility dimension mismatch for client ", m + 1);
    }
    for (std::size_t i = 0; i < t; ++i)
    {
      total[i] += x_all[m].x[i] + delta * g_all[m][i];
    }
  }
  return -lp_norm(total, p);
}

/// U = u(x; g_hat) + sum_m alpha_m u_m(x_m; g_hat_m), evaluated at the FC's state estimates.
inline double fc_total_utility(const std::vector<Schedule> &x_all,
                               const std::vector<Vector> &g_hat_all, const ScenarioConfig &scenario)
{
  if (x_all.size() != scenario.clients.size())
  {
    fail_parameter("total utility needs one schedule per client");
  }
  double u = fc_common_utility(x_all, g_hat_all, scenario.p, scenario.delta);
  for (std::size_t m = 0; m < x_all.size(); ++m)
  {
    const double alpha = scenario.clients[m].alpha;
    if (alpha != 0.0)
    {
      u += alpha * client_utility(x_all[m].x, g_hat_all[m], scenario.clients[m]);
    }
  }
  return u;
}

}  // namespace sfl
