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

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sfl/common.hpp"

namespace sfl {

/// Exponent of an L_p norm: a real p >= 1, or exactly infinity.
class NormExponent
{
public:
  constexpr NormExponent() = default;

  explicit NormExponent(double p)
  {
    if (std::isinf(p) && p > 0.0)
    {
      infinite_ = true;
      return;
    }
    if (!(p >= 1.0) || !std::isfinite(p))
    {
      fail_parameter("p must be >= 1 or inf, got ", p);
    }
    value_ = p;
  }

  static NormExponent infinity()
  {
    NormExponent e;
    e.infinite_ = true;
    return e;
  }

  bool   is_infinite() const { return infinite_; }
  double value() const { return infinite_ ? std::numeric_limits<double>::infinity() : value_; }

  std::string to_string() const { return infinite_ ? "inf" : format_double(value_); }

  bool operator==(const NormExponent &other) const
  {
    return infinite_ == other.infinite_ && (infinite_ || value_ == other.value_);
  }

private:
  double value_{1.0};
  bool   infinite_{false};
};

/// Per-slot prices d(t) >= 0: the diagonal of D.
struct PriceMatrix
{
  Vector d;

  std::size_t size() const { return d.size(); }
};

/// Controllable consumption decided for one client.
struct Schedule
{
  Vector x;
  double energy_need{0.0};
};

struct ClientParams
{
  PriceMatrix  prices;
  double       energy{0.0};
  NormExponent p{1.0};
  int          delta{1};
  double       alpha{0.0};
  double       trace_bound{0.0};
  /// Box on each mean component; applies to every component of vec(R).
  double mu_min{-std::numeric_limits<double>::infinity()};
  double mu_max{std::numeric_limits<double>::infinity()};
};

/// All utility and game parameters of one experiment.
struct ScenarioConfig
{
  std::vector<ClientParams> clients;
  NormExponent              p = NormExponent::infinity();
  int                       delta{1};
  std::size_t               k{2};
  std::size_t               t_slots{2};
  std::size_t               mc_samples{2000};
  std::uint64_t             seed{0};
  /// Grid step of the exhaustive schedule search used off the waterfilling path.
  double brute_force_step{1e-3};

  std::size_t clients_count() const { return clients.size(); }
};

/// Every violated range, one message per problem.
inline std::vector<std::string> check(const ScenarioConfig &s)
{
  std::vector<std::string> issues;
  auto                     add = [&](auto &&...parts) { issues.push_back(detail::concat(parts...)); };
  if (s.clients.empty())
  {
    add("scenario needs at least one client");
  }
  if (s.delta != 1 && s.delta != -1)
  {
    add("delta must be +1 or -1, got ", s.delta);
  }
  if (s.k == 0)
  {
    add("k must be >= 1");
  }
  if (s.t_slots == 0)
  {
    add("t_slots must be >= 1");
  }
  if (s.mc_samples == 0)
  {
    add("mc_samples must be >= 1");
  }
  if (!(s.brute_force_step > 0.0))
  {
    add("brute_force_step must be > 0");
  }
  for (std::size_t m = 0; m < s.clients.size(); ++m)
  {
    const auto &c = s.clients[m];
    const auto  where = detail::concat("client ", m + 1, ": ");
    if (c.prices.size() != s.t_slots)
    {
      add(where, "prices have ", c.prices.size(), " entries, expected T = ", s.t_slots);
    }
    for (double d : c.prices.d)
    {
      if (!(d >= 0.0) || !std::isfinite(d))
      {
        add(where, "prices must be finite and >= 0");
        break;
      }
    }
    if (!(c.energy >= 0.0) || !std::isfinite(c.energy))
    {
      add(where, "energy need must be finite and >= 0");
    }
    if (c.delta != 1 && c.delta != -1)
    {
      add(where, "delta must be +1 or -1, got ", c.delta);
    }
    if (!(c.alpha >= 0.0) || !std::isfinite(c.alpha))
    {
      add(where, "alpha must be finite and >= 0");
    }
    if (!(c.trace_bound >= 0.0))
    {
      add(where, "trace bound V must be >= 0");
    }
    if (!(c.mu_min <= c.mu_max))
    {
      add(where, "mu_min must be <= mu_max");
    }
  }
  return issues;
}

inline void require_valid(const ScenarioConfig &s)
{
  auto issues = check(s);
  if (!issues.empty())
  {
    throw ParameterError(issues.front());
  }
}

}  // namespace sfl
