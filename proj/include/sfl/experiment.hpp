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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sfl/clustering.hpp"
#include "sfl/common.hpp"
#include "sfl/dataio.hpp"
#include "sfl/game.hpp"
#include "sfl/scenario.hpp"
#include "sfl/strategy.hpp"

namespace sfl {

inline constexpr const char *kVersion = "0.1.0";

enum class ExperimentKind
{
  sweep_single,
  sweep_two,
  region,
  heuristic_sweep,
};

inline const char *to_string(ExperimentKind kind)
{
  switch (kind)
  {
  case ExperimentKind::sweep_single:
    return "sweep-single";
  case ExperimentKind::sweep_two:
    return "sweep-two";
  case ExperimentKind::region:
    return "region";
  case ExperimentKind::heuristic_sweep:
    return "heuristic-sweep";
  }
  return "?";
}

struct SynthSource
{
  std::size_t  clients{1};
  std::size_t  samples{30};
  SynthProfile profile;
};

struct CsvSource
{
  std::string path;
  CsvSchema   schema;
  MeterFilter filter;
};

struct RangeSpec
{
  double min{0.0};
  double max{0.0};
  double step{1.0};
};

/// A parsed experiment; produced by parse_config.
struct ExperimentConfig
{
  std::variant<SynthSource, CsvSource> data;
  ScenarioConfig                       scenario;
  KMeansOptions                        kmeans;
  ExperimentKind                       kind{ExperimentKind::sweep_single};

  /// Mean-grid form: varied components (0-based) with their ranges, plus variance levels.
  std::vector<std::pair<std::size_t, RangeSpec>> mean_axes;
  Vector                                         variances{0.0};
  /// Explicit form: the candidate actions of each client (overrides mean_axes).
  std::vector<std::vector<NoiseAction>> explicit_actions;
  RangeSpec                             lambda{0.0, 0.0, 1.0};

  std::optional<double> epsilon;
  std::string           output_dir{"out"};
  std::size_t           jobs{1};
  std::size_t           max_cells{1'000'000};

  /// The source document, echoed into the run manifest.
  nlohmann::json source;
};

struct ConfigParse
{
  std::optional<ExperimentConfig> config;
  std::vector<std::string>        diagnostics;
};

namespace detail {

/// Collects every problem found while reading a JSON document, each prefixed with its path.
class ConfigReader
{
public:
  std::vector<std::string> issues;

  template <typename... Args>
  void report(const std::string &where, Args &&...args)
  {
    issues.push_back(where + ": " + concat(std::forward<Args>(args)...));
  }

  const nlohmann::json *child(const nlohmann::json &obj, const std::string &key) const
  {
    if (!obj.is_object())
    {
      return nullptr;
    }
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  std::optional<double> number(const nlohmann::json &obj, const std::string &key,
                               const std::string &where)
  {
    const auto *v = child(obj, key);
    if (!v)
    {
      return std::nullopt;
    }
    if (!v->is_number())
    {
      report(where + "." + key, "expected a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<std::uint64_t> count(const nlohmann::json &obj, const std::string &key,
                                     const std::string &where)
  {
    const auto *v = child(obj, key);
    if (!v)
    {
      return std::nullopt;
    }
    if (!v->is_number_integer() || v->get<std::int64_t>() < 0)
    {
      report(where + "." + key, "expected a non-negative integer");
      return std::nullopt;
    }
    return v->get<std::uint64_t>();
  }

  std::optional<std::string> text(const nlohmann::json &obj, const std::string &key,
                                  const std::string &where)
  {
    const auto *v = child(obj, key);
    if (!v)
    {
      return std::nullopt;
    }
    if (!v->is_string())
    {
      report(where + "." + key, "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<Vector> numbers(const nlohmann::json &value, const std::string &where)
  {
    if (!value.is_array())
    {
      report(where, "expected an array of numbers");
      return std::nullopt;
    }
    Vector out;
    for (const auto &v : value)
    {
      if (!v.is_number())
      {
        report(where, "expected an array of numbers");
        return std::nullopt;
      }
      out.push_back(v.get<double>());
    }
    return out;
  }

  std::optional<NormExponent> exponent(const nlohmann::json &obj, const std::string &key,
                                       const std::string &where)
  {
    const auto *v = child(obj, key);
    if (!v)
    {
      return std::nullopt;
    }
    if (v->is_string() && (v->get<std::string>() == "inf" || v->get<std::string>() == "Infinity"))
    {
      return NormExponent::infinity();
    }
    if (v->is_number() && v->get<double>() >= 1.0)
    {
      return NormExponent(v->get<double>());
    }
    report(where + "." + key, "p must be ≥ 1 or ∞");
    return std::nullopt;
  }

  std::optional<int> sign(const nlohmann::json &obj, const std::string &key, const std::string &where)
  {
    const auto *v = child(obj, key);
    if (!v)
    {
      return std::nullopt;
    }
    if (!v->is_number_integer() || (v->get<int>() != 1 && v->get<int>() != -1))
    {
      report(where + "." + key, "delta must be +1 or -1");
      return std::nullopt;
    }
    return v->get<int>();
  }

  std::optional<RangeSpec> range(const nlohmann::json &value, const std::string &where)
  {
    if (!value.is_object())
    {
      report(where, "expected {min, max, step}");
      return std::nullopt;
    }
    auto lo = number(value, "min", where);
    auto hi = number(value, "max", where);
    auto step = number(value, "step", where);
    if (!lo || !hi)
    {
      report(where, "range needs min and max");
      return std::nullopt;
    }
    RangeSpec r{*lo, *hi, step.value_or(1.0)};
    if (r.min > r.max)
    {
      report(where, "min must be <= max");
      return std::nullopt;
    }
    if (!(r.step > 0.0))
    {
      report(where + ".step", "step must be > 0");
      return std::nullopt;
    }
    return r;
  }
};

inline void read_client_params(ConfigReader &reader, const nlohmann::json &obj,
                               const std::string &where, ClientParams &c)
{
  if (!obj.is_object())
  {
    reader.report(where, "expected an object");
    return;
  }
  if (const auto *prices = reader.child(obj, "prices"))
  {
    if (auto d = reader.numbers(*prices, where + ".prices"))
    {
      c.prices.d = *d;
    }
  }
  if (auto v = reader.number(obj, "energy", where))
  {
    c.energy = *v;
  }
  if (auto v = reader.exponent(obj, "p", where))
  {
    c.p = *v;
  }
  if (auto v = reader.sign(obj, "delta", where))
  {
    c.delta = *v;
  }
  if (auto v = reader.number(obj, "alpha", where))
  {
    c.alpha = *v;
  }
  if (auto v = reader.number(obj, "trace_bound", where))
  {
    c.trace_bound = *v;
  }
  if (auto v = reader.number(obj, "mu_min", where))
  {
    c.mu_min = *v;
  }
  if (auto v = reader.number(obj, "mu_max", where))
  {
    c.mu_max = *v;
  }
}

/// Covariance of an explicit action: "sigma_diag" list or full "sigma" matrix.
inline std::optional<Vector> read_sigma(ConfigReader &reader, const nlohmann::json &obj,
                                        const std::string &where, std::size_t n)
{
  if (const auto *diag = reader.child(obj, "sigma_diag"))
  {
    auto d = reader.numbers(*diag, where + ".sigma_diag");
    if (!d)
    {
      return std::nullopt;
    }
    if (d->size() != n)
    {
      reader.report(where + ".sigma_diag", "expected ", n, " entries, got ", d->size());
      return std::nullopt;
    }
    Vector sigma(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
      sigma[i * n + i] = (*d)[i];
    }
    return sigma;
  }
  if (const auto *full = reader.child(obj, "sigma"))
  {
    if (!full->is_array() || full->size() != n)
    {
      reader.report(where + ".sigma", "expected a ", n, "x", n, " matrix");
      return std::nullopt;
    }
    Vector sigma;
    for (std::size_t i = 0; i < n; ++i)
    {
      auto row = reader.numbers((*full)[i], where + ".sigma[" + std::to_string(i) + "]");
      if (!row || row->size() != n)
      {
        reader.report(where + ".sigma", "expected a ", n, "x", n, " matrix");
        return std::nullopt;
      }
      sigma.insert(sigma.end(), row->begin(), row->end());
    }
    return sigma;
  }
  return Vector{};
}

}  // namespace detail

/// Parses and checks an experiment document. Every violation reachable without loading
/// data is listed; `config` is set only when there are none.
inline ConfigParse parse_config(const nlohmann::json &doc)
{
  detail::ConfigReader reader;
  ExperimentConfig     cfg;
  cfg.source = doc;
  if (!doc.is_object())
  {
    return {std::nullopt, {"config: expected a JSON object"}};
  }

  if (auto v = reader.count(doc, "seed", "config"))
  {
    cfg.scenario.seed = *v;
  }
  if (auto v = reader.text(doc, "output", "config"))
  {
    cfg.output_dir = *v;
  }
  if (auto v = reader.count(doc, "jobs", "config"))
  {
    cfg.jobs = std::max<std::size_t>(1, *v);
  }
  if (auto v = reader.count(doc, "max_cells", "config"))
  {
    cfg.max_cells = *v;
  }

  // Data source
  std::optional<std::size_t> m_count;
  std::size_t                t_slots = 0;
  const auto                *data = reader.child(doc, "data");
  if (!data || !data->is_object())
  {
    reader.report("data", "missing data source");
  }
  else
  {
    const auto *synth = reader.child(*data, "synthetic");
    const auto *csv = reader.child(*data, "csv");
    if ((synth != nullptr) == (csv != nullptr))
    {
      reader.report("data", "exactly one of 'synthetic' or 'csv' is required");
    }
    else if (synth)
    {
      SynthSource src;
      src.clients = reader.count(*synth, "clients", "data.synthetic").value_or(1);
      src.samples = reader.count(*synth, "samples", "data.synthetic").value_or(30);
      t_slots = reader.count(*synth, "slots", "data.synthetic").value_or(2);
      src.profile.amplitude = reader.number(*synth, "amplitude", "data.synthetic").value_or(0.0);
      if (src.clients == 0 || src.samples == 0 || t_slots == 0)
      {
        reader.report("data.synthetic", "clients, samples and slots must be >= 1");
      }
      if (!(src.profile.amplitude >= 0.0))
      {
        reader.report("data.synthetic.amplitude", "amplitude must be >= 0");
      }
      const auto *base = reader.child(*synth, "base");
      if (!base || !base->is_array() || base->empty())
      {
        reader.report("data.synthetic.base", "expected a list of per-slot base vectors");
      }
      else
      {
        for (std::size_t i = 0; i < base->size(); ++i)
        {
          const auto where = "data.synthetic.base[" + std::to_string(i) + "]";
          if (auto b = reader.numbers((*base)[i], where))
          {
            if (b->size() != t_slots)
            {
              reader.report(where, "expected ", t_slots, " slot values, got ", b->size());
            }
            src.profile.base.push_back(*b);
          }
        }
        if (src.profile.base.size() != 1 && src.profile.base.size() != src.clients)
        {
          reader.report("data.synthetic.base", "expected 1 or ", src.clients, " base vectors");
        }
      }
      m_count = src.clients;
      cfg.data = std::move(src);
    }
    else
    {
      CsvSource src;
      src.path = reader.text(*csv, "path", "data.csv").value_or("");
      if (src.path.empty())
      {
        reader.report("data.csv.path", "missing CSV path");
      }
      if (const auto *values = reader.child(*csv, "values"))
      {
        if (!values->is_array())
        {
          reader.report("data.csv.values", "expected a list of column names");
        }
        else
        {
          for (const auto &v : *values)
          {
            src.schema.reading_columns.push_back(v.is_string() ? v.get<std::string>() : v.dump());
          }
        }
      }
      else
      {
        src.schema = CsvSchema::with_prefix(reader.text(*csv, "value_prefix", "data.csv").value_or("v"));
      }
      if (src.schema.reading_columns.size() != kReadingsPerDay)
      {
        reader.report("data.csv.values", "expected ", kReadingsPerDay, " reading columns, got ",
                      src.schema.reading_columns.size());
      }
      src.schema.client_id_column =
          reader.text(*csv, "client_id", "data.csv").value_or(src.schema.client_id_column);
      src.schema.date_column = reader.text(*csv, "date", "data.csv").value_or(src.schema.date_column);
      src.schema.skip_lines = reader.count(*csv, "skip_lines", "data.csv").value_or(0);
      if (auto col = reader.text(*csv, "filter_column", "data.csv"))
      {
        src.schema.filter_column = *col;
        src.schema.filter_value = reader.text(*csv, "filter_value", "data.csv").value_or("");
      }
      if (const auto *ids = reader.child(*csv, "clients"))
      {
        if (!ids->is_array())
        {
          reader.report("data.csv.clients", "expected a list of client ids");
        }
        else
        {
          for (const auto &id : *ids)
          {
            src.filter.client_ids.push_back(id.is_string() ? id.get<std::string>() : id.dump());
          }
          m_count = src.filter.client_ids.size();
        }
      }
      for (const char *key : {"date_from", "date_to"})
      {
        if (auto d = reader.text(*csv, key, "data.csv"))
        {
          auto parsed = parse_date(*d);
          if (!parsed)
          {
            reader.report(std::string("data.csv.") + key, "unparseable date '", *d, "'");
          }
          else
          {
            (std::string(key) == "date_from" ? src.filter.date_from : src.filter.date_to) = parsed;
          }
        }
      }
      t_slots = reader.count(*csv, "slots", "data.csv").value_or(kReadingsPerDay);
      if (t_slots == 0 || kReadingsPerDay % t_slots != 0)
      {
        reader.report("data.csv.slots", "slots must divide ", kReadingsPerDay);
      }
      cfg.data = std::move(src);
    }
  }
  cfg.scenario.t_slots = t_slots;

  // Scenario
  const auto *scen = reader.child(doc, "scenario");
  if (!scen || !scen->is_object())
  {
    reader.report("scenario", "missing scenario");
  }
  else
  {
    if (auto v = reader.exponent(*scen, "p", "scenario"))
    {
      cfg.scenario.p = *v;
    }
    if (auto v = reader.sign(*scen, "delta", "scenario"))
    {
      cfg.scenario.delta = *v;
    }
    if (auto v = reader.count(*scen, "k", "scenario"))
    {
      cfg.scenario.k = *v;
    }
    if (auto v = reader.count(*scen, "mc_samples", "scenario"))
    {
      cfg.scenario.mc_samples = *v;
    }
    if (auto v = reader.number(*scen, "brute_force_step", "scenario"))
    {
      cfg.scenario.brute_force_step = *v;
    }
    if (auto v = reader.count(*scen, "kmeans_max_iter", "scenario"))
    {
      cfg.kmeans.max_iter = *v;
    }
    if (auto v = reader.number(*scen, "kmeans_tol", "scenario"))
    {
      cfg.kmeans.tol = *v;
    }

    ClientParams defaults;
    defaults.prices.d.assign(t_slots, 1.0);
    if (const auto *d = reader.child(*scen, "client_defaults"))
    {
      detail::read_client_params(reader, *d, "scenario.client_defaults", defaults);
    }
    if (const auto *list = reader.child(*scen, "clients"))
    {
      if (!list->is_array())
      {
        reader.report("scenario.clients", "expected a list");
      }
      else
      {
        for (std::size_t m = 0; m < list->size(); ++m)
        {
          ClientParams c = defaults;
          detail::read_client_params(reader, (*list)[m],
                                     "scenario.clients[" + std::to_string(m) + "]", c);
          cfg.scenario.clients.push_back(std::move(c));
        }
        if (m_count && *m_count != list->size())
        {
          reader.report("scenario.clients", "lists ", list->size(), " clients but the data has ",
                        *m_count);
        }
        m_count = list->size();
      }
    }
    else if (m_count)
    {
      cfg.scenario.clients.assign(*m_count, defaults);
    }
    else
    {
      reader.report("scenario.clients",
                    "the client count is unknown; list the clients or filter the CSV by id");
    }
    for (const auto &issue : check(cfg.scenario))
    {
      reader.issues.push_back("scenario: " + issue);
    }
    if (cfg.kmeans.max_iter == 0 || !(cfg.kmeans.tol > 0.0))
    {
      reader.report("scenario", "kmeans_max_iter must be >= 1 and kmeans_tol > 0");
    }
  }

  // Experiment
  const auto *exp = reader.child(doc, "experiment");
  if (!exp || !exp->is_object())
  {
    reader.report("experiment", "missing experiment");
  }
  else
  {
    const auto kind = reader.text(*exp, "kind", "experiment").value_or("");
    if (kind == "sweep-single")
    {
      cfg.kind = ExperimentKind::sweep_single;
    }
    else if (kind == "sweep-two")
    {
      cfg.kind = ExperimentKind::sweep_two;
    }
    else if (kind == "region")
    {
      cfg.kind = ExperimentKind::region;
    }
    else if (kind == "heuristic-sweep")
    {
      cfg.kind = ExperimentKind::heuristic_sweep;
    }
    else
    {
      reader.report("experiment.kind",
                    "expected sweep-single, sweep-two, region or heuristic-sweep, got '", kind, "'");
    }
    cfg.epsilon = reader.number(*exp, "epsilon", "experiment");
    if (cfg.epsilon && !(*cfg.epsilon >= 0.0))
    {
      reader.report("experiment.epsilon", "epsilon must be >= 0");
    }

    if (m_count)
    {
      const bool single = cfg.kind == ExperimentKind::sweep_single || cfg.kind == ExperimentKind::region;
      if (single && *m_count != 1)
      {
        reader.report("experiment.kind", kind, " needs exactly one client, the data has ", *m_count);
      }
      if (cfg.kind == ExperimentKind::sweep_two && *m_count != 2)
      {
        reader.report("experiment.kind", kind, " needs exactly two clients, the data has ", *m_count);
      }
    }

    const std::size_t dim = t_slots * cfg.scenario.k;
    auto              client_name = [](std::size_t m) { return "client " + std::to_string(m + 1); };

    if (cfg.kind == ExperimentKind::heuristic_sweep)
    {
      const auto *lambda = reader.child(*exp, "lambda");
      if (!lambda)
      {
        reader.report("experiment.lambda", "heuristic-sweep needs a lambda range");
      }
      else if (auto r = reader.range(*lambda, "experiment.lambda"))
      {
        cfg.lambda = *r;
        if (r->min < 0.0)
        {
          reader.report("experiment.lambda", "lambda must be >= 0");
        }
        for (std::size_t m = 0; m < cfg.scenario.clients.size(); ++m)
        {
          const auto &c = cfg.scenario.clients[m];
          if (r->max / 2.0 > c.mu_max || -r->max / 2.0 < c.mu_min)
          {
            reader.report("experiment.lambda", client_name(m), ": lambda/2 = ", r->max / 2.0,
                          " leaves the mean box [", c.mu_min, ", ", c.mu_max, "]");
          }
        }
      }
    }
    else if (const auto *actions = reader.child(*exp, "actions"))
    {
      if (!actions->is_array() || (m_count && actions->size() != *m_count))
      {
        reader.report("experiment.actions", "expected one action list per client");
      }
      else
      {
        for (std::size_t m = 0; m < actions->size(); ++m)
        {
          const auto &list = (*actions)[m];
          const auto  where = "experiment.actions[" + std::to_string(m) + "]";
          std::vector<NoiseAction> parsed;
          if (!list.is_array() || list.empty())
          {
            reader.report(where, "expected a non-empty list of actions");
            cfg.explicit_actions.push_back({});
            continue;
          }
          const ClientParams c = m < cfg.scenario.clients.size() ? cfg.scenario.clients[m]
                                                                   : ClientParams{};
          for (std::size_t a = 0; a < list.size(); ++a)
          {
            const auto aw = where + "[" + std::to_string(a) + "]";
            const auto *mu_json = reader.child(list[a], "mu");
            if (!mu_json)
            {
              reader.report(aw, "missing mu");
              continue;
            }
            auto mu = reader.numbers(*mu_json, aw + ".mu");
            if (!mu)
            {
              continue;
            }
            if (mu->size() == t_slots && dim != t_slots)
            {
              *mu = broadcast(*mu, cfg.scenario.k);
            }
            if (mu->size() != dim)
            {
              reader.report(aw + ".mu", "expected ", t_slots, " or ", dim, " entries, got ",
                            mu->size());
              continue;
            }
            auto sigma = detail::read_sigma(reader, list[a], aw, dim);
            if (!sigma)
            {
              continue;
            }
            NoiseAction::Box box;
            if (std::isfinite(c.mu_min) || std::isfinite(c.mu_max))
            {
              box.lower.assign(dim, c.mu_min);
              box.upper.assign(dim, c.mu_max);
            }
            try
            {
              parsed.emplace_back(*mu, *sigma, c.trace_bound, box);
            }
            catch (const ParameterError &e)
            {
              reader.report(aw, client_name(m), ": ", e.what());
            }
          }
          cfg.explicit_actions.push_back(std::move(parsed));
        }
      }
    }
    else
    {
      const auto *axes = reader.child(*exp, "mean_axes");
      if (!axes || !axes->is_array() || axes->empty())
      {
        reader.report("experiment.mean_axes", "expected a list of {component, min, max, step}");
      }
      else
      {
        for (std::size_t i = 0; i < axes->size(); ++i)
        {
          const auto where = "experiment.mean_axes[" + std::to_string(i) + "]";
          auto       comp = reader.count((*axes)[i], "component", where);
          auto       r = reader.range((*axes)[i], where);
          if (!comp || *comp < 1 || *comp > t_slots)
          {
            reader.report(where + ".component", "component must be in 1..", t_slots);
            continue;
          }
          if (r)
          {
            cfg.mean_axes.emplace_back(*comp - 1, *r);
            for (std::size_t m = 0; m < cfg.scenario.clients.size(); ++m)
            {
              const auto &c = cfg.scenario.clients[m];
              if (r->min < c.mu_min || r->max > c.mu_max)
              {
                reader.report(where, client_name(m), ": range [", r->min, ", ", r->max,
                              "] leaves the mean box [", c.mu_min, ", ", c.mu_max, "]");
              }
            }
          }
        }
      }
      if (const auto *vars = reader.child(*exp, "variances"))
      {
        if (auto v = reader.numbers(*vars, "experiment.variances"))
        {
          cfg.variances = *v;
        }
      }
      if (cfg.variances.empty())
      {
        reader.report("experiment.variances", "expected at least one variance level");
      }
      for (double v : cfg.variances)
      {
        if (!(v >= 0.0))
        {
          reader.report("experiment.variances", "variance levels must be >= 0");
          continue;
        }
        const double trace = v * static_cast<double>(dim);
        for (std::size_t m = 0; m < cfg.scenario.clients.size(); ++m)
        {
          if (trace > cfg.scenario.clients[m].trace_bound * (1.0 + 1e-12))
          {
            reader.report("experiment.variances", client_name(m), ": Tr(Σ) = ", trace,
                          " exceeds V_m = ", cfg.scenario.clients[m].trace_bound);
          }
        }
      }
    }
  }

  ConfigParse out;
  out.diagnostics = std::move(reader.issues);
  if (out.diagnostics.empty())
  {
    out.config = std::move(cfg);
  }
  return out;
}

inline nlohmann::json read_json_file(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw IoError("cannot read config '" + path + "'");
  }
  try
  {
    return nlohmann::json::parse(in);
  }
  catch (const nlohmann::json::parse_error &e)
  {
    throw ParameterError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

/// Diagnostics for a config file; empty when valid.
inline std::vector<std::string> validate_config(const std::string &path)
{
  nlohmann::json doc;
  try
  {
    doc = read_json_file(path);
  }
  catch (const ParameterError &e)
  {
    return {e.what()};
  }
  return parse_config(doc).diagnostics;
}

/// Command-line overrides applied on top of the config document.
struct RunOverrides
{
  std::optional<std::string>   output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t>   samples;
  std::optional<std::size_t>   jobs;
};

inline nlohmann::json apply_overrides(nlohmann::json doc, const RunOverrides &o)
{
  if (o.output_dir)
  {
    doc["output"] = *o.output_dir;
  }
  if (o.seed)
  {
    doc["seed"] = *o.seed;
  }
  if (o.samples)
  {
    doc["scenario"]["mc_samples"] = *o.samples;
  }
  if (o.jobs)
  {
    doc["jobs"] = *o.jobs;
  }
  return doc;
}

/// Everything computed by one run, before anything is written.
struct RunResult
{
  std::vector<ClientDataset> datasets;
  std::vector<ClusterModel>  models;
  CostSurface                surface;
  EquilibriumReport          equilibria;
  std::vector<RegionPoint>   region;
};

inline std::vector<ClientDataset> load_datasets(const ExperimentConfig &cfg)
{
  if (const auto *synth = std::get_if<SynthSource>(&cfg.data))
  {
    return synth_generate(synth->clients, synth->samples, cfg.scenario.t_slots, synth->profile,
                          derive_seed(cfg.scenario.seed, {0xda7a}));
  }
  const auto &csv = std::get<CsvSource>(cfg.data);
  auto        table = load_meter_csv(csv.path, csv.schema);
  table = filter_rows(table, csv.filter);
  auto datasets = resample(table, cfg.scenario.t_slots);
  if (!csv.filter.client_ids.empty())
  {
    // Follow the order of the configured id list.
    std::vector<ClientDataset> ordered;
    for (const auto &id : csv.filter.client_ids)
    {
      auto it = std::find_if(datasets.begin(), datasets.end(),
                             [&](const ClientDataset &d) { return d.client_id == id; });
      if (it == datasets.end())
      {
        throw EmptyDatasetError("client '" + id + "' has no rows in '" + csv.path + "'");
      }
      ordered.push_back(*it);
    }
    datasets = std::move(ordered);
  }
  return datasets;
}

/// Runs the configured experiment in memory: data, per-client k-means, then the sweep.
inline RunResult compute_experiment(const ExperimentConfig &cfg)
{
  RunResult result;
  result.datasets = load_datasets(cfg);
  ScenarioConfig scenario = cfg.scenario;
  if (result.datasets.size() != scenario.clients.size())
  {
    fail_parameter("scenario lists ", scenario.clients.size(), " clients but the data has ",
                   result.datasets.size());
  }
  require_valid(scenario);

  for (std::size_t m = 0; m < result.datasets.size(); ++m)
  {
    KMeansOptions opts = cfg.kmeans;
    opts.seed = derive_seed(scenario.seed, {0xc105, m});
    result.models.push_back(kmeans_fit(result.datasets[m], scenario.k, opts).model);
  }

  const SweepOptions sweep{cfg.jobs, cfg.max_cells};
  if (cfg.kind == ExperimentKind::heuristic_sweep)
  {
    const Vector lambdas = grid_values(cfg.lambda.min, cfg.lambda.max, cfg.lambda.step);
    result.surface = heuristic_sweep(std::vector<Vector>(scenario.clients.size(), lambdas), scenario,
                                     result.datasets, result.models, scenario.mc_samples,
                                     scenario.seed, sweep);
  }
  else
  {
    ActionGrid grid;
    for (std::size_t m = 0; m < scenario.clients.size(); ++m)
    {
      if (!cfg.explicit_actions.empty())
      {
        ClientAxis axis;
        axis.names = {"action" + std::to_string(m + 1)};
        for (std::size_t a = 0; a < cfg.explicit_actions[m].size(); ++a)
        {
          axis.actions.push_back({{static_cast<double>(a)}, cfg.explicit_actions[m][a]});
        }
        grid.clients.push_back(std::move(axis));
        continue;
      }
      std::vector<MeanAxis> axes;
      for (const auto &[component, range] : cfg.mean_axes)
      {
        axes.push_back({component, grid_values(range.min, range.max, range.step)});
      }
      grid.clients.push_back(make_mean_axis(scenario, m, axes, cfg.variances));
    }
    result.surface = sweep_grid(grid, scenario, result.datasets, result.models, scenario.mc_samples,
                                scenario.seed, sweep);
    if (cfg.kind == ExperimentKind::region)
    {
      result.region = feasible_region(grid, result.surface, scenario, result.datasets,
                                      result.models, scenario.mc_samples, scenario.seed);
    }
  }

  double epsilon = default_epsilon(result.surface);
  if (cfg.epsilon)
  {
    if (result.surface.sampled && *cfg.epsilon < epsilon)
    {
      warn(detail::concat("epsilon ", *cfg.epsilon, " is below 3x the Monte-Carlo standard error; using ",
                          epsilon));
    }
    else
    {
      epsilon = *cfg.epsilon;
    }
  }
  result.equilibria = find_pure_ne(result.surface, epsilon);
  return result;
}

inline void write_region_csv(std::ostream &os, const std::vector<RegionPoint> &region,
                             const std::vector<std::string> &axis_names)
{
  for (const auto &n : axis_names)
  {
    os << n << ',';
  }
  os << "cost_client,cost_fc,truthful,dominates_truthful\n";
  auto truthful = std::find_if(region.begin(), region.end(),
                               [](const RegionPoint &p) { return p.truthful; });
  for (const auto &p : region)
  {
    for (std::size_t i = 0; i < axis_names.size(); ++i)
    {
      os << format_double(i < p.coords.size() ? p.coords[i] : 0.0) << ',';
    }
    const bool dominates = truthful != region.end() && pareto_dominates(p, *truthful);
    os << format_double(p.client_cost) << ',' << format_double(p.fc_cost) << ','
       << (p.truthful ? 1 : 0) << ',' << (dominates ? 1 : 0) << '\n';
  }
}

namespace detail {

inline void write_text(const std::filesystem::path &path, const std::string &content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw IoError("cannot write '" + path.string() + "'");
  }
  out << content;
  if (!out)
  {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

inline std::string safe_file_name(std::string id)
{
  for (auto &c : id)
  {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.')
    {
      c = '_';
    }
  }
  return id;
}

}  // namespace detail

/// Paths written by run_experiment.
struct RunOutputs
{
  std::vector<std::filesystem::path> files;
};

/// Computes the experiment, then writes surface.csv, equilibria.json, models/, data.csv,
/// region.csv (region runs) and manifest.json into the output directory.
inline RunOutputs run_experiment(const ExperimentConfig &cfg)
{
  const RunResult result = compute_experiment(cfg);

  std::vector<std::pair<std::filesystem::path, std::string>> files;
  {
    std::ostringstream os;
    write_surface_csv(os, result.surface);
    files.emplace_back("surface.csv", os.str());
  }
  files.emplace_back("equilibria.json", equilibria_json(result.equilibria, result.surface).dump(2) + "\n");
  for (std::size_t m = 0; m < result.models.size(); ++m)
  {
    std::ostringstream os;
    write_representatives_csv(os, result.models[m].representatives);
    files.emplace_back(std::filesystem::path("models") /
                           ("client_" + detail::safe_file_name(result.datasets[m].client_id) + ".csv"),
                       os.str());
  }
  {
    std::ostringstream os;
    write_dataset_csv(os, result.datasets);
    files.emplace_back("data.csv", os.str());
  }
  if (cfg.kind == ExperimentKind::region)
  {
    std::ostringstream os;
    write_region_csv(os, result.region, result.surface.axis_names.front());
    files.emplace_back("region.csv", os.str());
  }

  nlohmann::json manifest;
  manifest["tool"] = "sfl";
  manifest["version"] = kVersion;
  manifest["compiler"] = __VERSION__;
  manifest["kind"] = to_string(cfg.kind);
  manifest["seed"] = cfg.scenario.seed;
  manifest["mc_samples"] = cfg.scenario.mc_samples;
  manifest["jobs"] = cfg.jobs;
  manifest["epsilon"] = result.equilibria.epsilon;
  manifest["cells"] = result.surface.cell_count();
  manifest["config"] = cfg.source;
  manifest["outputs"] = nlohmann::json::array();
  for (const auto &[path, content] : files)
  {
    manifest["outputs"].push_back(path.generic_string());
  }
  files.emplace_back("manifest.json", manifest.dump(2) + "\n");

  const std::filesystem::path root(cfg.output_dir);
  RunOutputs                  outputs;
  try
  {
    std::filesystem::create_directories(root / "models");
  }
  catch (const std::filesystem::filesystem_error &e)
  {
    throw IoError("cannot create output directory '" + root.string() + "': " + e.what());
  }
  for (const auto &[path, content] : files)
  {
    detail::write_text(root / path, content);
    outputs.files.push_back(root / path);
  }
  return outputs;
}

}  // namespace sfl
