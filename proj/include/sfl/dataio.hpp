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
#include <array>
#include <cctype>
#include <compare>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sfl/common.hpp"
#include "sfl/random.hpp"

namespace sfl {

/// Number of half-hourly readings per day in the raw meter format.
inline constexpr std::size_t kReadingsPerDay = 48;

struct CalendarDate
{
  int year{0};
  int month{0};
  int day{0};

  auto operator<=>(const CalendarDate &) const = default;

  std::string iso() const
  {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
  }
};

/// Accepts ISO "YYYY-MM-DD" and day-first "D/M/YYYY".
inline std::optional<CalendarDate> parse_date(std::string_view text)
{
  auto to_int = [](std::string_view s, int &out) {
    if (s.empty())
    {
      return false;
    }
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
  };

  CalendarDate d;
  char         sep = text.find('-') != std::string_view::npos ? '-' : '/';
  auto         first = text.find(sep);
  auto         second = first == std::string_view::npos ? first : text.find(sep, first + 1);
  if (second == std::string_view::npos)
  {
    return std::nullopt;
  }
  auto a = text.substr(0, first);
  auto b = text.substr(first + 1, second - first - 1);
  auto c = text.substr(second + 1);
  bool ok = sep == '-' ? (to_int(a, d.year) && to_int(b, d.month) && to_int(c, d.day))
                       : (to_int(a, d.day) && to_int(b, d.month) && to_int(c, d.year));
  if (!ok || d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
  {
    return std::nullopt;
  }
  return d;
}

struct RawMeterRow
{
  std::string                           client_id;
  CalendarDate                          date;
  std::array<double, kReadingsPerDay>   readings{};
};

struct RawMeterTable
{
  std::vector<RawMeterRow> rows;
  std::size_t              skipped{0};
};

/// Column mapping for a wide meter CSV: one row per (client, day), 48 reading columns.
struct CsvSchema
{
  std::string              client_id_column{"client_id"};
  std::string              date_column{"date"};
  std::vector<std::string> reading_columns;
  /// Lines to discard before the header (the raw Ausgrid export has a title line).
  std::size_t skip_lines{0};
  /// Keep only rows whose `filter_column` equals `filter_value` (e.g. a consumption category).
  std::optional<std::string> filter_column;
  std::string                filter_value;

  /// Reading columns named prefix1 .. prefix48.
  static CsvSchema with_prefix(const std::string &prefix)
  {
    CsvSchema schema;
    for (std::size_t i = 1; i <= kReadingsPerDay; ++i)
    {
      schema.reading_columns.push_back(prefix + std::to_string(i));
    }
    return schema;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string &line)
{
  std::vector<std::string> fields;
  std::string              field;
  bool                     quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i)
  {
    char c = line[i];
    if (quoted)
    {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
      {
        field += '"';
        ++i;
      }
      else if (c == '"')
      {
        quoted = false;
      }
      else
      {
        field += c;
      }
    }
    else if (c == '"')
    {
      quoted = true;
    }
    else if (c == ',')
    {
      fields.push_back(std::move(field));
      field.clear();
    }
    else if (c != '\r')
    {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

inline std::string trim(std::string s)
{
  auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::optional<double> parse_double(const std::string &text)
{
  double value{};
  auto   res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
  {
    return std::nullopt;
  }
  return value;
}

}  // namespace detail

/// Reads a wide meter CSV. Malformed, negative or non-finite rows are dropped and
/// counted in `skipped`; a repeated (client, date) keeps the first row.
inline RawMeterTable load_meter_csv(const std::string &path, const CsvSchema &schema)
{
  if (schema.reading_columns.size() != kReadingsPerDay)
  {
    fail_parameter("schema must name exactly ", kReadingsPerDay, " reading columns, got ",
                   schema.reading_columns.size());
  }

  std::ifstream in(path);
  if (!in)
  {
    throw IoError("cannot open meter CSV '" + path + "'");
  }

  std::string line;
  for (std::size_t i = 0; i < schema.skip_lines; ++i)
  {
    std::getline(in, line);
  }
  if (!std::getline(in, line))
  {
    throw EmptyDatasetError("meter CSV '" + path + "' has no header row");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
  {
    line.erase(0, 3);
  }

  auto header = detail::split_csv_line(line);
  for (auto &h : header)
  {
    h = detail::trim(h);
  }
  auto column_of = [&](const std::string &name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
    {
      throw ParameterError("column '" + name + "' not found in header of '" + path + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t        client_col = column_of(schema.client_id_column);
  const std::size_t        date_col = column_of(schema.date_column);
  std::vector<std::size_t> reading_cols;
  for (const auto &name : schema.reading_columns)
  {
    reading_cols.push_back(column_of(name));
  }
  std::optional<std::size_t> filter_col;
  if (schema.filter_column)
  {
    filter_col = column_of(*schema.filter_column);
  }

  RawMeterTable                                   table;
  std::set<std::pair<std::string, CalendarDate>>  seen;
  std::size_t                                     negative_rows = 0;
  while (std::getline(in, line))
  {
    if (detail::trim(line).empty())
    {
      continue;
    }
    auto fields = detail::split_csv_line(line);
    if (fields.size() < header.size())
    {
      ++table.skipped;
      continue;
    }
    if (filter_col && detail::trim(fields[*filter_col]) != schema.filter_value)
    {
      continue;
    }

    RawMeterRow row;
    row.client_id = detail::trim(fields[client_col]);
    auto date = parse_date(detail::trim(fields[date_col]));
    if (row.client_id.empty() || !date)
    {
      ++table.skipped;
      continue;
    }
    row.date = *date;

    bool valid = true;
    for (std::size_t i = 0; i < kReadingsPerDay && valid; ++i)
    {
      auto v = detail::parse_double(detail::trim(fields[reading_cols[i]]));
      if (!v || !std::isfinite(*v))
      {
        valid = false;
      }
      else if (*v < 0.0)
      {
        valid = false;
        ++negative_rows;
      }
      else
      {
        row.readings[i] = *v;
      }
    }
    if (!valid || !seen.emplace(row.client_id, row.date).second)
    {
      ++table.skipped;
      continue;
    }
    table.rows.push_back(std::move(row));
  }

  if (negative_rows > 0)
  {
    warn(detail::concat("skipped ", negative_rows, " row(s) with negative readings in '", path,
                        "'"));
  }
  if (table.skipped > 0)
  {
    warn(detail::concat("skipped ", table.skipped, " malformed row(s) in '", path, "'"));
  }
  if (table.rows.empty())
  {
    throw EmptyDatasetError("no valid meter rows in '" + path + "'");
  }
  return table;
}

/// Row filters applied after loading. Empty fields mean "no restriction".
struct MeterFilter
{
  std::vector<std::string>    client_ids;
  std::optional<CalendarDate> date_from;
  std::optional<CalendarDate> date_to;
};

inline RawMeterTable filter_rows(const RawMeterTable &table, const MeterFilter &filter)
{
  RawMeterTable out;
  out.skipped = table.skipped;
  for (const auto &row : table.rows)
  {
    if (!filter.client_ids.empty() &&
        std::find(filter.client_ids.begin(), filter.client_ids.end(), row.client_id) ==
            filter.client_ids.end())
    {
      continue;
    }
    if ((filter.date_from && row.date < *filter.date_from) ||
        (filter.date_to && row.date > *filter.date_to))
    {
      continue;
    }
    out.rows.push_back(row);
  }
  if (out.rows.empty())
  {
    throw EmptyDatasetError("meter filter removed every row");
  }
  return out;
}

/// Daily consumption vectors of one client: N samples of T non-negative slot values.
struct ClientDataset
{
  std::string         client_id;
  std::vector<Vector> samples;

  std::size_t size() const { return samples.size(); }
  std::size_t slots() const { return samples.empty() ? 0 : samples.front().size(); }
};

inline void validate(const ClientDataset &data)
{
  if (data.samples.empty())
  {
    throw EmptyDatasetError("dataset '" + data.client_id + "' has no samples");
  }
  const std::size_t t = data.slots();
  if (t == 0)
  {
    fail_parameter("dataset '", data.client_id, "' has zero slots");
  }
  for (std::size_t n = 0; n < data.samples.size(); ++n)
  {
    const auto &s = data.samples[n];
    if (s.size() != t)
    {
      fail_parameter("dataset '", data.client_id, "' sample ", n, " has ", s.size(),
                     " slots, expected ", t);
    }
    for (double v : s)
    {
      if (!std::isfinite(v) || v < 0.0)
      {
        fail_parameter("dataset '", data.client_id, "' sample ", n,
                       " has a negative or non-finite entry");
      }
    }
  }
}

/// Block-mean resampling of each 48-reading day into `t_slots` slots. One dataset per
/// client in order of first appearance; samples sorted by date.
inline std::vector<ClientDataset> resample(const RawMeterTable &raw, std::size_t t_slots)
{
  if (t_slots == 0 || kReadingsPerDay % t_slots != 0)
  {
    fail_parameter("t_slots must divide ", kReadingsPerDay, ", got ", t_slots);
  }
  const std::size_t block = kReadingsPerDay / t_slots;

  std::vector<std::string>                                  order;
  std::map<std::string, std::vector<const RawMeterRow *>>   by_client;
  for (const auto &row : raw.rows)
  {
    auto [it, inserted] = by_client.try_emplace(row.client_id);
    if (inserted)
    {
      order.push_back(row.client_id);
    }
    it->second.push_back(&row);
  }

  std::vector<ClientDataset> out;
  out.reserve(order.size());
  for (const auto &id : order)
  {
    auto rows = by_client[id];
    std::stable_sort(rows.begin(), rows.end(),
                     [](const RawMeterRow *a, const RawMeterRow *b) { return a->date < b->date; });
    ClientDataset data{id, {}};
    for (const RawMeterRow *row : rows)
    {
      Vector sample(t_slots, 0.0);
      for (std::size_t s = 0; s < t_slots; ++s)
      {
        double sum = 0.0;
        for (std::size_t j = 0; j < block; ++j)
        {
          sum += row->readings[s * block + j];
        }
        sample[s] = block == 1 ? sum : sum / static_cast<double>(block);
      }
      data.samples.push_back(std::move(sample));
    }
    out.push_back(std::move(data));
  }
  return out;
}

/// Synthetic generator parameters: per-slot base levels (one vector shared by all
/// clients, or one per client) and a uniform jitter amplitude.
struct SynthProfile
{
  std::vector<Vector> base;
  double              amplitude{0.0};
};

/// Samples are base + U(-amplitude, amplitude) per slot, clipped at 0.
inline std::vector<ClientDataset> synth_generate(std::size_t m_clients, std::size_t n_samples,
                                                 std::size_t t_slots, const SynthProfile &profile,
                                                 std::uint64_t seed)
{
  if (m_clients == 0 || n_samples == 0 || t_slots == 0)
  {
    fail_parameter("synthetic generator needs at least one client, sample and slot");
  }
  if (profile.base.size() != 1 && profile.base.size() != m_clients)
  {
    fail_parameter("synthetic profile needs 1 or ", m_clients, " base vectors, got ",
                   profile.base.size());
  }
  if (!(profile.amplitude >= 0.0) || !std::isfinite(profile.amplitude))
  {
    fail_parameter("synthetic amplitude must be finite and >= 0");
  }
  for (const auto &b : profile.base)
  {
    if (b.size() != t_slots)
    {
      fail_parameter("synthetic base has ", b.size(), " slots, expected ", t_slots);
    }
    if (!all_finite(b))
    {
      fail_parameter("synthetic base must be finite");
    }
  }

  std::vector<ClientDataset> out;
  for (std::size_t m = 0; m < m_clients; ++m)
  {
    const Vector &base = profile.base.size() == 1 ? profile.base[0] : profile.base[m];
    Rng           rng = make_rng(seed, {0x5e7d, m});
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    ClientDataset data{"client_" + std::to_string(m + 1), {}};
    for (std::size_t n = 0; n < n_samples; ++n)
    {
      Vector sample(t_slots);
      for (std::size_t t = 0; t < t_slots; ++t)
      {
        double u = profile.amplitude > 0.0 ? profile.amplitude * jitter(rng) : 0.0;
        sample[t] = std::max(0.0, base[t] + u);
      }
      data.samples.push_back(std::move(sample));
    }
    out.push_back(std::move(data));
  }
  return out;
}

/// Canonical dataset CSV: client_id, sample_index, v_1..v_T.
inline void write_dataset_csv(std::ostream &os, const std::vector<ClientDataset> &datasets)
{
  const std::size_t t = datasets.empty() ? 0 : datasets.front().slots();
  os << "client_id,sample_index";
  for (std::size_t i = 1; i <= t; ++i)
  {
    os << ",v_" << i;
  }
  os << '\n';
  for (const auto &data : datasets)
  {
    for (std::size_t n = 0; n < data.samples.size(); ++n)
    {
      os << data.client_id << ',' << n;
      for (double v : data.samples[n])
      {
        os << ',' << format_double(v);
      }
      os << '\n';
    }
  }
}

}  // namespace sfl
