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

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "sfl/dataio.hpp"

namespace {

using sfl::kReadingsPerDay;

class MeterCsv : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir_ = std::filesystem::temp_directory_path() /
           ("sfl_dataio_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }

  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string write(const std::string &body)
  {
    const auto path = dir_ / "meter.csv";
    std::ofstream out(path);
    out << "client_id,date";
    for (std::size_t i = 1; i <= kReadingsPerDay; ++i)
    {
      out << ",v" << i;
    }
    out << '\n' << body;
    return path.string();
  }

  static std::string row(const std::string &client, const std::string &date, double value)
  {
    std::ostringstream os;
    os << client << ',' << date;
    for (std::size_t i = 0; i < kReadingsPerDay; ++i)
    {
      os << ',' << value;
    }
    os << '\n';
    return os.str();
  }

  std::filesystem::path dir_;
};

TEST_F(MeterCsv, ZeroRowsPassThrough)
{
  const auto path = write(row("a", "2012-07-01", 0.0) + row("a", "2012-07-02", 0.0));
  const auto table = sfl::load_meter_csv(path, sfl::CsvSchema::with_prefix("v"));
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.skipped, 0u);
  for (const auto &r : table.rows)
  {
    for (double v : r.readings)
    {
      EXPECT_EQ(v, 0.0);
    }
  }
}

TEST_F(MeterCsv, NegativeReadingDropsTheRow)
{
  std::string bad = row("a", "2012-07-01", 1.0);
  bad.replace(bad.find(",1"), 2, ",-1");
  const auto path = write(bad + row("b", "2012-07-01", 1.0));
  auto       previous = sfl::set_warning_sink([](std::string_view) {});
  const auto table = sfl::load_meter_csv(path, sfl::CsvSchema::with_prefix("v"));
  sfl::set_warning_sink(previous);
  EXPECT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.skipped, 1u);
  EXPECT_EQ(table.rows[0].client_id, "b");
}

TEST_F(MeterCsv, OnlyInvalidRowsIsAnEmptyDataset)
{
  std::string bad = row("a", "2012-07-01", 1.0);
  bad.replace(bad.find(",1"), 2, ",-1");
  const auto path = write(bad);
  auto       previous = sfl::set_warning_sink([](std::string_view) {});
  EXPECT_THROW(sfl::load_meter_csv(path, sfl::CsvSchema::with_prefix("v")), sfl::EmptyDatasetError);
  sfl::set_warning_sink(previous);
}

TEST_F(MeterCsv, RowCountIsPreserved)
{
  std::string body;
  for (int c = 0; c < 3; ++c)
  {
    for (int d = 1; d <= 10; ++d)
    {
      body += row("c" + std::to_string(c), "2012-07-" + std::string(d < 10 ? "0" : "") + std::to_string(d),
                  0.1 * d);
    }
  }
  const auto table = sfl::load_meter_csv(write(body), sfl::CsvSchema::with_prefix("v"));
  EXPECT_EQ(table.rows.size(), 30u);
  const auto datasets = sfl::resample(table, 2);
  ASSERT_EQ(datasets.size(), 3u);
  for (const auto &d : datasets)
  {
    EXPECT_EQ(d.size(), 10u);
    EXPECT_EQ(d.slots(), 2u);
  }
}

TEST_F(MeterCsv, MalformedRowsAreCounted)
{
  const auto path = write(row("a", "2012-07-01", 1.0) + "a,2012-07-02,1,2\n" +
                          row("a", "not-a-date", 1.0) + row("a", "2012-07-01", 2.0));
  auto       previous = sfl::set_warning_sink([](std::string_view) {});
  const auto table = sfl::load_meter_csv(path, sfl::CsvSchema::with_prefix("v"));
  sfl::set_warning_sink(previous);
  EXPECT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.skipped, 3u);
}

TEST_F(MeterCsv, MissingFileIsAnIoError)
{
  EXPECT_THROW(sfl::load_meter_csv((dir_ / "nope.csv").string(), sfl::CsvSchema::with_prefix("v")),
               sfl::IoError);
}

TEST_F(MeterCsv, CategoryFilterAndTitleLine)
{
  // Raw-export layout: a title line, then a category column used to keep one kind of row.
  const auto path = dir_ / "raw.csv";
  {
    std::ofstream out(path);
    out << "Some export title\nCustomer,Consumption Category,date";
    for (std::size_t i = 1; i <= kReadingsPerDay; ++i)
    {
      out << ",h" << i;
    }
    out << '\n';
    for (const char *cat : {"GC", "CL"})
    {
      out << "7," << cat << ",1/07/2012";
      for (std::size_t i = 0; i < kReadingsPerDay; ++i)
      {
        out << (std::string(cat) == "GC" ? ",0.5" : ",9");
      }
      out << '\n';
    }
  }
  sfl::CsvSchema schema = sfl::CsvSchema::with_prefix("h");
  schema.client_id_column = "Customer";
  schema.skip_lines = 1;
  schema.filter_column = "Consumption Category";
  schema.filter_value = "GC";
  const auto table = sfl::load_meter_csv(path.string(), schema);
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.rows[0].date, (sfl::CalendarDate{2012, 7, 1}));
  EXPECT_EQ(table.rows[0].readings[0], 0.5);
}

sfl::RawMeterTable one_row(const std::array<double, kReadingsPerDay> &readings)
{
  sfl::RawMeterTable t;
  t.rows.push_back({"a", {2012, 7, 1}, readings});
  return t;
}

TEST(Resample, ConstantDayHasConstantMean)
{
  std::array<double, kReadingsPerDay> r{};
  r.fill(1.0);
  const auto d = sfl::resample(one_row(r), 2);
  EXPECT_EQ(d[0].samples[0], (sfl::Vector{1.0, 1.0}));
}

TEST(Resample, BlockMeans)
{
  std::array<double, kReadingsPerDay> r{};
  std::fill(r.begin(), r.begin() + 24, 2.0);
  const auto d = sfl::resample(one_row(r), 2);
  EXPECT_EQ(d[0].samples[0], (sfl::Vector{2.0, 0.0}));
}

TEST(Resample, FortyEightSlotsIsIdentity)
{
  std::array<double, kReadingsPerDay> r{};
  for (std::size_t i = 0; i < r.size(); ++i)
  {
    r[i] = 0.1 * static_cast<double>(i) + 0.037;
  }
  const auto d = sfl::resample(one_row(r), 48);
  EXPECT_EQ(d[0].samples[0], sfl::Vector(r.begin(), r.end()));
  // And again on the resampled output: idempotent.
  std::array<double, kReadingsPerDay> again{};
  std::copy(d[0].samples[0].begin(), d[0].samples[0].end(), again.begin());
  EXPECT_EQ(sfl::resample(one_row(again), 48)[0].samples[0], d[0].samples[0]);
}

TEST(Resample, RejectsSlotCountsThatDoNotDivide48)
{
  std::array<double, kReadingsPerDay> r{};
  EXPECT_THROW(sfl::resample(one_row(r), 5), sfl::ParameterError);
  EXPECT_THROW(sfl::resample(one_row(r), 0), sfl::ParameterError);
}

TEST(Resample, PreservesDailyEnergy)
{
  std::mt19937_64                        rng(11);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (std::size_t t : {1u, 2u, 3u, 4u, 6u, 8u, 12u, 16u, 24u, 48u})
  {
    for (int trial = 0; trial < 20; ++trial)
    {
      std::array<double, kReadingsPerDay> r{};
      for (auto &v : r)
      {
        v = u(rng);
      }
      const auto   d = sfl::resample(one_row(r), t);
      const double raw = std::accumulate(r.begin(), r.end(), 0.0);
      const double slots = std::accumulate(d[0].samples[0].begin(), d[0].samples[0].end(), 0.0);
      EXPECT_NEAR(static_cast<double>(kReadingsPerDay / t) * slots, raw, 1e-9 * raw) << "t=" << t;
    }
  }
}

TEST(Synth, ZeroAmplitudeReproducesTheBase)
{
  const auto d = sfl::synth_generate(2, 5, 2, {{{1.0, 3.0}}, 0.0}, 1);
  for (const auto &c : d)
  {
    for (const auto &s : c.samples)
    {
      EXPECT_EQ(s, (sfl::Vector{1.0, 3.0}));
    }
  }
}

TEST(Synth, SameSeedSameData)
{
  const sfl::SynthProfile p{{{1.0, 2.0, 0.5}}, 0.7};
  const auto              a = sfl::synth_generate(3, 40, 3, p, 99);
  const auto              b = sfl::synth_generate(3, 40, 3, p, 99);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t m = 0; m < a.size(); ++m)
  {
    EXPECT_EQ(a[m].samples, b[m].samples);
  }
  EXPECT_NE(sfl::synth_generate(3, 40, 3, p, 100)[0].samples, a[0].samples);
}

TEST(Synth, ClippingBoundsTheSamples)
{
  const auto d = sfl::synth_generate(1, 500, 2, {{{0.0, 0.0}}, 0.5}, 3);
  for (const auto &s : d[0].samples)
  {
    for (double v : s)
    {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 0.5);
    }
  }
}

TEST(Synth, RejectsBadParameters)
{
  EXPECT_THROW(sfl::synth_generate(0, 5, 2, {{{1.0, 1.0}}, 0.0}, 1), sfl::ParameterError);
  EXPECT_THROW(sfl::synth_generate(1, 5, 3, {{{1.0, 1.0}}, 0.0}, 1), sfl::ParameterError);
  EXPECT_THROW(sfl::synth_generate(1, 5, 2, {{{1.0, 1.0}}, -1.0}, 1), sfl::ParameterError);
}

TEST(DatasetCsv, CanonicalLayout)
{
  std::ostringstream os;
  sfl::write_dataset_csv(os, {{"c1", {{1.0, 2.5}, {0.0, 0.125}}}});
  EXPECT_EQ(os.str(), "client_id,sample_index,v_1,v_2\nc1,0,1,2.5\nc1,1,0,0.125\n");
}

TEST(Dates, IsoAndDayFirst)
{
  EXPECT_EQ(sfl::parse_date("2012-07-01"), (sfl::CalendarDate{2012, 7, 1}));
  EXPECT_EQ(sfl::parse_date("1/07/2012"), (sfl::CalendarDate{2012, 7, 1}));
  EXPECT_FALSE(sfl::parse_date("2012-13-01"));
  EXPECT_FALSE(sfl::parse_date("yesterday"));
}

}  // namespace
