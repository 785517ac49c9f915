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

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "sfl.hpp"

namespace {

int run_validate(const std::string &path)
{
  const auto diagnostics = sfl::validate_config(path);
  if (diagnostics.empty())
  {
    std::cout << path << ": ok\n";
    return 0;
  }
  for (const auto &d : diagnostics)
  {
    std::cout << d << '\n';
  }
  std::cerr << path << ": " << diagnostics.size() << " problem(s)\n";
  return 1;
}

int run_run(const std::string &path, const sfl::RunOverrides &overrides)
{
  const auto doc = sfl::apply_overrides(sfl::read_json_file(path), overrides);
  auto       parsed = sfl::parse_config(doc);
  if (!parsed.config)
  {
    for (const auto &d : parsed.diagnostics)
    {
      std::cerr << "invalid config: " << d << '\n';
    }
    return 1;
  }
  const auto outputs = sfl::run_experiment(*parsed.config);
  for (const auto &file : outputs.files)
  {
    std::cout << file.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Strategic federated learning experiments: clustering, strategic noise, "
               "FC scheduling and equilibrium search"};
  app.set_version_flag("--version", std::string(sfl::kVersion));
  app.require_subcommand(1);

  std::string validate_path;
  auto       *validate = app.add_subcommand("validate", "Check a config file and list every problem");
  validate->add_option("config", validate_path, "Experiment config (JSON)")->required();

  std::string                  run_path;
  std::string                  out_dir;
  std::uint64_t                seed = 0;
  std::size_t                  samples = 0;
  std::size_t                  jobs = 0;
  auto *run = app.add_subcommand("run", "Run an experiment and write its report files");
  run->add_option("config", run_path, "Experiment config (JSON)")->required();
  auto *out_opt = run->add_option("--out", out_dir, "Output directory");
  auto *seed_opt = run->add_option("--seed", seed, "Master seed");
  auto *samples_opt =
      run->add_option("--samples", samples, "Monte-Carlo samples per cell")->check(CLI::PositiveNumber);
  auto *jobs_opt = run->add_option("--jobs", jobs, "Parallel sweep workers")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (*validate)
    {
      return run_validate(validate_path);
    }
    sfl::RunOverrides overrides;
    if (*out_opt)
    {
      overrides.output_dir = out_dir;
    }
    if (*seed_opt)
    {
      overrides.seed = seed;
    }
    if (*samples_opt)
    {
      overrides.samples = samples;
    }
    if (*jobs_opt)
    {
      overrides.jobs = jobs;
    }
    return run_run(run_path, overrides);
  }
  catch (const sfl::Error &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  catch (const std::exception &e)
  {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 3;
  }
}
