// pointsim command-line front end.

#include "pointsim/runner.hpp"
#include "pointsim/scenario.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kInvariant = 1;
constexpr int kConfig = 2;

using namespace pointsim;

int
cmd_run(const std::string& scenario, const std::string& mode_text, std::uint64_t seed, const std::string& out,
        bool no_telemetry)
{
  const auto mode = harness::mode_from(mode_text);
  if (!mode) {
    fmt::print(stderr, "unknown mode '{}' (icn, ip)\n", mode_text);
    return kConfig;
  }
  const auto config = harness::load_scenario(scenario);
  harness::RunOptions opts{*mode, seed, std::nullopt};
  if (no_telemetry) {
    opts.telemetry = false;
  }
  const auto result = harness::run_scenario(config, opts);
  harness::write_artifacts(result, config, out);
  fmt::print("{}", harness::render_summary(result));
  if (const auto* bad = result.first_violation()) {
    fmt::print(stderr, "invariant violated: {} ({})\n", bad->name, bad->detail);
    return kInvariant;
  }
  return kOk;
}

int
cmd_validate(const std::string& scenario)
{
  const auto config = harness::load_scenario(scenario);
  fmt::print("{}: valid (config hash {:016x})\n", scenario, harness::config_hash(config));
  fmt::print("{}\n", harness::effective_config(config));
  return kOk;
}

int
cmd_compare(const std::string& a, const std::string& b)
{
  fmt::print("{}", harness::render_comparison(harness::compare_runs(a, b)));
  return kOk;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{"Deterministic IP-over-ICN simulator"};
  app.require_subcommand(1);

  std::string scenario;
  std::string mode = "icn";
  std::uint64_t seed = 1;
  std::string out;
  bool no_telemetry = false;
  auto* run = app.add_subcommand("run", "Run one scenario in one mode");
  run->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--mode", mode, "icn or ip")->check(CLI::IsMember({"icn", "ip"}));
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out, "Artifact directory")->required();
  run->add_flag("--no-telemetry", no_telemetry, "Disable metric sampling");

  std::string dir_a;
  std::string dir_b;
  auto* compare = app.add_subcommand("compare", "Compare two artifact directories");
  compare->add_option("dir_a", dir_a)->required()->check(CLI::ExistingDirectory);
  compare->add_option("dir_b", dir_b)->required()->check(CLI::ExistingDirectory);

  std::string file;
  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("file", file)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) {
      return cmd_run(scenario, mode, seed, out, no_telemetry);
    }
    if (*compare) {
      return cmd_compare(dir_a, dir_b);
    }
    return cmd_validate(file);
  }
  catch (const harness::ConfigError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kConfig;
  }
  catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfig;
  }
}
