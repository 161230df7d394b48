#pragma once

#include "pointsim/event_log.hpp"
#include "pointsim/scenario.hpp"
#include "pointsim/telemetry.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pointsim::harness {

enum class Mode { icn, ip };

const char* to_string(Mode m);
std::optional<Mode> mode_from(std::string_view s);

struct InvariantResult {
  std::string name;
  bool ok = true;
  std::string detail;
};

/// Routing state that changed across one scripted link event, measured
/// between the event instant and the point where the network has settled.
struct RoutingChange {
  sim::Time at = 0;
  std::string link;
  bool up = false;
  std::set<std::string> changed;
  std::set<std::string> forwarding_nodes; // every FN checked
};

struct RunOptions {
  Mode mode = Mode::icn;
  std::uint64_t seed = 1;
  // Overrides params.telemetry when set.
  std::optional<bool> telemetry;
};

struct RunResult {
  Mode mode = Mode::icn;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string scenario;
  std::unique_ptr<telemetry::EventLog> log;
  telemetry::SummaryOptions summary_options;
  telemetry::Summary summary;
  std::vector<InvariantResult> invariants;
  std::vector<RoutingChange> routing_changes;
  sim::Time end = 0;

  bool ok() const;
  const InvariantResult* first_violation() const;
};

RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options);

/// Summary options a run of `config` uses; lets a reloaded log be summarized.
telemetry::SummaryOptions summary_options(const ScenarioConfig& config);

/// effective_config.json, events.jsonl, metrics.csv, summary.txt.
void write_artifacts(const RunResult& result, const ScenarioConfig& config, const std::filesystem::path& dir);

std::string render_summary(const RunResult& result);

/// Header and key/value pairs of a summary.txt.
struct SummaryFile {
  std::map<std::string, std::string> header;
  telemetry::Summary values;
};

SummaryFile read_summary(const std::filesystem::path& file);

struct ComparisonRow {
  std::string key;
  double a = 0;
  double b = 0;
  double delta = 0;
};

struct ComparisonReport {
  std::string scenario;
  std::string mode_a;
  std::string mode_b;
  std::vector<ComparisonRow> rows;
  std::map<std::string, double> derived;
};

/// Pairs the summaries of two artifact directories. Throws ConfigError when
/// the runs used different configs or seeds.
ComparisonReport compare_runs(const std::filesystem::path& a, const std::filesystem::path& b);
std::string render_comparison(const ComparisonReport& report);

} // namespace pointsim::harness
