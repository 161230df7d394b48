#include "pointsim/runner.hpp"

#include <doctest.h>

#include <fstream>

using namespace pointsim;
using namespace pointsim::harness;
using telemetry::EventType;

namespace {

ScenarioConfig shipped(const std::string& name)
{
  return load_scenario(std::filesystem::path(POINTSIM_SCENARIO_DIR) / (name + ".json"));
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name)
  {
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("mode names")
{
  CHECK(mode_from("icn") == Mode::icn);
  CHECK(mode_from("ip") == Mode::ip);
  CHECK_FALSE(mode_from("tcp"));
  CHECK(std::string(to_string(Mode::ip)) == "ip");
}

TEST_CASE("same inputs, same log")
{
  const auto cfg = shipped("hls_failover");
  const auto a = run_scenario(cfg, {Mode::icn, 5, std::nullopt});
  const auto b = run_scenario(cfg, {Mode::icn, 5, std::nullopt});
  CHECK(a.log->hash() == b.log->hash());
  CHECK(a.summary == b.summary);
  CHECK(a.ok());
}

TEST_CASE("telemetry does not perturb the data plane")
{
  const auto cfg = shipped("iptv_failover");
  for (auto mode : {Mode::icn, Mode::ip}) {
    const auto on = run_scenario(cfg, {mode, 1, true});
    const auto off = run_scenario(cfg, {mode, 1, false});
    CHECK(on.log->dataplane_hash() == off.log->dataplane_hash());
    CHECK(on.log->events().size() == off.log->events().size());
    CHECK_FALSE(on.log->samples().empty());
    CHECK(off.log->samples().empty());
  }
}

TEST_CASE("both modes see the same workload")
{
  const auto cfg = shipped("coincidental_multicast");
  const auto icn = run_scenario(cfg, {Mode::icn, 1, false});
  const auto ip = run_scenario(cfg, {Mode::ip, 1, false});
  auto starts = [] (const RunResult& r) {
    std::vector<std::pair<sim::Time, std::string>> out;
    for (const auto& e : r.log->events()) {
      if (e.type == EventType::playback_start || e.type == EventType::app_stop) {
        out.emplace_back(e.at, r.log->element_name(e.element));
      }
    }
    return out;
  };
  auto first_requests = [] (const RunResult& r) {
    std::vector<std::tuple<sim::Time, std::string, std::string>> out;
    for (const auto& e : r.log->events()) {
      if (e.type == EventType::http_request && e.f[1] == 0) {
        out.emplace_back(e.at, r.log->element_name(e.element), e.text);
      }
    }
    return out;
  };
  CHECK(first_requests(icn) == first_requests(ip));
  CHECK(icn.summary.at("hls.clients") == ip.summary.at("hls.clients"));
  CHECK_FALSE(starts(icn).empty());
  CHECK(icn.config_hash == ip.config_hash);
}

TEST_CASE("invariants are checked and reported")
{
  const auto r = run_scenario(shipped("iptv_failover"), {Mode::ip, 1, false});
  std::set<std::string> names;
  for (const auto& inv : r.invariants) {
    names.insert(inv.name);
    CHECK_MESSAGE(inv.ok, inv.name << ": " << inv.detail);
  }
  CHECK(names.contains("conservation"));
  CHECK(names.contains("spanning_tree"));
  CHECK(r.first_violation() == nullptr);
  CHECK(r.summary.at("stp.changes") == 2);
}

TEST_CASE("a trunk event reroutes only at the entry point and the PCE")
{
  const auto r = run_scenario(shipped("iptv_failover"), {Mode::icn, 1, false});
  REQUIRE(r.routing_changes.size() == 2);
  for (const auto& rc : r.routing_changes) {
    CHECK(rc.link == "trunk-primary");
    CHECK(rc.changed == std::set<std::string>{"pce", "snap-iptv"});
    CHECK(rc.forwarding_nodes == std::set<std::string>{"sw1", "sw2"});
  }
}

TEST_CASE("artifacts are written, re-read and compared")
{
  const auto cfg = shipped("hls_failover");
  TempDir a("pointsim-runner-a");
  TempDir b("pointsim-runner-b");
  const auto icn = run_scenario(cfg, {Mode::icn, 1, std::nullopt});
  const auto ip = run_scenario(cfg, {Mode::ip, 1, std::nullopt});
  write_artifacts(icn, cfg, a.path);
  write_artifacts(ip, cfg, b.path);
  for (const auto* f : {"effective_config.json", "events.jsonl", "metrics.csv", "summary.txt"}) {
    CHECK(std::filesystem::exists(a.path / f));
  }
  const auto s = read_summary(a.path / "summary.txt");
  CHECK(s.header.at("mode") == "icn");
  CHECK(s.values.at("hls.stalls") == icn.summary.at("hls.stalls"));
  const auto back = telemetry::import_jsonl(a.path / "events.jsonl");
  CHECK(back.hash() == icn.log->hash());

  const auto report = compare_runs(a.path, b.path);
  CHECK(report.mode_a == "icn");
  CHECK(report.mode_b == "ip");
  bool saw_stalls = false;
  for (const auto& row : report.rows) {
    if (row.key == "hls.stalls") {
      saw_stalls = true;
      CHECK(row.delta == row.b - row.a);
      CHECK(row.b > row.a);
    }
  }
  CHECK(saw_stalls);
  CHECK_FALSE(render_comparison(report).empty());

  TempDir c("pointsim-runner-c");
  const auto other = run_scenario(cfg, {Mode::ip, 2, std::nullopt});
  write_artifacts(other, cfg, c.path);
  CHECK_THROWS_AS(compare_runs(a.path, c.path), ConfigError);
}
