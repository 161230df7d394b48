#include "pointsim/scenario.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>

using namespace pointsim;
using namespace pointsim::harness;
using nlohmann::json;

namespace {

const std::filesystem::path kScenarios = POINTSIM_SCENARIO_DIR;

json minimal()
{
  return json::parse(R"({
    "name": "mini",
    "duration_ms": 5000,
    "topology": {
      "nodes": [{"name": "a", "role": "nap"}, {"name": "f", "role": "fn"}, {"name": "b", "role": "nap"}],
      "links": [{"name": "af", "a": "a", "b": "f"}, {"name": "fb", "a": "f", "b": "b"}],
      "hosts": [{"name": "srv", "attach": "a"}, {"name": "cli", "attach": "b"}]
    },
    "hls": {"server": "srv", "clients": [{"host": "cli", "start_ms": 1000}]}
  })");
}

std::vector<std::string> violations_of(const json& j)
{
  try {
    parse_scenario(j.dump());
  }
  catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, std::string_view what)
{
  return std::any_of(v.begin(), v.end(), [&] (const std::string& s) { return s.find(what) != std::string::npos; });
}

} // namespace

TEST_CASE("the shipped trial topology has the expected shape")
{
  const auto c = load_scenario(kScenarios / "trial_topology.json");
  const auto& t = c.topology;
  auto count_role = [&] (pce::NodeRole r) {
    return std::count_if(t.nodes.begin(), t.nodes.end(), [&] (const NodeSpec& n) { return n.role == r; });
  };
  CHECK(count_role(pce::NodeRole::fn) == 2);
  CHECK(count_role(pce::NodeRole::pce) == 1);
  const auto trunks = std::count_if(t.links.begin(), t.links.end(), [&] (const LinkSpec& l) {
    return (l.a == "sw1" && l.b == "sw2") || (l.a == "sw2" && l.b == "sw1");
  });
  CHECK(trunks == 2);
  auto with_prefix = [&] (std::string_view p) {
    return std::count_if(t.nodes.begin(), t.nodes.end(), [&] (const NodeSpec& n) {
      return n.role == pce::NodeRole::nap && n.name.starts_with(p);
    });
  };
  CHECK(with_prefix("snap-") == 3);
  CHECK(with_prefix("cnap-") >= 2);
  CHECK(c.fid.mode == fid::Mode::exact);
}

TEST_CASE("every shipped scenario validates")
{
  for (const auto* name : {"coincidental_multicast", "hls_failover", "iptv_failover", "trial_topology"}) {
    CAPTURE(name);
    const auto c = load_scenario(kScenarios / (std::string(name) + ".json"));
    CHECK(validate(c).empty());
  }
}

TEST_CASE("defaults are filled in and echoed in the effective config")
{
  const auto c = parse_scenario(minimal().dump());
  CHECK(c.params.coalesce_window == sim::msec(100));
  CHECK(c.fid.mode == fid::Mode::exact);
  const auto eff = json::parse(effective_config(c));
  CHECK(eff.at("params").at("coalesce_window_us") == 100000);
  CHECK(eff.at("params").at("reconvergence_delay_us") == 30000000);
  CHECK(eff.at("duration_us") == 5000000);
  const auto again = parse_scenario(effective_config(c));
  CHECK(effective_config(again) == effective_config(c));
  CHECK(config_hash(again) == config_hash(c));
}

TEST_CASE("the config hash ignores the seed but nothing else")
{
  auto j = minimal();
  const auto base = config_hash(parse_scenario(j.dump()));
  j["seed"] = 99;
  CHECK(config_hash(parse_scenario(j.dump())) == base);
  j["params"]["coalesce_window_ms"] = 50;
  CHECK(config_hash(parse_scenario(j.dump())) != base);
}

TEST_CASE("exact mode rejects more directed links than bits")
{
  auto j = minimal();
  j["fid"] = {{"mode", "exact"}, {"m", 8}, {"k", 1}};
  auto& links = j["topology"]["links"];
  for (int i = 0; i < 18; ++i) {
    links.push_back({{"name", "extra" + std::to_string(i)}, {"a", "a"}, {"b", "b"}});
  }
  REQUIRE(links.size() == 20);
  const auto v = violations_of(j);
  CHECK(mentions(v, "exact mode needs m >= number of directed links (40 > 8)"));
}

TEST_CASE("all violations are reported together")
{
  auto j = minimal();
  j["topology"]["links"].push_back({{"name", "dangling"}, {"a", "a"}, {"b", "nowhere"}});
  j["topology"]["hosts"].push_back({{"name", "stray"}, {"attach", "f"}});
  j["params"]["colesce_window_ms"] = 10;
  j["events"] = json::array({{{"at_ms", 9000}, {"action", "link_down"}, {"target", "af"}}});
  const auto v = violations_of(j);
  CHECK(v.size() >= 4);
  CHECK(mentions(v, "unknown endpoint 'nowhere'"));
  CHECK(mentions(v, "hosts attach to nap nodes only"));
  CHECK(mentions(v, "unknown key 'colesce_window_ms'"));
  CHECK(mentions(v, "time outside the run"));
}

TEST_CASE("inconsistent scripted events are rejected")
{
  auto j = minimal();
  j["events"] = json::array({{{"at_ms", 1000}, {"action", "link_up"}, {"target", "af"}},
                             {{"at_ms", 2000}, {"action", "surrogate_on"}, {"target", "srv"}}});
  const auto v = violations_of(j);
  CHECK(mentions(v, "link is already up"));
  CHECK(mentions(v, "no surrogate configured"));
}

TEST_CASE("bad link names and duplicate pce nodes")
{
  auto j = minimal();
  j["topology"]["links"][0]["name"] = "a:f";
  j["topology"]["nodes"].push_back({{"name", "p1"}, {"role", "pce"}});
  j["topology"]["nodes"].push_back({{"name", "p2"}, {"role", "pce"}});
  const auto v = violations_of(j);
  CHECK(mentions(v, "free of ':'"));
  CHECK(mentions(v, "at most one pce node"));
}

TEST_CASE("malformed documents")
{
  CHECK_THROWS_AS(parse_scenario("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("[]"), ConfigError);
  CHECK_THROWS_AS(load_scenario(kScenarios / "does_not_exist.json"), ConfigError);
  auto j = minimal();
  j["duration_ms"] = "long";
  CHECK(mentions(violations_of(j), "must be a number"));
  j = minimal();
  j["duration_ms"] = 1;
  j["duration_us"] = 1;
  CHECK(mentions(violations_of(j), "both"));
}

TEST_CASE("build_topology follows declaration order")
{
  const auto c = parse_scenario(minimal().dump());
  const auto g = build_topology(c, 1);
  CHECK(g.node_count() == 3);
  CHECK(g.physical_links().size() == 2);
  CHECK(g.physical(0).name == "af");
  CHECK(g.node(*g.find_node("f")).role == pce::NodeRole::fn);
  CHECK(g.fid_width() == 256);
}
