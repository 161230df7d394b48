#include "pointsim/event_log.hpp"
#include "pointsim/pce.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace pointsim;
using namespace pointsim::pce;

namespace {

// a - b - d, a - c - d, c - p - d where p is the PCE.
TopologyGraph diamond()
{
  TopologyGraph g;
  g.add_node("a", NodeRole::nap);
  g.add_node("b", NodeRole::fn);
  g.add_node("c", NodeRole::fn);
  g.add_node("d", NodeRole::nap);
  g.add_node("p", NodeRole::pce);
  g.add_link("ab", 0, 1, 1'000'000'000, 100);
  g.add_link("bd", 1, 3, 1'000'000'000, 100);
  g.add_link("ac", 0, 2, 1'000'000'000, 100);
  g.add_link("cd", 2, 3, 1'000'000'000, 100);
  g.add_link("cp", 2, 4, 1'000'000'000, 100);
  g.add_link("pd", 4, 3, 1'000'000'000, 100);
  g.assign_link_ids(fid::FidConfig{64, 1, fid::Mode::exact}, 1);
  return g;
}

} // namespace

TEST_CASE("shortest path prefers the lower neighbour on ties")
{
  Pce pce(diamond());
  const auto r = pce.compute_path(0, 3);
  CHECK(r.cost == 2);
  const auto& g = pce.topology();
  REQUIRE(r.links.size() == 2);
  CHECK(g.link(r.links[0]).dst == 1);
  CHECK(r.fid.popcount() == 2);
}

TEST_CASE("the PCE node is never transit")
{
  auto g = diamond();
  g.set_state(*g.find_physical("bd"), LinkState::down);
  g.set_state(*g.find_physical("cd"), LinkState::down);
  Pce pce(std::move(g));
  CHECK_THROWS_AS(pce.compute_path(0, 3), UnreachableError);
  CHECK(pce.compute_path(0, 4).cost == 2);
  CHECK(pce.compute_path(4, 3).cost == 1);
}

TEST_CASE("cached paths are recomputed after a topology event")
{
  Pce pce(diamond());
  const auto first = pce.cached_path(0, 3).links;
  const auto computed = pce.path_computations();
  pce.cached_path(0, 3);
  CHECK(pce.path_computations() == computed);
  const auto before = pce.state_hash();
  const auto ab = *pce.topology().find_physical("ab");
  const auto report = pce.on_topology_event(TopologyEvent{ab, LinkState::down, 0});
  CHECK(report.invalidated >= 1);
  CHECK(pce.state_hash() != before);
  const auto second = pce.cached_path(0, 3).links;
  CHECK(second != first);
  CHECK(pce.topology().link(second[0]).dst == 2);
  CHECK_THROWS_AS(pce.on_topology_event(TopologyEvent{999, LinkState::down, 0}), std::invalid_argument);
}

TEST_CASE("anycast picks the nearest publisher, scope roots included")
{
  Pce pce(diamond());
  const auto item = http_name("hls.trial", "/a.ts");
  pce.publish(item.root(), 3, Delivery::on_demand);
  CHECK(pce.select_publisher(item, 1) == 3);
  pce.publish(item, 0, Delivery::on_demand);
  CHECK(pce.select_publisher(item, 1) == 0); // tie at 1 hop, lower id
  CHECK(pce.select_publisher(item, 2) == 0);
  CHECK_THROWS_AS(pce.select_publisher(http_name("other", "/x"), 1), UnreachableError);
}

TEST_CASE("subscribing to a stream pushes a tree FID to the publisher")
{
  Pce pce(diamond());
  const auto ch = channel_name("239.1.1.1");
  auto out = pce.publish(ch, 0, Delivery::stream);
  CHECK(out.updates.empty());
  out = pce.subscribe(ch, 3);
  REQUIRE(out.updates.size() == 1);
  CHECK(out.updates[0].publisher == 0);
  CHECK(out.updates[0].receivers == std::vector<NodeId>{3});
  CHECK(out.updates[0].tree.links.size() == 2);
  CHECK(pce.subscription_count(ch) == 1);
  out = pce.unsubscribe(ch, 3);
  CHECK(pce.subscription_count(ch) == 0);
}

TEST_CASE("on-demand publishers get a match per subscription")
{
  Pce pce(diamond());
  const auto name = http_name("hls.trial", "/live/playlist.m3u8");
  pce.publish(name.root(), 3, Delivery::on_demand);
  const auto out = pce.subscribe(name, 0, false, "GET hls.trial /live/playlist.m3u8");
  REQUIRE(out.matches.size() == 1);
  CHECK(out.matches[0].publisher == 3);
  CHECK(out.matches[0].subscriber == 0);
  CHECK(pce.matched_publisher(name, 0) == 3);
}

TEST_CASE("multicast tree is the union of unicast paths")
{
  Pce pce(diamond());
  const std::vector<NodeId> rx{1, 2, 3};
  const auto tree = pce.build_multicast_tree(0, rx);
  fid::Fid expect(pce.topology().fid_width());
  for (auto r : rx) {
    expect |= pce.cached_path(0, r).fid;
  }
  CHECK(tree.fid == expect);
  CHECK(tree.links.size() == 3);
}

TEST_CASE("partial trees report the unreachable receivers")
{
  auto g = diamond();
  g.set_state(*g.find_physical("pd"), LinkState::down);
  g.set_state(*g.find_physical("cp"), LinkState::down);
  Pce pce(std::move(g));
  const std::vector<NodeId> rx{3, 4};
  try {
    pce.build_multicast_tree(0, rx);
    FAIL("expected PartialTreeError");
  }
  catch (const PartialTreeError& e) {
    CHECK(e.unreachable() == std::vector<NodeId>{4});
    CHECK(e.partial().links.size() == 2);
  }
}

TEST_CASE("paths agree with a Floyd-Warshall oracle on random graphs")
{
  std::mt19937_64 rng(2024);
  testing::RandomTopologyOptions opt;
  opt.down_probability = 0.1;
  for (int instance = 0; instance < 150; ++instance) {
    auto g = testing::random_topology(rng, opt);
    const auto hops = testing::all_pairs_hops(g);
    Pce pce(g);
    for (NodeId s = 0; s < g.node_count(); ++s) {
      for (NodeId d = 0; d < g.node_count(); ++d) {
        if (hops[s][d] == testing::kUnreachable) {
          CHECK_THROWS_AS(pce.compute_path(s, d), UnreachableError);
          continue;
        }
        const auto r = pce.compute_path(s, d);
        REQUIRE(r.cost == hops[s][d]);
        REQUIRE(testing::valid_path(g, s, d, r.links));
      }
    }
  }
}
