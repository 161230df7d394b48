#include "pointsim/fabric.hpp"
#include "pointsim/pce.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace pointsim;
using pce::LinkState;
using pce::NodeId;
using pce::NodeRole;

namespace {

// a(nap) - f(fn) - b(nap), f - c(nap)
pce::TopologyGraph star()
{
  pce::TopologyGraph g;
  g.add_node("a", NodeRole::nap);
  g.add_node("f", NodeRole::fn);
  g.add_node("b", NodeRole::nap);
  g.add_node("c", NodeRole::nap);
  g.add_link("af", 0, 1, 8'000'000, 1000);
  g.add_link("fb", 1, 2, 8'000'000, 1000);
  g.add_link("fc", 1, 3, 8'000'000, 1000);
  g.assign_link_ids(fid::FidConfig{64, 1, fid::Mode::exact}, 1);
  return g;
}

struct Bed {
  sim::Scheduler sched;
  telemetry::EventLog log{&sched};
  net::Runtime rt{sched, log};
  net::PacketLedger ledger{rt};
  pce::TopologyGraph topo = star();
  fabric::Fabric fab{rt, topo, ledger, fabric::FabricConfig{}};
  std::vector<std::pair<NodeId, std::uint64_t>> got;

  Bed()
  {
    for (NodeId n : {0U, 2U, 3U}) {
      fab.attach(n, [this, n] (const net::Packet& p) { got.emplace_back(n, p.id); });
    }
  }

  net::Packet packet(std::vector<pce::LinkIndex> links, std::int64_t size = 1000)
  {
    auto msg = std::make_shared<net::Message>();
    msg->id = rt.message_id();
    msg->cls = net::ContentClass::chunk;
    msg->size = size;
    net::Packet p;
    p.id = rt.packet_id();
    p.message = msg;
    p.size = size;
    p.fid = fid::Fid(topo.fid_width());
    for (auto l : links) {
      p.fid |= topo.link(l).lid.bits;
    }
    std::sort(links.begin(), links.end());
    p.intended = std::make_shared<std::vector<pce::LinkIndex>>(links);
    return p;
  }

  pce::LinkIndex link(NodeId s, NodeId d) const { return *topo.find_link(s, d); }
};

} // namespace

TEST_CASE("one packet, two receivers: one copy per link and exact conservation")
{
  Bed bed;
  bed.fab.inject(0, bed.packet({bed.link(0, 1), bed.link(1, 2), bed.link(1, 3)}));
  bed.sched.run_until(sim::sec(1));
  CHECK(bed.got.size() == 2);
  const auto& t = bed.ledger.totals();
  CHECK(t.injected == 1000);
  CHECK(t.replicated == 1000);
  CHECK(t.delivered == 2000);
  CHECK(t.dropped == 0);
  CHECK(t.in_flight() == 0);
  CHECK(bed.fab.links().counters(bed.link(0, 1)).tx_bytes == 1000);
  CHECK(bed.fab.links().counters(bed.link(1, 0)).tx_bytes == 0);
}

TEST_CASE("serialization and propagation delay")
{
  Bed bed;
  sim::Time arrived = -1;
  bed.fab.attach(2, [&] (const net::Packet&) { arrived = bed.sched.now(); });
  bed.fab.inject(0, bed.packet({bed.link(0, 1), bed.link(1, 2)}));
  bed.sched.run_until(sim::sec(1));
  // 1000 B at 8 Mb/s = 1 ms per hop, plus 1 ms latency per hop.
  CHECK(arrived == 4000);
}

TEST_CASE("zero FID, ttl and down links are drops")
{
  Bed bed;
  bed.fab.inject(0, bed.packet({}));
  auto ttl = bed.packet({bed.link(0, 1), bed.link(1, 2)});
  ttl.ttl = 1;
  bed.fab.inject(0, ttl);
  bed.sched.run_until(sim::sec(1));
  CHECK(bed.got.empty());
  CHECK(bed.ledger.totals().dropped == 2000);

  bed.fab.set_link_state(*bed.topo.find_physical("fb"), LinkState::down);
  CHECK_THROWS(bed.fab.set_link_state(*bed.topo.find_physical("fb"), LinkState::down));
  bed.fab.inject(0, bed.packet({bed.link(0, 1), bed.link(1, 2)}));
  bed.sched.run_until(sim::sec(2));
  CHECK(bed.got.empty());
  CHECK(bed.ledger.totals().in_flight() == 0);
  CHECK(bed.ledger.totals().dropped == 3000);
}

TEST_CASE("a link going down discards copies in flight")
{
  Bed bed;
  bed.fab.inject(0, bed.packet({bed.link(0, 1), bed.link(1, 2)}));
  bed.sched.run_until(500);
  bed.fab.set_link_state(*bed.topo.find_physical("af"), LinkState::down);
  bed.sched.run_until(sim::sec(1));
  CHECK(bed.got.empty());
  CHECK(bed.ledger.totals().in_flight() == 0);
}

TEST_CASE("topology listeners hear about failures after the detection delay")
{
  Bed bed;
  sim::Time heard = -1;
  bed.fab.on_topology_change([&] (const pce::TopologyEvent& ev) {
    heard = bed.sched.now();
    CHECK(ev.new_state == LinkState::down);
  });
  bed.sched.run_until(100);
  bed.fab.set_link_state(0, LinkState::down);
  bed.sched.run_until(sim::sec(1));
  CHECK(heard == 100 + sim::msec(10));
}

TEST_CASE("forwarding nodes hold no per-flow state")
{
  Bed bed;
  const auto before = bed.fab.node(1).state_hash();
  for (int i = 0; i < 20; ++i) {
    bed.fab.inject(0, bed.packet({bed.link(0, 1), bed.link(1, 2 + i % 2)}));
  }
  bed.sched.run_until(sim::sec(1));
  bed.fab.set_link_state(*bed.topo.find_physical("fb"), LinkState::down);
  bed.sched.run_until(sim::sec(2));
  CHECK(bed.fab.node(1).state_hash() == before);
  CHECK(bed.fab.node(1).packets_in() == 20);
}

TEST_CASE("bloom false positives are counted against the intended links")
{
  pce::TopologyGraph g;
  g.add_node("a", NodeRole::nap);
  g.add_node("f", NodeRole::fn);
  for (int i = 0; i < 40; ++i) {
    g.add_node("x" + std::to_string(i), NodeRole::fn);
  }
  g.add_link("af", 0, 1, 1'000'000'000, 10);
  for (NodeId i = 0; i < 40; ++i) {
    g.add_link("fx" + std::to_string(i), 1, 2 + i, 1'000'000'000, 10);
  }
  g.assign_link_ids(fid::FidConfig{16, 2, fid::Mode::bloom}, 3);
  const std::vector<pce::LinkIndex> intended{*g.find_link(0, 1), *g.find_link(1, 2)};
  const auto f = g.link(intended[0]).lid.bits | g.link(intended[1]).lid.bits;
  const auto walk = fabric::traverse(g, 0, f);
  REQUIRE(walk.links.contains(intended[0]));
  REQUIRE(walk.links.contains(intended[1]));

  sim::Scheduler sched;
  telemetry::EventLog log(&sched);
  net::Runtime rt(sched, log);
  net::PacketLedger ledger(rt);
  fabric::Fabric fab(rt, g, ledger, fabric::FabricConfig{});
  auto msg = std::make_shared<net::Message>();
  msg->cls = net::ContentClass::chunk;
  msg->size = 100;
  net::Packet p;
  p.message = msg;
  p.size = 100;
  p.fid = f;
  p.intended = std::make_shared<std::vector<pce::LinkIndex>>(intended);
  fab.inject(0, p);
  sched.run_until(sim::sec(1));
  std::size_t fp = 0;
  for (const auto& e : log.events()) {
    fp += e.type == telemetry::EventType::false_positive ? 1 : 0;
  }
  CHECK(fp == walk.links.size() - intended.size());
  CHECK(ledger.totals().in_flight() == 0);
}

TEST_CASE("traversal matches an independent reachability walk")
{
  std::mt19937_64 rng(11);
  for (int instance = 0; instance < 200; ++instance) {
    auto g = testing::random_topology(rng);
    pce::Pce p(g);
    std::vector<NodeId> rx;
    for (NodeId n = 1; n < g.node_count(); ++n) {
      if (rng() % 3 == 0) {
        rx.push_back(n);
      }
    }
    pce::MulticastTree tree;
    try {
      tree = p.build_multicast_tree(0, rx);
    }
    catch (const pce::PartialTreeError& e) {
      tree = e.partial();
    }
    const auto t = fabric::traverse(g, 0, tree.fid);
    REQUIRE(t.links == testing::expected_delivery(g, 0, tree.fid));
    REQUIRE(std::set<pce::LinkIndex>(tree.links.begin(), tree.links.end()) == t.links);
    CHECK_FALSE(t.ttl_expired);
  }
}
