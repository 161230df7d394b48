#include "pointsim/ip_baseline.hpp"
#include "pointsim/scenario.hpp"

#include <doctest.h>

#include <map>
#include <numeric>

using namespace pointsim;
using pce::LinkState;
using pce::NodeId;
using pce::NodeRole;

namespace {

pce::TopologyGraph trial()
{
  const auto cfg = harness::load_scenario(std::filesystem::path(POINTSIM_SCENARIO_DIR) / "trial_topology.json");
  return harness::build_topology(cfg, cfg.seed);
}

pce::PhysicalLinkId phys(const pce::TopologyGraph& g, std::string_view name)
{
  return *g.find_physical(name);
}

// Spanning: every switch reachable over tree links, and |tree| == switches - 1.
bool is_spanning_tree(const pce::TopologyGraph& g, const std::set<pce::PhysicalLinkId>& tree)
{
  std::vector<NodeId> parent(g.node_count());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&] (NodeId x) {
    while (parent[x] != x) {
      x = parent[x] = parent[parent[x]];
    }
    return x;
  };
  for (auto p : tree) {
    const auto& l = g.link(g.physical(p).forward);
    const auto a = find(l.src);
    const auto b = find(l.dst);
    if (a == b) {
      return false;
    }
    parent[a] = b;
  }
  std::size_t switches = 0;
  std::set<NodeId> roots;
  for (const auto& n : g.nodes()) {
    if (n.role != NodeRole::pce) {
      ++switches;
      roots.insert(find(n.id));
    }
  }
  return roots.size() == 1 && tree.size() == switches - 1;
}

} // namespace

TEST_CASE("spanning tree over the trial topology uses the primary trunk")
{
  const auto g = trial();
  const auto tree = ip::compute_spanning_tree(g);
  CHECK(tree.contains(phys(g, "trunk-primary")));
  CHECK_FALSE(tree.contains(phys(g, "trunk-backup")));
  CHECK_FALSE(tree.contains(phys(g, "pce-uplink")));
  CHECK(is_spanning_tree(g, tree));
}

TEST_CASE("trunk failure blocks at once and activates the backup only after reconvergence")
{
  auto g = trial();
  ip::StpState stp(g, sim::sec(30));
  const auto primary = phys(g, "trunk-primary");
  const auto backup = phys(g, "trunk-backup");
  g.set_state(primary, LinkState::down);
  CHECK(stp.on_link_event());
  CHECK_FALSE(stp.forwarding(primary));
  CHECK_FALSE(stp.forwarding(backup));
  CHECK(stp.converging());
  const auto gen = stp.generation();
  CHECK_FALSE(stp.reconverge(gen - 1));
  CHECK(stp.reconverge(gen));
  CHECK(stp.forwarding(backup));
  CHECK(is_spanning_tree(g, stp.active()));
  CHECK(stp.epoch() == 1);

  g.set_state(primary, LinkState::up);
  CHECK(stp.on_link_event());
  CHECK_FALSE(stp.forwarding(backup)); // left the candidate tree
  CHECK_FALSE(stp.forwarding(primary));
  CHECK(stp.reconverge(stp.generation()));
  CHECK(stp.forwarding(primary));
  CHECK_FALSE(stp.forwarding(backup));
}

TEST_CASE("events on links outside the tree or at the edge need no reconvergence")
{
  auto g = trial();
  ip::StpState stp(g, sim::sec(30));
  const auto before = stp.active();
  g.set_state(phys(g, "trunk-backup"), LinkState::down);
  CHECK_FALSE(stp.on_link_event());
  CHECK(stp.active() == before);
  g.set_state(phys(g, "trunk-backup"), LinkState::up);
  CHECK_FALSE(stp.on_link_event());
  CHECK(stp.active() == before);

  const auto leaf = phys(g, "cnap-5-uplink");
  g.set_state(leaf, LinkState::down);
  CHECK_FALSE(stp.on_link_event());
  CHECK_FALSE(stp.forwarding(leaf));
  CHECK_FALSE(stp.converging());
}

TEST_CASE("a later event supersedes a pending reconvergence")
{
  auto g = trial();
  ip::StpState stp(g, sim::sec(30));
  const auto primary = phys(g, "trunk-primary");
  g.set_state(primary, LinkState::down);
  REQUIRE(stp.on_link_event());
  const auto stale = stp.generation();
  g.set_state(phys(g, "cnap-5-uplink"), LinkState::down);
  REQUIRE(stp.on_link_event());
  CHECK_FALSE(stp.reconverge(stale));
  CHECK(stp.reconverge(stp.generation()));
}

TEST_CASE("snoop table")
{
  ip::SnoopTable t;
  t.join("g", ip::Port::link(1));
  t.join("g", ip::Port::access(4));
  CHECK(t.egress("g")->size() == 2);
  CHECK_FALSE(t.leave("g", ip::Port::link(1)));
  CHECK(t.leave("g", ip::Port::access(4)));
  CHECK(t.egress("g") == nullptr);
  CHECK(t.leave("h", ip::Port::link(1)));
}

namespace {

// Triangle s0-s1-s2 plus a parallel s1-s2 link; h0 on s0, h1 on s2.
struct IpBed {
  sim::Scheduler sched;
  telemetry::EventLog log{&sched};
  net::Runtime rt{sched, log};
  net::PacketLedger ledger{rt};
  pce::TopologyGraph topo;
  net::AccessNetwork access{rt};
  std::optional<ip::IpNetwork> net;
  std::map<net::HostId, std::vector<net::Message>> got;

  IpBed()
  {
    topo.add_node("s0", NodeRole::nap);
    topo.add_node("s1", NodeRole::fn);
    topo.add_node("s2", NodeRole::nap);
    topo.add_link("a", 0, 1, 1'000'000'000, 100);
    topo.add_link("b", 0, 2, 1'000'000'000, 100);
    topo.add_link("c", 1, 2, 1'000'000'000, 100);
    topo.add_link("d", 1, 2, 1'000'000'000, 100);
    topo.assign_link_ids(fid::FidConfig{64, 1, fid::Mode::exact}, 1);
    for (int i = 0; i < 2; ++i) {
      const auto h = access.add_host("h" + std::to_string(i), i == 0 ? 0 : 2, 1'000'000'000, 10);
      access.set_receiver(h, [this, h] (const net::Message& m) { got[h].push_back(m); });
    }
    net.emplace(rt, topo, ledger, access, ip::IpConfig{});
    access.set_uplink([this] (net::HostId h, const net::Message& m) { net->from_host(h, m); });
  }

  net::Message unicast(net::HostId src, net::HostId dst, std::int64_t size = 3000)
  {
    net::Message m;
    m.id = rt.message_id();
    m.type = net::MessageType::http_request;
    m.cls = net::ContentClass::request;
    m.size = size;
    m.src = src;
    m.dst = dst;
    return m;
  }

  std::int64_t tx(std::string_view link) const
  {
    const auto& pl = topo.physical(*topo.find_physical(link));
    return net->links().counters(pl.forward).tx_bytes + net->links().counters(pl.reverse).tx_bytes;
  }
};

} // namespace

TEST_CASE("unknown-destination floods never cross blocked links")
{
  IpBed bed;
  const auto& active = bed.net->stp().active();
  CHECK(active == std::set<pce::PhysicalLinkId>{0, 1});
  bed.access.send_up(0, bed.unicast(0, 1));
  bed.sched.run_until(sim::sec(1));
  REQUIRE(bed.got[1].size() == 1);
  CHECK(bed.tx("c") == 0);
  CHECK(bed.tx("d") == 0);
  CHECK(bed.tx("a") == 3000); // flooded towards s1, which has nowhere to go
  CHECK(bed.ledger.totals().in_flight() == 0);

  // Learned: the reply goes straight back, no flood.
  bed.access.send_up(1, bed.unicast(1, 0));
  bed.sched.run_until(sim::sec(2));
  REQUIRE(bed.got[0].size() == 1);
  CHECK(bed.tx("a") == 3000);
  CHECK(bed.net->mac_entries(0) >= 1);
}

TEST_CASE("multicast follows snooped joins and stops at a flush")
{
  IpBed bed;
  bed.net->set_mrouter("239.1.1.1", 0);
  net::Message join;
  join.type = net::MessageType::igmp;
  join.cls = net::ContentClass::igmp;
  join.size = 64;
  join.src = 1;
  join.group = "239.1.1.1";
  join.join = true;
  bed.access.send_up(1, join);
  bed.sched.run_until(sim::msec(10));
  CHECK(bed.net->snoop(2).egress("239.1.1.1") != nullptr);
  CHECK(bed.net->snoop(0).egress("239.1.1.1") != nullptr);

  auto data = [&] {
    net::Message m;
    m.type = net::MessageType::iptv_data;
    m.cls = net::ContentClass::iptv;
    m.size = 1400;
    m.src = 0;
    m.group = "239.1.1.1";
    m.channel = 1;
    return m;
  };
  bed.access.send_up(0, data());
  bed.sched.run_until(sim::msec(20));
  CHECK(bed.got[1].size() == 1);
  CHECK(bed.got[0].empty());

  bed.net->set_link_state(*bed.topo.find_physical("b"), LinkState::down);
  bed.access.send_up(0, data());
  bed.sched.run_until(sim::sec(29));
  CHECK(bed.got[1].size() == 1);
  bed.sched.run_until(sim::sec(31));
  CHECK(bed.net->stp().forwarding(*bed.topo.find_physical("c")));
  CHECK(bed.net->snoop(2).size() == 0); // flushed; membership returns with the next report
  CHECK(bed.ledger.totals().in_flight() == 0);
}
