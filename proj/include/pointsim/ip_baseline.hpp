#pragma once

#include "pointsim/fabric.hpp"
#include "pointsim/net.hpp"
#include "pointsim/topology.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

// Conventional switched network: spanning tree, MAC learning, IGMP snooping.
namespace pointsim::ip {

using pce::LinkIndex;
using pce::NodeId;
using pce::PhysicalLinkId;

/// A switch port: either a core link or the access port of an attached host.
struct Port {
  bool host = false;
  std::uint32_t id = 0;

  static Port link(PhysicalLinkId p) { return {false, p}; }
  static Port access(net::HostId h) { return {true, h}; }
  friend auto operator<=>(const Port&, const Port&) = default;
};

/// BFS tree from the lowest-numbered switch over up links. Adjacency order
/// makes the lower-indexed of two parallel links win.
std::set<PhysicalLinkId> compute_spanning_tree(const pce::TopologyGraph& topo);

class StpState {
 public:
  StpState(const pce::TopologyGraph& topo, sim::Duration reconvergence_delay);

  const std::set<PhysicalLinkId>& active() const noexcept { return active_; }
  std::set<PhysicalLinkId> blocked() const;
  bool forwarding(PhysicalLinkId link) const { return active_.contains(link); }
  sim::Duration reconvergence_delay() const noexcept { return delay_; }
  std::uint64_t epoch() const noexcept { return epoch_; }
  std::uint64_t generation() const noexcept { return generation_; }
  bool converging() const noexcept { return converging_; }

  /// Blocks links that left the tree. Returns true when a reconvergence
  /// (after the delay) is needed, and bumps the generation.
  bool on_link_event();
  /// Activates the tree over the current up links if `generation` is still
  /// the latest. Returns false for a superseded timer.
  bool reconverge(std::uint64_t generation);

 private:
  const pce::TopologyGraph& topo_;
  sim::Duration delay_;
  std::set<PhysicalLinkId> active_;
  std::uint64_t epoch_ = 0;
  std::uint64_t generation_ = 0;
  bool converging_ = false;
};

/// Per-switch IGMP snooping state: group -> egress ports.
class SnoopTable {
 public:
  void join(const std::string& group, Port port) { groups_[group].insert(port); }
  /// Returns true when the group has no ports left.
  bool leave(const std::string& group, Port port);
  const std::set<Port>* egress(const std::string& group) const;
  void clear() { groups_.clear(); }
  std::size_t size() const noexcept { return groups_.size(); }

 private:
  std::map<std::string, std::set<Port>> groups_;
};

struct IpConfig {
  sim::Duration reconvergence_delay = sim::sec(30);
  std::int64_t mtu = 1400;
  int ttl = 64;
  std::optional<std::size_t> queue_cap;
};

class IpNetwork {
 public:
  IpNetwork(net::Runtime& rt, pce::TopologyGraph& topo, net::PacketLedger& ledger,
            net::AccessNetwork& access, IpConfig config);

  /// Where the multicast router for `group` sits (the source's edge switch).
  void set_mrouter(const std::string& group, NodeId node);

  /// Message from an attached host, entering its edge switch.
  void from_host(net::HostId host, const net::Message& msg);

  /// Throws std::invalid_argument when the state does not change.
  pce::TopologyEvent set_link_state(PhysicalLinkId link, pce::LinkState state);

  const StpState& stp() const noexcept { return stp_; }
  const SnoopTable& snoop(NodeId node) const { return snoop_.at(node); }
  std::size_t mac_entries(NodeId node) const { return mac_.at(node).size(); }
  const fabric::LinkEngine& links() const noexcept { return engine_; }
  const pce::TopologyGraph& topology() const noexcept { return topo_; }

 private:
  bool is_switch(NodeId node) const;
  LinkIndex egress_link(NodeId node, PhysicalLinkId link) const;
  std::optional<PhysicalLinkId> upstream(NodeId from, NodeId to) const;
  void arrive(LinkIndex via, net::Packet p);
  void switch_packet(NodeId node, Port ingress, net::Packet p);
  void igmp(NodeId node, Port ingress, net::Packet p);
  void multicast(NodeId node, Port ingress, net::Packet p);
  void unicast(NodeId node, Port ingress, net::Packet p);
  void emit(NodeId node, const std::vector<Port>& egress, net::Packet p);
  void deliver_host(NodeId node, net::HostId host, const net::Packet& p);
  void flush();

  net::Runtime& rt_;
  pce::TopologyGraph& topo_;
  net::PacketLedger& ledger_;
  net::AccessNetwork& access_;
  IpConfig config_;
  fabric::LinkEngine engine_;
  StpState stp_;
  std::vector<std::uint32_t> node_elements_;
  std::vector<std::uint32_t> physical_elements_;
  std::vector<SnoopTable> snoop_;
  std::vector<std::map<net::HostId, Port>> mac_;
  std::map<std::string, NodeId> mrouters_;
  net::Reassembler reassembly_;
};

} // namespace pointsim::ip
