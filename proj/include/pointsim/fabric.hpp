#pragma once

#include "pointsim/net.hpp"
#include "pointsim/topology.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <vector>

namespace pointsim::fabric {

using pce::LinkIndex;
using pce::NodeId;
using pce::PhysicalLinkId;

struct LinkCounters {
  std::int64_t tx_bytes = 0;
  std::int64_t tx_packets = 0;
  std::int64_t rx_bytes = 0;
  std::int64_t rx_packets = 0;
  std::int64_t drops = 0;
  std::int64_t false_positives = 0;
  std::int64_t queue_peak = 0;
};

/// Store-and-forward FIFO serialization for every directed link of a graph.
/// Shared by the ICN fabric and the IP baseline.
class LinkEngine {
 public:
  using Sink = std::function<void(LinkIndex, net::Packet)>;

  /// `queue_cap` bounds the packets waiting on or being serialized onto a
  /// link; nullopt means unbounded.
  LinkEngine(net::Runtime& rt, const pce::TopologyGraph& topo, net::PacketLedger& ledger,
             std::optional<std::size_t> queue_cap = std::nullopt);

  void set_sink(Sink sink) { sink_ = std::move(sink); }

  /// Queues a copy on the link. A down link or a full queue drops it.
  void transmit(LinkIndex link, net::Packet p);

  /// Discards everything queued or in flight on both halves.
  void reset(PhysicalLinkId link);

  const LinkCounters& counters(LinkIndex link) const { return state_.at(link).counters; }
  LinkCounters& counters(LinkIndex link) { return state_.at(link).counters; }
  std::uint32_t element(LinkIndex link) const { return state_.at(link).element; }
  std::size_t queued(LinkIndex link) const { return state_.at(link).queued; }

 private:
  struct State {
    sim::Time busy_until = 0;
    std::size_t queued = 0;
    std::uint64_t epoch = 0;
    std::uint32_t element = 0;
    LinkCounters counters;
  };

  net::Runtime& rt_;
  const pce::TopologyGraph& topo_;
  net::PacketLedger& ledger_;
  std::optional<std::size_t> queue_cap_;
  std::vector<State> state_;
  Sink sink_;
};

/// Forwarding node. Its decisions depend only on the packet FID and the
/// attached links; the only mutable members are counters.
class ForwardingNode {
 public:
  ForwardingNode(NodeId id, std::vector<LinkIndex> out_links, std::uint32_t element);

  /// Up attached links whose LinkId passes the FID test.
  std::vector<LinkIndex> forward_step(const fid::Fid& fid, const pce::TopologyGraph& topo) const;

  NodeId id() const noexcept { return id_; }
  std::uint32_t element() const noexcept { return element_; }
  const std::vector<LinkIndex>& out_links() const noexcept { return out_links_; }
  /// Hash over the node's configuration, which must never change in a run.
  std::uint64_t state_hash() const;

  std::int64_t packets_in() const noexcept { return packets_in_; }
  std::int64_t copies_out() const noexcept { return copies_out_; }
  void count(std::size_t copies) const
  {
    ++packets_in_;
    copies_out_ += static_cast<std::int64_t>(copies);
  }

 private:
  const NodeId id_;
  const std::vector<LinkIndex> out_links_;
  const std::uint32_t element_;
  mutable std::int64_t packets_in_ = 0;
  mutable std::int64_t copies_out_ = 0;
};

struct FabricConfig {
  std::optional<std::size_t> queue_cap;
  sim::Duration detection_delay = sim::msec(10);
};

/// The ICN forwarding plane plus failure injection and topology reporting.
class Fabric {
 public:
  using LocalDelivery = std::function<void(const net::Packet&)>;
  using TopologyListener = std::function<void(const pce::TopologyEvent&)>;

  Fabric(net::Runtime& rt, pce::TopologyGraph& topo, net::PacketLedger& ledger, FabricConfig config);

  void attach(NodeId nap, LocalDelivery deliver);
  void on_topology_change(TopologyListener listener) { listener_ = std::move(listener); }

  /// Packet enters the node's forwarding step now. Throws on unknown node.
  void inject(NodeId node, net::Packet p);

  /// Throws std::invalid_argument when the state does not change.
  pce::TopologyEvent set_link_state(PhysicalLinkId link, pce::LinkState state);

  const ForwardingNode& node(NodeId id) const { return nodes_.at(id); }
  const LinkEngine& links() const noexcept { return engine_; }
  const pce::TopologyGraph& topology() const noexcept { return topo_; }
  const FabricConfig& config() const noexcept { return config_; }

 private:
  void arrive(LinkIndex via, net::Packet p);
  void emit_copies(const ForwardingNode& fn, net::Packet p, bool local);

  net::Runtime& rt_;
  pce::TopologyGraph& topo_;
  net::PacketLedger& ledger_;
  FabricConfig config_;
  LinkEngine engine_;
  std::vector<ForwardingNode> nodes_;
  std::vector<LocalDelivery> local_;
  std::vector<std::uint32_t> physical_elements_;
  TopologyListener listener_;
};

struct Traversal {
  std::set<LinkIndex> links;
  std::set<NodeId> reached;
  std::size_t copies = 0;
  bool ttl_expired = false;
};

/// Zero-time walk of a FID from `src` applying the forwarding test at every
/// reached node, as the fabric does.
Traversal traverse(const pce::TopologyGraph& topo, NodeId src, const fid::Fid& fid, int ttl = 64);

} // namespace pointsim::fabric
