#pragma once

#include "pointsim/fid.hpp"
#include "pointsim/names.hpp"
#include "pointsim/net.hpp"
#include "pointsim/topology.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pointsim::pce {

class UnreachableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PathResult {
  std::vector<LinkIndex> links;
  fid::Fid fid;
  std::size_t cost = 0;
};

struct MulticastTree {
  fid::Fid fid;
  std::vector<LinkIndex> links; // sorted, unique
};

/// Some receivers could not be reached. `partial` covers the reachable ones.
class PartialTreeError : public std::runtime_error {
 public:
  PartialTreeError(MulticastTree partial, std::vector<NodeId> unreachable);
  const MulticastTree& partial() const noexcept { return partial_; }
  const std::vector<NodeId>& unreachable() const noexcept { return unreachable_; }

 private:
  MulticastTree partial_;
  std::vector<NodeId> unreachable_;
};

struct PathCacheEntry {
  std::vector<LinkIndex> links;
  fid::Fid fid;
  std::uint64_t epoch = 0;
};

/// How a publisher wants its subscribers served. Stream publishers get a
/// tree FID pushed whenever the subscriber set or the topology changes;
/// on-demand publishers ask for a tree when they have something to send.
enum class Delivery { stream, on_demand };

struct MatchNotice {
  ContentName name;
  NodeId publisher = 0;
  NodeId subscriber = 0;
  bool refresh = false;
  std::string payload;
};

struct FidUpdate {
  ContentName name;
  NodeId publisher = 0;
  MulticastTree tree;
  std::vector<NodeId> receivers;
  std::uint64_t epoch = 0;
};

struct ControlOutput {
  std::vector<MatchNotice> matches;
  std::vector<FidUpdate> updates;
};

struct InvalidationReport {
  std::uint64_t epoch = 0;
  std::size_t invalidated = 0;
  std::vector<MatchNotice> matches;
  std::vector<FidUpdate> updates;
};

/// Rendezvous plus topology manager. Holds its own view of link states, which
/// lags the fabric by the failure detection delay.
class Pce {
 public:
  explicit Pce(TopologyGraph topology);

  const TopologyGraph& topology() const noexcept { return topo_; }
  std::uint64_t epoch() const noexcept { return epoch_; }

  /// Hop-count shortest path over up links; ties go to the lower neighbour id.
  /// Throws UnreachableError.
  PathResult compute_path(NodeId src, NodeId dst);
  std::uint64_t path_computations() const noexcept { return computations_; }

  /// Cached unicast path, recomputed first when missing or stale.
  const PathCacheEntry& cached_path(NodeId src, NodeId dst);

  /// Throws UnreachableError when no registered publisher is reachable.
  NodeId select_publisher(const ContentName& name, NodeId subscriber);

  /// Throws PartialTreeError when some receivers are unreachable.
  MulticastTree build_multicast_tree(NodeId src, std::span<const NodeId> receivers);
  fid::Fid build_multicast_fid(NodeId src, std::span<const NodeId> receivers)
  {
    return build_multicast_tree(src, receivers).fid;
  }

  ControlOutput publish(const ContentName& name, NodeId node, Delivery delivery);
  ControlOutput unpublish(const ContentName& name, NodeId node);
  /// Re-registration is idempotent unless `refresh` asks for a fresh match.
  ControlOutput subscribe(const ContentName& name, NodeId node, bool refresh = false,
                          std::string payload = {});
  ControlOutput unsubscribe(const ContentName& name, NodeId node);

  /// Throws std::invalid_argument for an unknown link.
  InvalidationReport on_topology_event(const TopologyEvent& event);

  std::size_t subscription_count(const ContentName& name) const;
  std::size_t subscription_count() const;
  std::optional<NodeId> matched_publisher(const ContentName& name, NodeId subscriber) const;
  const std::map<std::pair<NodeId, NodeId>, PathCacheEntry>& cache() const noexcept { return cache_; }

  /// Hash over the routing state (epoch, path cache, link view).
  std::uint64_t state_hash() const;

 private:
  struct Subscription {
    std::optional<NodeId> publisher;
    std::string payload;
  };

  bool entry_valid(const PathCacheEntry& e) const;
  std::vector<NodeId> candidate_publishers(const ContentName& name) const;
  std::optional<Delivery> delivery_of(const ContentName& name, NodeId publisher) const;
  std::vector<NodeId> receivers_of(const ContentName& name, NodeId publisher) const;
  void push_stream_update(const ContentName& name, NodeId publisher, ControlOutput& out);
  void rematch(const ContentName& published, ControlOutput& out);
  std::vector<LinkIndex> bfs(NodeId src, NodeId dst) const;

  TopologyGraph topo_;
  std::uint64_t epoch_ = 0;
  std::uint64_t computations_ = 0;
  std::map<std::pair<NodeId, NodeId>, PathCacheEntry> cache_;
  std::map<ContentName, std::map<NodeId, Delivery>> publishers_;
  std::map<ContentName, std::map<NodeId, Subscription>> subscriptions_;
  // Last tree pushed per stream (name, publisher).
  std::map<std::pair<ContentName, NodeId>, MulticastTree> stream_trees_;
};

struct PceTiming {
  sim::Duration processing = sim::msec(1);
  sim::Duration control_latency = sim::msec(1);
};

/// Serialized control-plane actor around Pce. Requests reach it after the
/// control latency, are processed one at a time, and results travel back
/// after another control latency.
class PceActor {
 public:
  using MatchHandler = std::function<void(const MatchNotice&)>;
  using UpdateHandler = std::function<void(const FidUpdate&)>;

  PceActor(net::Runtime& rt, Pce& pce, PceTiming timing);

  void on_match(MatchHandler h) { match_handler_ = std::move(h); }
  void on_fid_update(UpdateHandler h) { update_handler_ = std::move(h); }

  void publish(const ContentName& name, NodeId node, Delivery delivery);
  void unpublish(const ContentName& name, NodeId node);
  void subscribe(const ContentName& name, NodeId node, bool refresh = false, std::string payload = {});
  void unsubscribe(const ContentName& name, NodeId node);
  /// Called by the fabric once a failure has been detected.
  void topology_event(const TopologyEvent& event);

  Pce& core() noexcept { return pce_; }
  std::uint32_t element() const noexcept { return element_; }
  const PceTiming& timing() const noexcept { return timing_; }
  std::uint64_t processed() const noexcept { return processed_; }

 private:
  void enqueue(sim::Time arrival, std::function<ControlOutput()> work);
  void dispatch(ControlOutput out);

  net::Runtime& rt_;
  Pce& pce_;
  PceTiming timing_;
  std::uint32_t element_;
  sim::Time busy_until_ = 0;
  std::uint64_t processed_ = 0;
  MatchHandler match_handler_;
  UpdateHandler update_handler_;
};

} // namespace pointsim::pce
