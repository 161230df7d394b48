#pragma once

#include "pointsim/fid.hpp"
#include "pointsim/simkernel.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pointsim::pce {

using NodeId = std::uint32_t;
using LinkIndex = std::uint32_t;     // directed link
using PhysicalLinkId = std::uint32_t; // bidirectional pair

enum class NodeRole { fn, nap, pce };
enum class LinkState { up, down };

const char* to_string(NodeRole role);
NodeRole role_from_string(const std::string& s);

struct Node {
  NodeId id = 0;
  std::string name;
  NodeRole role = NodeRole::fn;
};

struct Link {
  LinkIndex index = 0;
  NodeId src = 0;
  NodeId dst = 0;
  std::int64_t capacity_bps = 0;
  sim::Duration latency = 0;
  LinkState state = LinkState::up;
  fid::LinkId lid;
  PhysicalLinkId physical = 0;
  std::string name; // "<physical>:<src>><dst>"
};

struct PhysicalLink {
  std::string name;
  LinkIndex forward = 0; // a -> b
  LinkIndex reverse = 0; // b -> a
};

/// A physical link changed state. Both directed halves change together.
struct TopologyEvent {
  PhysicalLinkId link = 0;
  LinkState new_state = LinkState::down;
  sim::Time at = 0;
};

/// Directed multigraph of nodes and links. Adjacency lists are kept sorted by
/// (neighbour id, link index), which fixes every traversal order.
class TopologyGraph {
 public:
  NodeId add_node(std::string name, NodeRole role);
  PhysicalLinkId add_link(std::string name, NodeId a, NodeId b, std::int64_t capacity_bps,
                          sim::Duration latency);

  /// Assigns a LinkId to every directed link, in link-index order.
  void assign_link_ids(const fid::FidConfig& config, std::uint64_t seed);
  std::size_t fid_width() const noexcept { return fid_width_; }

  const Node& node(NodeId id) const { return nodes_.at(id); }
  const Link& link(LinkIndex i) const { return links_.at(i); }
  const PhysicalLink& physical(PhysicalLinkId p) const { return physical_.at(p); }
  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::span<const Link> links() const noexcept { return links_; }
  std::span<const PhysicalLink> physical_links() const noexcept { return physical_; }
  std::span<const LinkIndex> out_links(NodeId id) const { return out_.at(id); }

  std::optional<NodeId> find_node(std::string_view name) const;
  std::optional<PhysicalLinkId> find_physical(std::string_view name) const;
  std::optional<LinkIndex> find_link(NodeId src, NodeId dst) const;

  bool is_up(LinkIndex i) const { return links_.at(i).state == LinkState::up; }
  void set_state(PhysicalLinkId p, LinkState state);
  LinkState physical_state(PhysicalLinkId p) const { return links_.at(physical_.at(p).forward).state; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t link_count() const noexcept { return links_.size(); }

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<PhysicalLink> physical_;
  std::vector<std::vector<LinkIndex>> out_;
  std::size_t fid_width_ = 0;
};

} // namespace pointsim::pce
