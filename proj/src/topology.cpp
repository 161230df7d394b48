#include "pointsim/topology.hpp"

#include <algorithm>
#include <stdexcept>

namespace pointsim::pce {

const char*
to_string(NodeRole role)
{
  switch (role) {
  case NodeRole::fn:
    return "fn";
  case NodeRole::nap:
    return "nap";
  case NodeRole::pce:
    return "pce";
  }
  return "?";
}

NodeRole
role_from_string(const std::string& s)
{
  if (s == "fn") {
    return NodeRole::fn;
  }
  if (s == "nap") {
    return NodeRole::nap;
  }
  if (s == "pce") {
    return NodeRole::pce;
  }
  throw std::invalid_argument("unknown node role '" + s + "'");
}

NodeId
TopologyGraph::add_node(std::string name, NodeRole role)
{
  if (role == NodeRole::pce &&
      std::any_of(nodes_.begin(), nodes_.end(), [] (const Node& n) { return n.role == NodeRole::pce; })) {
    throw std::invalid_argument("topology allows at most one PCE node");
  }
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back({id, std::move(name), role});
  out_.emplace_back();
  return id;
}

PhysicalLinkId
TopologyGraph::add_link(std::string name, NodeId a, NodeId b, std::int64_t capacity_bps,
                        sim::Duration latency)
{
  if (a >= nodes_.size() || b >= nodes_.size()) {
    throw std::invalid_argument("link endpoint does not exist");
  }
  if (a == b) {
    throw std::invalid_argument("self-loop links are not allowed");
  }
  if (capacity_bps <= 0 || latency < 0) {
    throw std::invalid_argument("link needs positive capacity and non-negative latency");
  }
  const auto pid = static_cast<PhysicalLinkId>(physical_.size());
  auto make = [&] (NodeId s, NodeId d) {
    const auto idx = static_cast<LinkIndex>(links_.size());
    Link l;
    l.index = idx;
    l.src = s;
    l.dst = d;
    l.capacity_bps = capacity_bps;
    l.latency = latency;
    l.physical = pid;
    l.name = name + ":" + nodes_[s].name + ">" + nodes_[d].name;
    links_.push_back(std::move(l));
    auto& adj = out_[s];
    adj.push_back(idx);
    std::sort(adj.begin(), adj.end(), [this] (LinkIndex x, LinkIndex y) {
      const auto& lx = links_[x];
      const auto& ly = links_[y];
      return lx.dst != ly.dst ? lx.dst < ly.dst : x < y;
    });
    return idx;
  };
  const LinkIndex fwd = make(a, b);
  const LinkIndex rev = make(b, a);
  physical_.push_back({std::move(name), fwd, rev});
  return pid;
}

void
TopologyGraph::assign_link_ids(const fid::FidConfig& config, std::uint64_t seed)
{
  auto ids = fid::assign_link_ids(links_.size(), config, seed);
  for (std::size_t i = 0; i < links_.size(); ++i) {
    links_[i].lid = std::move(ids[i]);
  }
  fid_width_ = config.m;
}

std::optional<NodeId>
TopologyGraph::find_node(std::string_view name) const
{
  for (const auto& n : nodes_) {
    if (n.name == name) {
      return n.id;
    }
  }
  return std::nullopt;
}

std::optional<PhysicalLinkId>
TopologyGraph::find_physical(std::string_view name) const
{
  for (std::size_t i = 0; i < physical_.size(); ++i) {
    if (physical_[i].name == name) {
      return static_cast<PhysicalLinkId>(i);
    }
  }
  return std::nullopt;
}

std::optional<LinkIndex>
TopologyGraph::find_link(NodeId src, NodeId dst) const
{
  for (auto i : out_.at(src)) {
    if (links_[i].dst == dst) {
      return i;
    }
  }
  return std::nullopt;
}

void
TopologyGraph::set_state(PhysicalLinkId p, LinkState state)
{
  const auto& pl = physical_.at(p);
  links_[pl.forward].state = state;
  links_[pl.reverse].state = state;
}

} // namespace pointsim::pce
