#include "pointsim/ip_baseline.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace pointsim::ip {

using telemetry::EventType;

namespace {

bool
switch_node(const pce::TopologyGraph& topo, NodeId n)
{
  return topo.node(n).role != pce::NodeRole::pce;
}

} // namespace

std::set<PhysicalLinkId>
compute_spanning_tree(const pce::TopologyGraph& topo)
{
  std::set<PhysicalLinkId> tree;
  std::optional<NodeId> root;
  for (const auto& n : topo.nodes()) {
    if (switch_node(topo, n.id)) {
      root = n.id;
      break;
    }
  }
  if (!root) {
    return tree;
  }
  std::vector<bool> seen(topo.node_count(), false);
  seen[*root] = true;
  std::deque<NodeId> work{*root};
  while (!work.empty()) {
    const NodeId u = work.front();
    work.pop_front();
    for (auto li : topo.out_links(u)) {
      const auto& l = topo.link(li);
      if (!topo.is_up(li) || seen[l.dst] || !switch_node(topo, l.dst)) {
        continue;
      }
      seen[l.dst] = true;
      tree.insert(l.physical);
      work.push_back(l.dst);
    }
  }
  return tree;
}

StpState::StpState(const pce::TopologyGraph& topo, sim::Duration reconvergence_delay)
  : topo_(topo), delay_(reconvergence_delay), active_(compute_spanning_tree(topo))
{
  if (delay_ < 0) {
    throw std::invalid_argument("reconvergence delay must be non-negative");
  }
}

std::set<PhysicalLinkId>
StpState::blocked() const
{
  std::set<PhysicalLinkId> out;
  for (PhysicalLinkId p = 0; p < topo_.physical_links().size(); ++p) {
    if (!active_.contains(p)) {
      out.insert(p);
    }
  }
  return out;
}

bool
StpState::on_link_event()
{
  const auto target = compute_spanning_tree(topo_);
  std::erase_if(active_, [&] (PhysicalLinkId p) { return !target.contains(p); });
  if (active_ == target) {
    if (converging_) {
      // A pending reconvergence is now moot.
      ++generation_;
      converging_ = false;
    }
    return false;
  }
  ++generation_;
  converging_ = true;
  return true;
}

bool
StpState::reconverge(std::uint64_t generation)
{
  if (generation != generation_ || !converging_) {
    return false;
  }
  active_ = compute_spanning_tree(topo_);
  converging_ = false;
  ++epoch_;
  return true;
}

bool
SnoopTable::leave(const std::string& group, Port port)
{
  auto it = groups_.find(group);
  if (it == groups_.end()) {
    return true;
  }
  it->second.erase(port);
  if (it->second.empty()) {
    groups_.erase(it);
    return true;
  }
  return false;
}

const std::set<Port>*
SnoopTable::egress(const std::string& group) const
{
  auto it = groups_.find(group);
  return it == groups_.end() ? nullptr : &it->second;
}

IpNetwork::IpNetwork(net::Runtime& rt, pce::TopologyGraph& topo, net::PacketLedger& ledger,
                     net::AccessNetwork& access, IpConfig config)
  : rt_(rt)
  , topo_(topo)
  , ledger_(ledger)
  , access_(access)
  , config_(config)
  , engine_(rt, topo, ledger, config.queue_cap)
  , stp_(topo, config.reconvergence_delay)
  , snoop_(topo.node_count())
  , mac_(topo.node_count())
{
  if (config_.mtu <= 0 || config_.ttl <= 0) {
    throw std::invalid_argument("invalid IP network configuration");
  }
  for (const auto& n : topo.nodes()) {
    node_elements_.push_back(rt.log.intern(n.name));
  }
  for (const auto& pl : topo.physical_links()) {
    physical_elements_.push_back(rt.log.intern(pl.name));
  }
  engine_.set_sink([this] (LinkIndex via, net::Packet p) { arrive(via, std::move(p)); });
}

bool
IpNetwork::is_switch(NodeId node) const
{
  return switch_node(topo_, node);
}

void
IpNetwork::set_mrouter(const std::string& group, NodeId node)
{
  if (node >= topo_.node_count() || !is_switch(node)) {
    throw std::invalid_argument("multicast router must sit on a switch");
  }
  mrouters_[group] = node;
}

LinkIndex
IpNetwork::egress_link(NodeId node, PhysicalLinkId link) const
{
  const auto& pl = topo_.physical(link);
  return topo_.link(pl.forward).src == node ? pl.forward : pl.reverse;
}

std::optional<PhysicalLinkId>
IpNetwork::upstream(NodeId from, NodeId to) const
{
  if (from == to) {
    return std::nullopt;
  }
  std::vector<std::optional<PhysicalLinkId>> first(topo_.node_count());
  std::vector<bool> seen(topo_.node_count(), false);
  seen[from] = true;
  std::deque<NodeId> work{from};
  while (!work.empty()) {
    const NodeId u = work.front();
    work.pop_front();
    for (auto li : topo_.out_links(u)) {
      const auto& l = topo_.link(li);
      if (seen[l.dst] || !topo_.is_up(li) || !stp_.forwarding(l.physical)) {
        continue;
      }
      seen[l.dst] = true;
      first[l.dst] = u == from ? l.physical : first[u];
      if (l.dst == to) {
        return first[l.dst];
      }
      work.push_back(l.dst);
    }
  }
  return std::nullopt;
}

void
IpNetwork::from_host(net::HostId host, const net::Message& msg)
{
  const NodeId node = access_.attach(host);
  if (node >= topo_.node_count() || !is_switch(node)) {
    throw std::invalid_argument("host attached to a non-switch node");
  }
  auto shared = std::make_shared<const net::Message>(msg);
  for (auto& p : net::segment(shared, config_.mtu, node, config_.ttl, rt_)) {
    ledger_.inject(node_elements_[node], p);
    switch_packet(node, Port::access(host), std::move(p));
  }
}

void
IpNetwork::arrive(LinkIndex via, net::Packet p)
{
  const auto& l = topo_.link(via);
  if (!stp_.forwarding(l.physical)) {
    ledger_.drop(node_elements_[l.dst], p, "blocked");
    return;
  }
  if (--p.ttl <= 0) {
    ledger_.drop(node_elements_[l.dst], p, "ttl");
    return;
  }
  switch_packet(l.dst, Port::link(l.physical), std::move(p));
}

void
IpNetwork::switch_packet(NodeId node, Port ingress, net::Packet p)
{
  switch (p.message->type) {
  case net::MessageType::igmp:
    igmp(node, ingress, std::move(p));
    break;
  case net::MessageType::iptv_data:
    multicast(node, ingress, std::move(p));
    break;
  default:
    unicast(node, ingress, std::move(p));
    break;
  }
}

void
IpNetwork::igmp(NodeId node, Port ingress, net::Packet p)
{
  const auto& msg = *p.message;
  auto& table = snoop_[node];
  bool onward = true;
  if (msg.join) {
    table.join(msg.group, ingress);
  }
  else {
    onward = table.leave(msg.group, ingress);
  }
  auto mr = mrouters_.find(msg.group);
  if (mr == mrouters_.end()) {
    ledger_.drop(node_elements_[node], p, "no_mrouter");
    return;
  }
  if (!onward || mr->second == node) {
    ledger_.deliver(node_elements_[node], p);
    return;
  }
  const auto up = upstream(node, mr->second);
  if (!up) {
    ledger_.drop(node_elements_[node], p, "no_route");
    return;
  }
  engine_.transmit(egress_link(node, *up), std::move(p));
}

void
IpNetwork::multicast(NodeId node, Port ingress, net::Packet p)
{
  std::vector<Port> egress;
  if (const auto* ports = snoop_[node].egress(p.message->group)) {
    for (const auto& port : *ports) {
      if (port == ingress) {
        continue;
      }
      if (!port.host && (!stp_.forwarding(port.id) || topo_.physical_state(port.id) != pce::LinkState::up)) {
        continue;
      }
      egress.push_back(port);
    }
  }
  if (egress.empty()) {
    ledger_.drop(node_elements_[node], p, "no_egress");
    return;
  }
  emit(node, egress, std::move(p));
}

void
IpNetwork::unicast(NodeId node, Port ingress, net::Packet p)
{
  const auto& msg = *p.message;
  if (msg.dst == net::kNoHost || msg.dst >= access_.size()) {
    ledger_.drop(node_elements_[node], p, "no_destination");
    return;
  }
  if (msg.src != net::kNoHost) {
    mac_[node][msg.src] = ingress;
  }
  if (access_.attach(msg.dst) == node) {
    if (ingress == Port::access(msg.dst)) {
      ledger_.drop(node_elements_[node], p, "filtered");
      return;
    }
    emit(node, {Port::access(msg.dst)}, std::move(p));
    return;
  }
  if (auto it = mac_[node].find(msg.dst); it != mac_[node].end()) {
    const Port port = it->second;
    if (port == ingress) {
      ledger_.drop(node_elements_[node], p, "filtered");
      return;
    }
    if (!stp_.forwarding(port.id)) {
      ledger_.drop(node_elements_[node], p, "blocked");
      return;
    }
    emit(node, {port}, std::move(p));
    return;
  }
  std::vector<Port> flood;
  for (auto li : topo_.out_links(node)) {
    const auto& l = topo_.link(li);
    const Port port = Port::link(l.physical);
    if (port != ingress && stp_.forwarding(l.physical) && topo_.is_up(li)) {
      flood.push_back(port);
    }
  }
  if (flood.empty()) {
    ledger_.drop(node_elements_[node], p, "flood_filtered");
    return;
  }
  emit(node, flood, std::move(p));
}

void
IpNetwork::emit(NodeId node, const std::vector<Port>& egress, net::Packet p)
{
  ledger_.replicate(node_elements_[node], p, egress.size());
  for (const Port port : egress) {
    if (port.host) {
      deliver_host(node, port.id, p);
    }
    else {
      engine_.transmit(egress_link(node, port.id), p);
    }
  }
}

void
IpNetwork::deliver_host(NodeId node, net::HostId host, const net::Packet& p)
{
  ledger_.deliver(node_elements_[node], p);
  const std::uint64_t key = (static_cast<std::uint64_t>(node) << 32) | host;
  if (auto msg = reassembly_.add(key, p)) {
    net::Message copy = *msg;
    if (copy.type == net::MessageType::iptv_data) {
      copy.dst = host;
    }
    access_.send_down(host, std::move(copy));
  }
}

pce::TopologyEvent
IpNetwork::set_link_state(PhysicalLinkId link, pce::LinkState state)
{
  if (link >= topo_.physical_links().size()) {
    throw std::invalid_argument("unknown link");
  }
  if (topo_.physical_state(link) == state) {
    throw std::invalid_argument("link '" + topo_.physical(link).name + "' is already " +
                                (state == pce::LinkState::up ? "up" : "down"));
  }
  topo_.set_state(link, state);
  if (state == pce::LinkState::down) {
    engine_.reset(link);
  }
  rt_.log.emit(EventType::link_state, physical_elements_[link], {state == pce::LinkState::up ? 1 : 0});
  if (stp_.on_link_event()) {
    const auto generation = stp_.generation();
    rt_.scheduler.schedule(stp_.reconvergence_delay(), [this, generation] {
      if (stp_.reconverge(generation)) {
        flush();
      }
    });
  }
  return {link, state, rt_.now()};
}

void
IpNetwork::flush()
{
  std::string names;
  for (auto p : stp_.active()) {
    if (!names.empty()) {
      names += ',';
    }
    names += topo_.physical(p).name;
  }
  const auto epoch = static_cast<std::int64_t>(stp_.epoch());
  const std::uint32_t el = rt_.log.intern("stp");
  rt_.log.emit(EventType::stp_change, el, {epoch, static_cast<std::int64_t>(stp_.active().size())}, names);
  for (auto& t : snoop_) {
    t.clear();
  }
  for (auto& m : mac_) {
    m.clear();
  }
  rt_.log.emit(EventType::snoop_flush, el, {epoch});
}

} // namespace pointsim::ip
