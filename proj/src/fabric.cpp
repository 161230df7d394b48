#include "pointsim/fabric.hpp"

#include "pointsim/hash.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace pointsim::fabric {

using telemetry::EventType;

LinkEngine::LinkEngine(net::Runtime& rt, const pce::TopologyGraph& topo, net::PacketLedger& ledger,
                       std::optional<std::size_t> queue_cap)
  : rt_(rt), topo_(topo), ledger_(ledger), queue_cap_(queue_cap), state_(topo.link_count())
{
  if (queue_cap_ && *queue_cap_ == 0) {
    throw std::invalid_argument("queue cap must be at least 1");
  }
  for (const auto& l : topo.links()) {
    state_[l.index].element = rt.log.intern(l.name);
  }
}

void
LinkEngine::transmit(LinkIndex link, net::Packet p)
{
  auto& st = state_.at(link);
  if (!topo_.is_up(link)) {
    ++st.counters.drops;
    ledger_.drop(st.element, p, "link_down");
    return;
  }
  if (queue_cap_ && st.queued >= *queue_cap_) {
    ++st.counters.drops;
    ledger_.drop(st.element, p, "queue_full");
    return;
  }
  const auto& l = topo_.link(link);
  ledger_.tx(st.element, p);
  st.counters.tx_bytes += p.size;
  ++st.counters.tx_packets;
  const sim::Time start = std::max(rt_.now(), st.busy_until);
  const sim::Time finish = start + sim::transmission_time(p.size, l.capacity_bps);
  st.busy_until = finish;
  ++st.queued;
  st.counters.queue_peak = std::max<std::int64_t>(st.counters.queue_peak, static_cast<std::int64_t>(st.queued));
  const std::uint64_t epoch = st.epoch;
  rt_.scheduler.schedule_at(finish, [this, link, epoch] {
    auto& s = state_[link];
    if (s.epoch == epoch && s.queued > 0) {
      --s.queued;
    }
  });
  rt_.scheduler.schedule_at(finish + l.latency, [this, link, epoch, p = std::move(p)]() mutable {
    auto& s = state_[link];
    if (s.epoch != epoch || !topo_.is_up(link)) {
      ++s.counters.drops;
      ledger_.drop(s.element, p, "link_down");
      return;
    }
    s.counters.rx_bytes += p.size;
    ++s.counters.rx_packets;
    if (sink_) {
      sink_(link, std::move(p));
    }
  });
}

void
LinkEngine::reset(PhysicalLinkId link)
{
  const auto& pl = topo_.physical(link);
  for (auto li : {pl.forward, pl.reverse}) {
    auto& s = state_[li];
    ++s.epoch;
    s.queued = 0;
    s.busy_until = rt_.now();
  }
}

ForwardingNode::ForwardingNode(NodeId id, std::vector<LinkIndex> out_links, std::uint32_t element)
  : id_(id), out_links_(std::move(out_links)), element_(element)
{}

std::vector<LinkIndex>
ForwardingNode::forward_step(const fid::Fid& fid, const pce::TopologyGraph& topo) const
{
  std::vector<LinkIndex> out;
  for (auto li : out_links_) {
    if (topo.is_up(li) && fid::should_forward(fid, topo.link(li).lid)) {
      out.push_back(li);
    }
  }
  return out;
}

std::uint64_t
ForwardingNode::state_hash() const
{
  std::uint64_t h = fnv1a64(id_, kFnvOffset);
  for (auto li : out_links_) {
    h = fnv1a64(li, h);
  }
  return fnv1a64(element_, h);
}

Fabric::Fabric(net::Runtime& rt, pce::TopologyGraph& topo, net::PacketLedger& ledger, FabricConfig config)
  : rt_(rt)
  , topo_(topo)
  , ledger_(ledger)
  , config_(config)
  , engine_(rt, topo, ledger, config.queue_cap)
  , local_(topo.node_count())
{
  if (config_.detection_delay < 0) {
    throw std::invalid_argument("detection delay must be non-negative");
  }
  nodes_.reserve(topo.node_count());
  for (const auto& n : topo.nodes()) {
    const auto out = topo.out_links(n.id);
    nodes_.emplace_back(n.id, std::vector<LinkIndex>(out.begin(), out.end()), rt.log.intern(n.name));
  }
  for (const auto& pl : topo.physical_links()) {
    physical_elements_.push_back(rt.log.intern(pl.name));
  }
  engine_.set_sink([this] (LinkIndex via, net::Packet p) { arrive(via, std::move(p)); });
}

void
Fabric::attach(NodeId nap, LocalDelivery deliver)
{
  if (topo_.node(nap).role != pce::NodeRole::nap) {
    throw std::invalid_argument("only NAP nodes take local deliveries");
  }
  local_.at(nap) = std::move(deliver);
}

void
Fabric::inject(NodeId node, net::Packet p)
{
  if (node >= nodes_.size()) {
    throw std::invalid_argument("inject at unknown node");
  }
  if (p.size <= 0 || p.fid.width() != topo_.fid_width()) {
    throw std::invalid_argument("malformed packet");
  }
  const auto& fn = nodes_[node];
  ledger_.inject(fn.element(), p);
  if (p.fid.none()) {
    ledger_.drop(fn.element(), p, "zero_fid");
    return;
  }
  emit_copies(fn, std::move(p), false);
}

void
Fabric::arrive(LinkIndex via, net::Packet p)
{
  const auto& fn = nodes_[topo_.link(via).dst];
  --p.ttl;
  emit_copies(fn, std::move(p), static_cast<bool>(local_[fn.id()]));
}

void
Fabric::emit_copies(const ForwardingNode& fn, net::Packet p, bool local)
{
  std::vector<LinkIndex> egress;
  if (p.ttl > 0) {
    egress = fn.forward_step(p.fid, topo_);
  }
  fn.count(egress.size());
  const std::size_t outputs = egress.size() + (local ? 1 : 0);
  if (outputs == 0) {
    ledger_.drop(fn.element(), p, p.ttl > 0 ? "no_egress" : "ttl");
    return;
  }
  ledger_.replicate(fn.element(), p, outputs);
  for (auto li : egress) {
    if (p.intended && !std::binary_search(p.intended->begin(), p.intended->end(), li)) {
      ++engine_.counters(li).false_positives;
      ledger_.false_positive(engine_.element(li), p);
    }
    engine_.transmit(li, p);
  }
  if (local) {
    ledger_.deliver(fn.element(), p);
    local_[fn.id()](p);
  }
}

pce::TopologyEvent
Fabric::set_link_state(PhysicalLinkId link, pce::LinkState state)
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
  pce::TopologyEvent ev{link, state, rt_.now()};
  rt_.scheduler.schedule(config_.detection_delay, [this, ev] {
    if (listener_) {
      listener_(ev);
    }
  });
  return ev;
}

Traversal
traverse(const pce::TopologyGraph& topo, NodeId src, const fid::Fid& fid, int ttl)
{
  constexpr std::size_t kCopyLimit = 1U << 20;
  Traversal t;
  t.reached.insert(src);
  std::deque<std::pair<NodeId, int>> work{{src, ttl}};
  while (!work.empty()) {
    auto [node, left] = work.front();
    work.pop_front();
    if (left <= 0) {
      t.ttl_expired = true;
      continue;
    }
    for (auto li : topo.out_links(node)) {
      if (!topo.is_up(li) || !fid::should_forward(fid, topo.link(li).lid)) {
        continue;
      }
      t.links.insert(li);
      ++t.copies;
      const NodeId next = topo.link(li).dst;
      t.reached.insert(next);
      if (t.copies >= kCopyLimit) {
        t.ttl_expired = true;
        return t;
      }
      work.emplace_back(next, left - 1);
    }
  }
  return t;
}

} // namespace pointsim::fabric
