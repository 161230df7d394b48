#include "pointsim/pce.hpp"

#include "pointsim/hash.hpp"

#include <algorithm>
#include <deque>

namespace pointsim::pce {

using telemetry::EventType;

namespace {

std::string
describe_unreachable(const std::vector<NodeId>& nodes)
{
  std::string out = "unreachable receivers:";
  for (auto n : nodes) {
    out += ' ';
    out += std::to_string(n);
  }
  return out;
}

std::int64_t
as_field(std::uint64_t v)
{
  return static_cast<std::int64_t>(v);
}

} // namespace

PartialTreeError::PartialTreeError(MulticastTree partial, std::vector<NodeId> unreachable)
  : std::runtime_error(describe_unreachable(unreachable))
  , partial_(std::move(partial))
  , unreachable_(std::move(unreachable))
{}

Pce::Pce(TopologyGraph topology) : topo_(std::move(topology)) {}

std::vector<LinkIndex>
Pce::bfs(NodeId src, NodeId dst) const
{
  const std::size_t n = topo_.node_count();
  std::vector<bool> seen(n, false);
  std::vector<LinkIndex> via(n, 0);
  std::deque<NodeId> queue{src};
  seen[src] = true;
  while (!queue.empty() && !seen[dst]) {
    const NodeId u = queue.front();
    queue.pop_front();
    // The controller host is not a transit node.
    if (u != src && topo_.node(u).role == NodeRole::pce) {
      continue;
    }
    for (auto li : topo_.out_links(u)) {
      if (!topo_.is_up(li)) {
        continue;
      }
      const NodeId v = topo_.link(li).dst;
      if (!seen[v]) {
        seen[v] = true;
        via[v] = li;
        queue.push_back(v);
      }
    }
  }
  if (!seen[dst]) {
    throw UnreachableError("no up path from " + topo_.node(src).name + " to " + topo_.node(dst).name);
  }
  std::vector<LinkIndex> path;
  for (NodeId at = dst; at != src; at = topo_.link(via[at]).src) {
    path.push_back(via[at]);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

PathResult
Pce::compute_path(NodeId src, NodeId dst)
{
  if (src >= topo_.node_count() || dst >= topo_.node_count()) {
    throw std::invalid_argument("compute_path: unknown node");
  }
  ++computations_;
  PathResult r;
  r.fid = fid::Fid(topo_.fid_width());
  if (src == dst) {
    return r;
  }
  r.links = bfs(src, dst);
  for (auto li : r.links) {
    r.fid |= topo_.link(li).lid.bits;
  }
  r.cost = r.links.size();
  return r;
}

bool
Pce::entry_valid(const PathCacheEntry& e) const
{
  return e.epoch == epoch_ &&
         std::all_of(e.links.begin(), e.links.end(), [this] (LinkIndex li) { return topo_.is_up(li); });
}

const PathCacheEntry&
Pce::cached_path(NodeId src, NodeId dst)
{
  const auto key = std::make_pair(src, dst);
  if (auto it = cache_.find(key); it != cache_.end() && entry_valid(it->second)) {
    return it->second;
  }
  auto r = compute_path(src, dst);
  auto& e = cache_[key];
  e.links = std::move(r.links);
  e.fid = std::move(r.fid);
  e.epoch = epoch_;
  return e;
}

std::vector<NodeId>
Pce::candidate_publishers(const ContentName& name) const
{
  std::set<NodeId> out;
  auto collect = [&] (const ContentName& n) {
    if (auto it = publishers_.find(n); it != publishers_.end()) {
      for (const auto& [node, delivery] : it->second) {
        out.insert(node);
      }
    }
  };
  collect(name);
  if (!name.is_scope_root()) {
    collect(name.root());
  }
  return {out.begin(), out.end()};
}

std::optional<Delivery>
Pce::delivery_of(const ContentName& name, NodeId publisher) const
{
  for (const auto& n : {name, name.root()}) {
    if (auto it = publishers_.find(n); it != publishers_.end()) {
      if (auto jt = it->second.find(publisher); jt != it->second.end()) {
        return jt->second;
      }
    }
  }
  return std::nullopt;
}

NodeId
Pce::select_publisher(const ContentName& name, NodeId subscriber)
{
  std::optional<NodeId> best;
  std::size_t best_cost = 0;
  for (auto p : candidate_publishers(name)) {
    std::size_t cost = 0;
    try {
      cost = cached_path(p, subscriber).links.size();
    }
    catch (const UnreachableError&) {
      continue;
    }
    if (!best || cost < best_cost) {
      best = p;
      best_cost = cost;
    }
  }
  if (!best) {
    throw UnreachableError("no reachable publisher for " + name.to_string());
  }
  return *best;
}

MulticastTree
Pce::build_multicast_tree(NodeId src, std::span<const NodeId> receivers)
{
  std::set<NodeId> targets(receivers.begin(), receivers.end());
  MulticastTree tree{fid::Fid(topo_.fid_width()), {}};
  std::set<LinkIndex> links;
  std::vector<NodeId> failed;
  for (auto r : targets) {
    try {
      const auto& e = cached_path(src, r);
      tree.fid |= e.fid;
      links.insert(e.links.begin(), e.links.end());
    }
    catch (const UnreachableError&) {
      failed.push_back(r);
    }
  }
  tree.links.assign(links.begin(), links.end());
  if (!failed.empty()) {
    throw PartialTreeError(std::move(tree), std::move(failed));
  }
  return tree;
}

std::vector<NodeId>
Pce::receivers_of(const ContentName& name, NodeId publisher) const
{
  std::vector<NodeId> out;
  if (auto it = subscriptions_.find(name); it != subscriptions_.end()) {
    for (const auto& [node, sub] : it->second) {
      if (sub.publisher == publisher) {
        out.push_back(node);
      }
    }
  }
  return out;
}

void
Pce::push_stream_update(const ContentName& name, NodeId publisher, ControlOutput& out)
{
  const auto key = std::make_pair(name, publisher);
  const bool streaming = delivery_of(name, publisher) == Delivery::stream;
  auto known = stream_trees_.find(key);
  if (!streaming && known == stream_trees_.end()) {
    return;
  }
  FidUpdate u;
  u.name = name;
  u.publisher = publisher;
  u.epoch = epoch_;
  if (streaming) {
    u.receivers = receivers_of(name, publisher);
    try {
      u.tree = build_multicast_tree(publisher, u.receivers);
    }
    catch (const PartialTreeError& e) {
      u.tree = e.partial();
    }
  }
  else {
    u.tree.fid = fid::Fid(topo_.fid_width());
  }
  if (known != stream_trees_.end() && known->second.links == u.tree.links &&
      known->second.fid == u.tree.fid) {
    return;
  }
  if (streaming) {
    stream_trees_[key] = u.tree;
  }
  else {
    stream_trees_.erase(known);
  }
  out.updates.push_back(std::move(u));
}

void
Pce::rematch(const ContentName& published, ControlOutput& out)
{
  std::set<std::pair<ContentName, NodeId>> touched;
  for (auto& [name, subs] : subscriptions_) {
    const bool covered =
      name == published || (published.is_scope_root() && name.scope == published.scope);
    if (!covered) {
      continue;
    }
    for (auto& [node, sub] : subs) {
      std::optional<NodeId> chosen;
      try {
        chosen = select_publisher(name, node);
      }
      catch (const UnreachableError&) {
      }
      if (chosen == sub.publisher) {
        continue;
      }
      if (sub.publisher) {
        touched.emplace(name, *sub.publisher);
      }
      sub.publisher = chosen;
      if (chosen) {
        touched.emplace(name, *chosen);
        out.matches.push_back({name, *chosen, node, false, sub.payload});
      }
    }
  }
  for (const auto& [name, pub] : touched) {
    push_stream_update(name, pub, out);
  }
}

ControlOutput
Pce::publish(const ContentName& name, NodeId node, Delivery delivery)
{
  if (node >= topo_.node_count()) {
    throw std::invalid_argument("publish: unknown node");
  }
  ControlOutput out;
  auto& pubs = publishers_[name];
  if (auto it = pubs.find(node); it != pubs.end() && it->second == delivery) {
    return out;
  }
  pubs[node] = delivery;
  rematch(name, out);
  return out;
}

ControlOutput
Pce::unpublish(const ContentName& name, NodeId node)
{
  ControlOutput out;
  auto it = publishers_.find(name);
  if (it == publishers_.end() || it->second.erase(node) == 0) {
    return out;
  }
  if (it->second.empty()) {
    publishers_.erase(it);
  }
  rematch(name, out);
  push_stream_update(name, node, out);
  return out;
}

ControlOutput
Pce::subscribe(const ContentName& name, NodeId node, bool refresh, std::string payload)
{
  if (node >= topo_.node_count()) {
    throw std::invalid_argument("subscribe: unknown node");
  }
  ControlOutput out;
  auto& subs = subscriptions_[name];
  auto [it, inserted] = subs.try_emplace(node);
  if (!inserted && !refresh) {
    return out;
  }
  auto& sub = it->second;
  sub.payload = std::move(payload);
  std::optional<NodeId> chosen;
  try {
    chosen = select_publisher(name, node);
  }
  catch (const UnreachableError&) {
  }
  const auto previous = sub.publisher;
  sub.publisher = chosen;
  if (chosen) {
    out.matches.push_back({name, *chosen, node, refresh, sub.payload});
    push_stream_update(name, *chosen, out);
  }
  if (previous && previous != chosen) {
    push_stream_update(name, *previous, out);
  }
  return out;
}

ControlOutput
Pce::unsubscribe(const ContentName& name, NodeId node)
{
  ControlOutput out;
  auto it = subscriptions_.find(name);
  if (it == subscriptions_.end()) {
    return out;
  }
  auto jt = it->second.find(node);
  if (jt == it->second.end()) {
    return out;
  }
  const auto previous = jt->second.publisher;
  it->second.erase(jt);
  if (it->second.empty()) {
    subscriptions_.erase(it);
  }
  if (previous) {
    push_stream_update(name, *previous, out);
  }
  return out;
}

InvalidationReport
Pce::on_topology_event(const TopologyEvent& event)
{
  if (event.link >= topo_.physical_links().size()) {
    throw std::invalid_argument("topology event for unknown link");
  }
  const auto& pl = topo_.physical(event.link);
  topo_.set_state(event.link, event.new_state);
  ++epoch_;

  InvalidationReport report;
  for (auto it = cache_.begin(); it != cache_.end();) {
    auto& e = it->second;
    if (event.new_state == LinkState::down) {
      const bool uses = std::any_of(e.links.begin(), e.links.end(), [&] (LinkIndex li) {
        return li == pl.forward || li == pl.reverse;
      });
      if (uses) {
        ++report.invalidated;
        it = cache_.erase(it);
        continue;
      }
    }
    else {
      // A restored link can shorten or re-tie existing paths.
      auto fresh = compute_path(it->first.first, it->first.second);
      if (fresh.links != e.links) {
        ++report.invalidated;
        e.links = std::move(fresh.links);
        e.fid = std::move(fresh.fid);
      }
    }
    e.epoch = epoch_;
    ++it;
  }

  ControlOutput out;
  // Subscribers left without a reachable publisher get another chance.
  for (auto& [name, subs] : subscriptions_) {
    for (auto& [node, sub] : subs) {
      if (sub.publisher) {
        continue;
      }
      try {
        const NodeId chosen = select_publisher(name, node);
        sub.publisher = chosen;
        out.matches.push_back({name, chosen, node, false, sub.payload});
      }
      catch (const UnreachableError&) {
      }
    }
  }
  std::vector<std::pair<ContentName, NodeId>> streams;
  for (const auto& [key, tree] : stream_trees_) {
    streams.push_back(key);
  }
  for (const auto& [name, pub] : publishers_) {
    for (const auto& [node, delivery] : pub) {
      if (delivery == Delivery::stream) {
        streams.emplace_back(name, node);
      }
    }
  }
  std::sort(streams.begin(), streams.end());
  streams.erase(std::unique(streams.begin(), streams.end()), streams.end());
  for (const auto& [name, node] : streams) {
    push_stream_update(name, node, out);
  }
  report.epoch = epoch_;
  report.matches = std::move(out.matches);
  report.updates = std::move(out.updates);
  return report;
}

std::size_t
Pce::subscription_count(const ContentName& name) const
{
  auto it = subscriptions_.find(name);
  return it == subscriptions_.end() ? 0 : it->second.size();
}

std::size_t
Pce::subscription_count() const
{
  std::size_t n = 0;
  for (const auto& [name, subs] : subscriptions_) {
    n += subs.size();
  }
  return n;
}

std::optional<NodeId>
Pce::matched_publisher(const ContentName& name, NodeId subscriber) const
{
  auto it = subscriptions_.find(name);
  if (it == subscriptions_.end()) {
    return std::nullopt;
  }
  auto jt = it->second.find(subscriber);
  return jt == it->second.end() ? std::nullopt : jt->second.publisher;
}

std::uint64_t
Pce::state_hash() const
{
  std::uint64_t h = fnv1a64(epoch_, kFnvOffset);
  for (const auto& [key, e] : cache_) {
    h = fnv1a64(key.first, h);
    h = fnv1a64(key.second, h);
    h = fnv1a64(e.epoch, h);
    for (auto li : e.links) {
      h = fnv1a64(li, h);
    }
  }
  for (const auto& l : topo_.links()) {
    h = fnv1a64(l.state == LinkState::up ? 1 : 0, h);
  }
  return h;
}

PceActor::PceActor(net::Runtime& rt, Pce& pce, PceTiming timing)
  : rt_(rt), pce_(pce), timing_(timing), element_(rt.log.intern("pce"))
{
  if (timing_.processing < 0 || timing_.control_latency < 0) {
    throw std::invalid_argument("PCE timing must be non-negative");
  }
}

void
PceActor::enqueue(sim::Time arrival, std::function<ControlOutput()> work)
{
  const sim::Time start = std::max(arrival, busy_until_);
  const sim::Time done = start + timing_.processing;
  busy_until_ = done;
  rt_.scheduler.schedule_at(done, [this, w = std::move(work)] {
    ++processed_;
    dispatch(w());
  });
}

void
PceActor::dispatch(ControlOutput out)
{
  for (auto& m : out.matches) {
    rt_.log.emit(EventType::match, element_,
                 {m.publisher, m.subscriber, as_field(m.name.scope), as_field(m.name.item)});
    rt_.scheduler.schedule(timing_.control_latency, [this, m = std::move(m)] {
      if (match_handler_) {
        match_handler_(m);
      }
    });
  }
  for (auto& u : out.updates) {
    rt_.scheduler.schedule(timing_.control_latency, [this, u = std::move(u)] {
      if (update_handler_) {
        update_handler_(u);
      }
    });
  }
}

void
PceActor::publish(const ContentName& name, NodeId node, Delivery delivery)
{
  enqueue(rt_.now() + timing_.control_latency, [this, name, node, delivery] {
    rt_.log.emit(EventType::publish, element_,
                 {as_field(name.scope), as_field(name.item), delivery == Delivery::stream ? 1 : 0},
                 {});
    return pce_.publish(name, node, delivery);
  });
}

void
PceActor::unpublish(const ContentName& name, NodeId node)
{
  enqueue(rt_.now() + timing_.control_latency, [this, name, node] {
    rt_.log.emit(EventType::unpublish, element_, {as_field(name.scope), as_field(name.item)});
    return pce_.unpublish(name, node);
  });
}

void
PceActor::subscribe(const ContentName& name, NodeId node, bool refresh, std::string payload)
{
  enqueue(rt_.now() + timing_.control_latency, [this, name, node, refresh, p = std::move(payload)] {
    rt_.log.emit(EventType::subscribe, element_,
                 {as_field(name.scope), as_field(name.item), refresh ? 1 : 0});
    return pce_.subscribe(name, node, refresh, p);
  });
}

void
PceActor::unsubscribe(const ContentName& name, NodeId node)
{
  enqueue(rt_.now() + timing_.control_latency, [this, name, node] {
    rt_.log.emit(EventType::unsubscribe, element_, {as_field(name.scope), as_field(name.item)});
    return pce_.unsubscribe(name, node);
  });
}

void
PceActor::topology_event(const TopologyEvent& event)
{
  enqueue(rt_.now(), [this, event] {
    auto report = pce_.on_topology_event(event);
    rt_.log.emit(EventType::topology_notify, element_,
                 {event.link, event.new_state == LinkState::up ? 1 : 0, as_field(report.epoch)});
    rt_.log.emit(EventType::invalidate, element_,
                 {as_field(report.epoch), static_cast<std::int64_t>(report.invalidated),
                  static_cast<std::int64_t>(report.updates.size())});
    ControlOutput out;
    out.matches = std::move(report.matches);
    out.updates = std::move(report.updates);
    return out;
  });
}

} // namespace pointsim::pce
