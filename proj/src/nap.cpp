#include "pointsim/nap.hpp"

#include "pointsim/hash.hpp"

#include <algorithm>

namespace pointsim::nap {

using telemetry::EventType;

namespace {

constexpr std::int64_t kRequestBytes = 400;
constexpr std::int64_t kErrorBytes = 200;

std::int64_t
as_field(std::uint64_t v)
{
  return static_cast<std::int64_t>(v);
}

} // namespace

std::optional<RequestFingerprint>
RequestFingerprint::parse(std::string_view method, std::string_view host, std::string_view path)
{
  if (method.empty() || host.empty() || path.empty() || path.front() != '/') {
    return std::nullopt;
  }
  auto has_space = [] (std::string_view s) { return s.find(' ') != std::string_view::npos; };
  if (has_space(method) || has_space(host) || has_space(path)) {
    return std::nullopt;
  }
  return RequestFingerprint{std::string(method), std::string(host), std::string(path)};
}

std::optional<RequestFingerprint>
RequestFingerprint::from_text(std::string_view text)
{
  const auto a = text.find(' ');
  if (a == std::string_view::npos) {
    return std::nullopt;
  }
  const auto b = text.find(' ', a + 1);
  if (b == std::string_view::npos) {
    return std::nullopt;
  }
  return parse(text.substr(0, a), text.substr(a + 1, b - a - 1), text.substr(b + 1));
}

const FidTable::Entry*
FidTable::find(const ContentName& name) const
{
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

std::uint64_t
FidTable::hash() const
{
  std::uint64_t h = kFnvOffset;
  for (const auto& [name, e] : entries_) {
    h = fnv1a64(name.scope, h);
    h = fnv1a64(name.item, h);
    h = fnv1a64(e.epoch, h);
    for (auto w : e.fid.words()) {
      h = fnv1a64(w, h);
    }
  }
  return h;
}

Nap::Nap(net::Runtime& rt, NodeId node, std::string name, fabric::Fabric& fabric, pce::PceActor& pce,
         net::AccessNetwork& access, NapConfig config)
  : rt_(rt)
  , node_(node)
  , name_(std::move(name))
  , element_(rt.log.intern(name_))
  , fabric_(fabric)
  , pce_(pce)
  , access_(access)
  , config_(config)
{
  if (config_.coalesce_window < 0 || config_.mtu <= 0 || config_.ttl <= 0) {
    throw std::invalid_argument("invalid NAP configuration");
  }
}

void
Nap::publish_http(const std::string& authority, net::HostId server)
{
  const auto scope = pce::scope_id(authority);
  origins_[scope] = server;
  pce_.publish(ContentName::scope_root(scope), node_, pce::Delivery::on_demand);
}

void
Nap::withdraw_http(const std::string& authority)
{
  const auto scope = pce::scope_id(authority);
  if (origins_.erase(scope) > 0) {
    pce_.unpublish(ContentName::scope_root(scope), node_);
  }
}

void
Nap::publish_stream(const std::string& group, net::HostId source)
{
  const auto name = pce::channel_name(group);
  stream_sources_[name] = source;
  pce_.publish(name, node_, pce::Delivery::stream);
}

void
Nap::from_host(net::HostId host, const net::Message& msg)
{
  switch (msg.type) {
  case net::MessageType::http_request:
    client_http(host, msg);
    break;
  case net::MessageType::igmp:
    client_igmp(host, msg);
    break;
  case net::MessageType::http_response:
    server_response(msg);
    break;
  case net::MessageType::iptv_data:
    stream_data(msg);
    break;
  case net::MessageType::connect: {
    // TCP terminates at the gateway.
    net::Message ack;
    ack.id = rt_.message_id();
    ack.type = net::MessageType::connect_ack;
    ack.cls = net::ContentClass::connect;
    ack.size = 60;
    ack.dst = host;
    ack.request_id = msg.request_id;
    access_.send_down(host, std::move(ack));
    break;
  }
  case net::MessageType::connect_ack:
    break;
  }
}

void
Nap::reject(net::HostId client, const net::Message& msg, int status)
{
  net::Message resp;
  resp.id = rt_.message_id();
  resp.type = net::MessageType::http_response;
  resp.cls = net::ContentClass::error;
  resp.size = kErrorBytes;
  resp.status = status;
  resp.dst = client;
  resp.request_id = msg.request_id;
  resp.host = msg.host;
  resp.path = msg.path;
  access_.send_down(client, std::move(resp));
}

void
Nap::client_http(net::HostId client, const net::Message& msg)
{
  const auto fp = RequestFingerprint::parse(msg.method, msg.host, msg.path);
  if (!fp) {
    rt_.log.emit(EventType::http_error, element_, {as_field(msg.request_id), 400});
    reject(client, msg, 400);
    return;
  }
  const auto name = fp->name();
  auto& list = pending_[name];
  const bool first = list.empty();
  const bool known = std::any_of(list.begin(), list.end(), [&] (const Pending& p) {
    return p.client == client && p.request_id == msg.request_id;
  });
  if (!known) {
    list.push_back({client, msg.request_id});
  }
  if (first) {
    ++counters_.subscribes;
    pce_.subscribe(name, node_, false, fp->text());
  }
  else if (msg.attempt > 0) {
    pce_.subscribe(name, node_, true, fp->text());
  }
}

void
Nap::client_igmp(net::HostId stb, const net::Message& msg)
{
  if (msg.group.empty()) {
    rt_.log.emit(EventType::warning, element_, {}, "igmp message without group");
    return;
  }
  const auto name = pce::channel_name(msg.group);
  if (msg.join) {
    auto& members = memberships_[msg.group];
    const bool first = members.empty();
    members.insert(stb);
    if (first) {
      channel_groups_[name] = msg.group;
      ++counters_.subscribes;
      pce_.subscribe(name, node_);
    }
    return;
  }
  auto it = memberships_.find(msg.group);
  if (it == memberships_.end() || it->second.erase(stb) == 0) {
    rt_.log.emit(EventType::warning, element_, {}, "igmp leave without join for " + msg.group);
    return;
  }
  if (it->second.empty()) {
    memberships_.erase(it);
    channel_groups_.erase(name);
    ++counters_.unsubscribes;
    pce_.unsubscribe(name, node_);
  }
}

void
Nap::on_match(const pce::MatchNotice& notice)
{
  if (stream_sources_.contains(notice.name)) {
    return;
  }
  const auto fp = RequestFingerprint::from_text(notice.payload);
  if (!fp || fp->name() != notice.name) {
    rt_.log.emit(EventType::warning, element_, {}, "match without a usable request fingerprint");
    return;
  }
  if (auto it = open_groups_.find(notice.name); it != open_groups_.end()) {
    auto& g = groups_.at(it->second);
    g.members.insert(notice.subscriber);
    ++g.requests;
    return;
  }
  auto origin = origins_.find(notice.name.scope);
  if (origin == origins_.end()) {
    rt_.log.emit(EventType::warning, element_, {}, "match for an authority no longer served here");
    return;
  }
  const std::uint64_t id = next_group_++;
  CoalesceGroup g;
  g.id = id;
  g.fingerprint = *fp;
  g.window_open_at = rt_.now();
  g.close_at = rt_.now() + config_.coalesce_window;
  g.members.insert(notice.subscriber);
  g.requests = 1;
  g.server = origin->second;
  rt_.log.emit(EventType::coalesce_open, element_,
               {as_field(id), as_field(notice.name.scope), as_field(notice.name.item), g.close_at},
               fp->host + fp->path);
  ++counters_.groups_opened;
  const sim::Time close_at = g.close_at;
  groups_.emplace(id, std::move(g));
  open_groups_[notice.name] = id;
  if (config_.coalesce_window == 0) {
    close_group(id);
  }
  else {
    rt_.scheduler.schedule_at(close_at, [this, id] { close_group(id); });
  }
}

void
Nap::close_group(std::uint64_t id)
{
  auto& g = groups_.at(id);
  g.state = GroupState::serving;
  open_groups_.erase(g.fingerprint.name());
  rt_.log.emit(EventType::coalesce_close, element_,
               {as_field(id), g.requests, static_cast<std::int64_t>(g.members.size())});
  ++counters_.server_requests;
  net::Message req;
  req.id = rt_.message_id();
  req.type = net::MessageType::http_request;
  req.cls = net::ContentClass::request;
  req.size = kRequestBytes;
  req.dst = g.server;
  req.method = g.fingerprint.method;
  req.host = g.fingerprint.host;
  req.path = g.fingerprint.path;
  req.request_id = id;
  req.name = g.fingerprint.name();
  access_.send_down(g.server, std::move(req));
}

void
Nap::server_response(const net::Message& msg)
{
  auto it = groups_.find(msg.request_id);
  if (it == groups_.end() || it->second.state != GroupState::serving) {
    rt_.log.emit(EventType::warning, element_, {}, "response for an unknown coalescing group");
    return;
  }
  auto& g = it->second;
  const auto name = g.fingerprint.name();
  const std::vector<NodeId> receivers(g.members.begin(), g.members.end());
  pce::MulticastTree tree;
  try {
    tree = pce_.core().build_multicast_tree(node_, receivers);
  }
  catch (const pce::PartialTreeError& e) {
    tree = e.partial();
    rt_.log.emit(EventType::warning, element_, {static_cast<std::int64_t>(e.unreachable().size())},
                 e.what());
  }
  fids_.write(name, {tree.fid, std::make_shared<const std::vector<pce::LinkIndex>>(tree.links),
                     pce_.core().epoch()});
  auto out = std::make_shared<net::Message>(msg);
  out->name = name;
  out->dst = net::kNoHost;
  inject_message(out, *fids_.find(name));
  fids_.erase(name);
  g.state = GroupState::closed;
  groups_.erase(it);
}

void
Nap::stream_data(const net::Message& msg)
{
  const auto name = pce::channel_name(msg.group);
  const FidTable::Entry* route = fids_.find(name);
  FidTable::Entry none{fid::Fid(fabric_.topology().fid_width()), nullptr, 0};
  auto out = std::make_shared<net::Message>(msg);
  out->name = name;
  inject_message(out, route != nullptr ? *route : none);
}

void
Nap::inject_message(std::shared_ptr<const net::Message> msg, const FidTable::Entry& route)
{
  for (auto& p : net::segment(msg, config_.mtu, node_, config_.ttl, rt_)) {
    p.fid = route.fid;
    p.intended = route.links;
    fabric_.inject(node_, std::move(p));
  }
}

void
Nap::from_fabric(const net::Packet& p)
{
  auto msg = reassembly_.add(node_, p);
  if (!msg) {
    return;
  }
  if (msg->type == net::MessageType::iptv_data) {
    deliver_stream(msg);
  }
  else if (msg->type == net::MessageType::http_response) {
    deliver_http(msg);
  }
  else {
    ++counters_.spurious;
    rt_.log.emit(EventType::spurious, element_,
                 {as_field(msg->id), msg->size, static_cast<std::int64_t>(msg->cls)});
  }
}

void
Nap::deliver_http(const std::shared_ptr<const net::Message>& msg)
{
  auto it = pending_.find(msg->name);
  if (it == pending_.end() || it->second.empty()) {
    ++counters_.spurious;
    rt_.log.emit(EventType::spurious, element_,
                 {as_field(msg->id), msg->size, static_cast<std::int64_t>(msg->cls)});
    return;
  }
  for (const auto& p : it->second) {
    net::Message copy = *msg;
    copy.dst = p.client;
    copy.request_id = p.request_id;
    ++counters_.client_deliveries;
    access_.send_down(p.client, std::move(copy));
  }
  pending_.erase(it);
  ++counters_.unsubscribes;
  pce_.unsubscribe(msg->name, node_);
}

void
Nap::deliver_stream(const std::shared_ptr<const net::Message>& msg)
{
  auto g = channel_groups_.find(msg->name);
  const auto m = g == channel_groups_.end() ? memberships_.end() : memberships_.find(g->second);
  if (m == memberships_.end() || m->second.empty()) {
    ++counters_.spurious;
    rt_.log.emit(EventType::spurious, element_,
                 {as_field(msg->id), msg->size, static_cast<std::int64_t>(msg->cls)});
    return;
  }
  for (auto stb : m->second) {
    net::Message copy = *msg;
    copy.dst = stb;
    ++counters_.client_deliveries;
    access_.send_down(stb, std::move(copy));
  }
}

void
Nap::on_fid_update(const pce::FidUpdate& update)
{
  if (update.tree.fid.none() && update.receivers.empty()) {
    fids_.erase(update.name);
  }
  else {
    fids_.write(update.name,
                {update.tree.fid, std::make_shared<const std::vector<pce::LinkIndex>>(update.tree.links),
                 update.epoch});
  }
  rt_.log.emit(EventType::fid_update, element_,
               {as_field(update.name.scope), as_field(update.name.item), as_field(update.epoch),
                static_cast<std::int64_t>(update.tree.fid.popcount())},
               update.tree.fid.to_hex());
}

std::size_t
Nap::pending_http() const noexcept
{
  std::size_t n = 0;
  for (const auto& [name, list] : pending_) {
    n += list.size();
  }
  return n;
}

std::size_t
Nap::members(const std::string& group) const
{
  auto it = memberships_.find(group);
  return it == memberships_.end() ? 0 : it->second.size();
}

} // namespace pointsim::nap
