#include "pointsim/net.hpp"

#include <algorithm>
#include <stdexcept>

namespace pointsim::net {

using telemetry::EventType;

const char*
to_string(ContentClass cls)
{
  switch (cls) {
  case ContentClass::none:
    return "none";
  case ContentClass::request:
    return "request";
  case ContentClass::playlist:
    return "playlist";
  case ContentClass::chunk:
    return "chunk";
  case ContentClass::iptv:
    return "iptv";
  case ContentClass::igmp:
    return "igmp";
  case ContentClass::connect:
    return "connect";
  case ContentClass::error:
    return "error";
  }
  return "?";
}

std::vector<Packet>
segment(const std::shared_ptr<const Message>& msg, std::int64_t mtu, pce::NodeId origin, int ttl,
        Runtime& rt)
{
  if (mtu <= 0 || msg->size <= 0) {
    throw std::invalid_argument("segment: mtu and message size must be positive");
  }
  const auto count = static_cast<std::uint32_t>((msg->size + mtu - 1) / mtu);
  std::vector<Packet> out;
  out.reserve(count);
  std::int64_t remaining = msg->size;
  for (std::uint32_t i = 0; i < count; ++i) {
    Packet p;
    p.id = rt.packet_id();
    p.message = msg;
    p.segment = i;
    p.segments = count;
    p.size = std::min(remaining, mtu);
    p.origin = origin;
    p.ttl = ttl;
    remaining -= p.size;
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

std::int64_t
item_of(const Packet& p)
{
  return static_cast<std::int64_t>(p.message->name.item);
}

} // namespace

void
PacketLedger::inject(std::uint32_t node_el, const Packet& p)
{
  totals_.injected += p.size;
  rt_.log.emit(EventType::inject, node_el,
               {static_cast<std::int64_t>(p.id), static_cast<std::int64_t>(p.message->id), p.size,
                static_cast<std::int64_t>(p.cls()), item_of(p)});
}

void
PacketLedger::tx(std::uint32_t link_el, const Packet& p)
{
  rt_.log.emit(EventType::tx, link_el,
               {static_cast<std::int64_t>(p.id), static_cast<std::int64_t>(p.message->id), p.size,
                static_cast<std::int64_t>(p.cls()), item_of(p)});
}

void
PacketLedger::replicate(std::uint32_t node_el, const Packet& p, std::size_t copies)
{
  if (copies < 2) {
    return;
  }
  const std::int64_t extra = p.size * static_cast<std::int64_t>(copies - 1);
  totals_.replicated += extra;
  rt_.log.emit(EventType::replicate, node_el,
               {static_cast<std::int64_t>(p.id), extra, static_cast<std::int64_t>(copies),
                static_cast<std::int64_t>(p.cls())});
}

void
PacketLedger::deliver(std::uint32_t node_el, const Packet& p)
{
  totals_.delivered += p.size;
  rt_.log.emit(EventType::deliver, node_el,
               {static_cast<std::int64_t>(p.id), static_cast<std::int64_t>(p.message->id), p.size,
                static_cast<std::int64_t>(p.cls()), item_of(p)});
}

void
PacketLedger::drop(std::uint32_t el, const Packet& p, std::string reason)
{
  totals_.dropped += p.size;
  rt_.log.emit(EventType::drop, el,
               {static_cast<std::int64_t>(p.id), static_cast<std::int64_t>(p.message->id), p.size,
                static_cast<std::int64_t>(p.cls())},
               std::move(reason));
}

void
PacketLedger::false_positive(std::uint32_t link_el, const Packet& p)
{
  rt_.log.emit(EventType::false_positive, link_el, {static_cast<std::int64_t>(p.id), p.size});
}

std::shared_ptr<const Message>
Reassembler::add(std::uint64_t exit_key, const Packet& p)
{
  if (p.segments == 1) {
    return p.message;
  }
  const auto key = std::make_pair(exit_key, p.message->id);
  auto& got = partial_[key];
  if (++got < p.segments) {
    return nullptr;
  }
  partial_.erase(key);
  return p.message;
}

HostId
AccessNetwork::add_host(std::string name, pce::NodeId attach, std::int64_t bps, sim::Duration latency)
{
  if (bps <= 0 || latency < 0) {
    throw std::invalid_argument("access link needs positive capacity and non-negative latency");
  }
  if (find(name)) {
    throw std::invalid_argument("duplicate host name '" + name + "'");
  }
  const auto id = static_cast<HostId>(hosts_.size());
  Entry e;
  e.element = rt_.log.intern(name);
  e.name = std::move(name);
  e.attach = attach;
  e.bps = bps;
  e.latency = latency;
  hosts_.push_back(std::move(e));
  return id;
}

void
AccessNetwork::set_receiver(HostId host, Receiver receiver)
{
  hosts_.at(host).receiver = std::move(receiver);
}

void
AccessNetwork::send_up(HostId host, Message msg)
{
  auto& h = hosts_.at(host);
  const sim::Time start = std::max(rt_.now(), h.up_free);
  const sim::Time finish = start + sim::transmission_time(msg.size, h.bps);
  h.up_free = finish;
  rt_.scheduler.schedule_at(finish + h.latency, [this, host, m = std::move(msg)] {
    if (uplink_) {
      uplink_(host, m);
    }
  });
}

void
AccessNetwork::send_down(HostId host, Message msg)
{
  auto& h = hosts_.at(host);
  const sim::Time start = std::max(rt_.now(), h.down_free);
  const sim::Time finish = start + sim::transmission_time(msg.size, h.bps);
  h.down_free = finish;
  rt_.scheduler.schedule_at(finish + h.latency, [this, host, m = std::move(msg)] {
    const auto& r = hosts_[host].receiver;
    if (r) {
      r(m);
    }
  });
}

std::optional<HostId>
AccessNetwork::find(std::string_view name) const
{
  for (std::size_t i = 0; i < hosts_.size(); ++i) {
    if (hosts_[i].name == name) {
      return static_cast<HostId>(i);
    }
  }
  return std::nullopt;
}

std::vector<HostId>
AccessNetwork::hosts_at(pce::NodeId node) const
{
  std::vector<HostId> out;
  for (std::size_t i = 0; i < hosts_.size(); ++i) {
    if (hosts_[i].attach == node) {
      out.push_back(static_cast<HostId>(i));
    }
  }
  return out;
}

sim::Duration
AccessNetwork::idle_delay(HostId host, std::int64_t bytes) const
{
  const auto& h = hosts_.at(host);
  return sim::transmission_time(bytes, h.bps) + h.latency;
}

} // namespace pointsim::net
