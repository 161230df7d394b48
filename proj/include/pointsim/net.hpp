#pragma once

#include "pointsim/event_log.hpp"
#include "pointsim/fid.hpp"
#include "pointsim/names.hpp"
#include "pointsim/simkernel.hpp"
#include "pointsim/topology.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

// Types shared by the ICN fabric, the NAPs, the IP baseline and the
// applications: IP-side messages, core packets, access links.
namespace pointsim::net {

enum class ContentClass : std::uint8_t {
  none = 0,
  request = 1,
  playlist = 2,
  chunk = 3,
  iptv = 4,
  igmp = 5,
  connect = 6,
  error = 7,
};

const char* to_string(ContentClass cls);

using HostId = std::uint32_t;
inline constexpr HostId kNoHost = std::numeric_limits<HostId>::max();

enum class MessageType : std::uint8_t {
  http_request,
  http_response,
  connect,
  connect_ack,
  iptv_data,
  igmp,
};

struct PlaylistInfo {
  std::int64_t live_edge = -1;
  std::vector<std::int64_t> bitrates;
  sim::Duration chunk_duration = 0;
};

/// IP-side exchange, modeled at message level.
struct Message {
  std::uint64_t id = 0;
  MessageType type = MessageType::http_request;
  ContentClass cls = ContentClass::none;
  std::int64_t size = 0;
  HostId src = kNoHost;
  HostId dst = kNoHost;
  std::string method;
  std::string host;
  std::string path;
  int status = 0;
  std::uint64_t request_id = 0;
  std::uint32_t attempt = 0;
  std::string group;
  std::uint32_t channel = 0;
  std::uint64_t seq = 0;
  bool join = false;
  std::optional<PlaylistInfo> playlist;
  pce::ContentName name;
};

/// Unit moved through the core. Messages larger than the MTU travel as
/// several packets sharing one Message.
struct Packet {
  std::uint64_t id = 0;
  fid::Fid fid;
  std::shared_ptr<const Message> message;
  std::uint32_t segment = 0;
  std::uint32_t segments = 1;
  std::int64_t size = 0;
  pce::NodeId origin = 0;
  int ttl = 64;
  // Links the FID was built from. Accounting only: forwarding never reads it.
  std::shared_ptr<const std::vector<pce::LinkIndex>> intended;

  ContentClass cls() const { return message->cls; }
};

/// Run-wide id counters plus the scheduler and log every actor needs.
struct Runtime {
  sim::Scheduler& scheduler;
  telemetry::EventLog& log;
  std::uint64_t next_message = 1;
  std::uint64_t next_packet = 1;

  Runtime(sim::Scheduler& s, telemetry::EventLog& l) : scheduler(s), log(l) {}
  std::uint64_t message_id() { return next_message++; }
  std::uint64_t packet_id() { return next_packet++; }
  sim::Time now() const { return scheduler.now(); }
};

/// Splits a message into ceil(size / mtu) packets (at least one).
std::vector<Packet> segment(const std::shared_ptr<const Message>& msg, std::int64_t mtu,
                            pce::NodeId origin, int ttl, Runtime& rt);

struct LedgerTotals {
  std::int64_t injected = 0;
  std::int64_t replicated = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
  std::int64_t in_flight() const { return injected + replicated - delivered - dropped; }
};

/// Per-copy byte accounting. Every packet copy is created by an inject or a
/// replicate and ends in exactly one deliver or drop.
class PacketLedger {
 public:
  explicit PacketLedger(Runtime& rt) : rt_(rt) {}

  void inject(std::uint32_t node_el, const Packet& p);
  void tx(std::uint32_t link_el, const Packet& p);
  void replicate(std::uint32_t node_el, const Packet& p, std::size_t copies);
  void deliver(std::uint32_t node_el, const Packet& p);
  void drop(std::uint32_t el, const Packet& p, std::string reason);
  void false_positive(std::uint32_t link_el, const Packet& p);

  const LedgerTotals& totals() const noexcept { return totals_; }

 private:
  Runtime& rt_;
  LedgerTotals totals_;
};

/// Collects segments per (exit point, message) and yields the whole message.
class Reassembler {
 public:
  std::shared_ptr<const Message> add(std::uint64_t exit_key, const Packet& p);
  std::size_t incomplete() const noexcept { return partial_.size(); }

 private:
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint32_t> partial_;
};

/// Fixed-latency, fixed-capacity FIFO access links between hosts and the
/// node they attach to (cNAP/sNAP in ICN mode, edge switch in IP mode).
class AccessNetwork {
 public:
  using Receiver = std::function<void(const Message&)>;
  using Uplink = std::function<void(HostId, const Message&)>;

  explicit AccessNetwork(Runtime& rt) : rt_(rt) {}

  HostId add_host(std::string name, pce::NodeId attach, std::int64_t bps, sim::Duration latency);
  void set_receiver(HostId host, Receiver receiver);
  void set_uplink(Uplink uplink) { uplink_ = std::move(uplink); }

  /// Host -> attachment node.
  void send_up(HostId host, Message msg);
  /// Attachment node -> host.
  void send_down(HostId host, Message msg);

  std::optional<HostId> find(std::string_view name) const;
  const std::string& name(HostId host) const { return hosts_.at(host).name; }
  pce::NodeId attach(HostId host) const { return hosts_.at(host).attach; }
  std::uint32_t element(HostId host) const { return hosts_.at(host).element; }
  std::vector<HostId> hosts_at(pce::NodeId node) const;
  std::size_t size() const noexcept { return hosts_.size(); }
  /// One-way delay for a message of `bytes` on an idle access link.
  sim::Duration idle_delay(HostId host, std::int64_t bytes) const;

 private:
  struct Entry {
    std::string name;
    pce::NodeId attach = 0;
    std::int64_t bps = 0;
    sim::Duration latency = 0;
    sim::Time up_free = 0;
    sim::Time down_free = 0;
    std::uint32_t element = 0;
    Receiver receiver;
  };

  Runtime& rt_;
  std::vector<Entry> hosts_;
  Uplink uplink_;
};

} // namespace pointsim::net
