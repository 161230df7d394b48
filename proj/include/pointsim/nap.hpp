#pragma once

#include "pointsim/fabric.hpp"
#include "pointsim/names.hpp"
#include "pointsim/net.hpp"
#include "pointsim/pce.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pointsim::nap {

using pce::ContentName;
using pce::NodeId;

/// method/host/path of an HTTP request; the unit of coalescing.
struct RequestFingerprint {
  std::string method;
  std::string host;
  std::string path;

  ContentName name() const { return pce::http_name(host, path); }
  std::string text() const { return method + " " + host + " " + path; }
  /// Nullopt unless method and host are non-empty and path starts with '/'.
  static std::optional<RequestFingerprint> parse(std::string_view method, std::string_view host,
                                                 std::string_view path);
  static std::optional<RequestFingerprint> from_text(std::string_view text);

  friend auto operator<=>(const RequestFingerprint&, const RequestFingerprint&) = default;
};

/// Name -> FID routing state of an ICN entry point.
class FidTable {
 public:
  struct Entry {
    fid::Fid fid;
    std::shared_ptr<const std::vector<pce::LinkIndex>> links;
    std::uint64_t epoch = 0;
  };

  void write(const ContentName& name, Entry entry) { entries_[name] = std::move(entry); }
  void erase(const ContentName& name) { entries_.erase(name); }
  const Entry* find(const ContentName& name) const;
  std::size_t size() const noexcept { return entries_.size(); }
  std::uint64_t hash() const;

 private:
  std::map<ContentName, Entry> entries_;
};

enum class GroupState { open, serving, closed };

struct CoalesceGroup {
  std::uint64_t id = 0;
  RequestFingerprint fingerprint;
  sim::Time window_open_at = 0;
  sim::Time close_at = 0;
  std::set<NodeId> members;
  std::uint32_t requests = 0;
  net::HostId server = net::kNoHost;
  GroupState state = GroupState::open;
};

struct NapConfig {
  sim::Duration coalesce_window = sim::msec(100);
  std::int64_t mtu = 1400;
  int ttl = 64;
};

struct NapCounters {
  std::int64_t subscribes = 0;
  std::int64_t unsubscribes = 0;
  std::int64_t server_requests = 0;
  std::int64_t groups_opened = 0;
  std::int64_t spurious = 0;
  std::int64_t client_deliveries = 0;
};

/// An IP/ICN gateway. Acts as cNAP for attached clients and set-top boxes and
/// as sNAP for attached servers and stream sources.
class Nap {
 public:
  Nap(net::Runtime& rt, NodeId node, std::string name, fabric::Fabric& fabric, pce::PceActor& pce,
      net::AccessNetwork& access, NapConfig config);

  Nap(const Nap&) = delete;
  Nap& operator=(const Nap&) = delete;

  NodeId node() const noexcept { return node_; }
  const std::string& name() const noexcept { return name_; }
  std::uint32_t element() const noexcept { return element_; }

  /// Register / withdraw an HTTP origin for a whole authority.
  void publish_http(const std::string& authority, net::HostId server);
  void withdraw_http(const std::string& authority);
  /// Register a multicast stream source for a group address.
  void publish_stream(const std::string& group, net::HostId source);

  /// Message from an attached host over its access link.
  void from_host(net::HostId host, const net::Message& msg);
  /// Packet delivered to this node by the fabric.
  void from_fabric(const net::Packet& p);
  void on_match(const pce::MatchNotice& notice);
  void on_fid_update(const pce::FidUpdate& update);

  const FidTable& fid_table() const noexcept { return fids_; }
  const NapCounters& counters() const noexcept { return counters_; }
  std::size_t pending_http() const noexcept;
  std::size_t members(const std::string& group) const;
  const std::map<std::uint64_t, CoalesceGroup>& groups() const noexcept { return groups_; }
  std::uint64_t state_hash() const { return fids_.hash(); }

 private:
  struct Pending {
    net::HostId client = net::kNoHost;
    std::uint64_t request_id = 0;
  };

  void client_http(net::HostId client, const net::Message& msg);
  void client_igmp(net::HostId stb, const net::Message& msg);
  void close_group(std::uint64_t id);
  void server_response(const net::Message& msg);
  void stream_data(const net::Message& msg);
  void inject_message(std::shared_ptr<const net::Message> msg, const FidTable::Entry& route);
  void deliver_http(const std::shared_ptr<const net::Message>& msg);
  void deliver_stream(const std::shared_ptr<const net::Message>& msg);
  void reject(net::HostId client, const net::Message& msg, int status);

  net::Runtime& rt_;
  NodeId node_;
  std::string name_;
  std::uint32_t element_;
  fabric::Fabric& fabric_;
  pce::PceActor& pce_;
  net::AccessNetwork& access_;
  NapConfig config_;
  FidTable fids_;
  net::Reassembler reassembly_;
  NapCounters counters_;

  // client side
  std::map<ContentName, std::vector<Pending>> pending_;
  std::map<std::string, std::set<net::HostId>> memberships_;
  std::map<ContentName, std::string> channel_groups_;

  // server side
  std::map<std::uint64_t, net::HostId> origins_;       // scope -> server
  std::map<ContentName, net::HostId> stream_sources_;
  std::map<ContentName, std::uint64_t> open_groups_;
  std::map<std::uint64_t, CoalesceGroup> groups_;
  std::uint64_t next_group_ = 1;
};

} // namespace pointsim::nap
