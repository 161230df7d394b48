#pragma once

#include "pointsim/net.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Trial services: live HLS origin and adaptive client, IPTV source and
// set-top box, surrogate agent.
namespace pointsim::apps {

/// Live multi-bitrate catalog. Chunk n covers [n*D, (n+1)*D) and can be
/// served once it is complete, at (n+1)*D.
struct HlsCatalog {
  std::string authority = "hls.trial";
  sim::Duration chunk_duration = sim::sec(2);
  std::vector<std::int64_t> bitrates{2'000'000, 8'000'000};
  int playlist_window = 3;

  void validate() const;
  /// Newest servable chunk at time t, -1 before the first completes.
  std::int64_t live_edge(sim::Time t) const;
  sim::Time available_at(std::int64_t chunk) const { return (chunk + 1) * chunk_duration; }
  std::int64_t chunk_bytes(std::int64_t bitrate) const;
  bool offers(std::int64_t bitrate) const;

  static std::string playlist_path() { return "/live/playlist.m3u8"; }
  static std::string chunk_path(std::int64_t bitrate, std::int64_t chunk);

  struct ChunkRef {
    std::int64_t bitrate = 0;
    std::int64_t index = 0;
  };
  static std::optional<ChunkRef> parse_chunk(std::string_view path);

  net::PlaylistInfo playlist(sim::Time t) const;
  std::int64_t playlist_bytes() const;
  /// Chunk URLs listed by the playlist at time t.
  std::vector<std::string> playlist_entries(sim::Time t) const;
};

struct ServerCounters {
  std::int64_t requests = 0;
  std::int64_t responses = 0;
  std::int64_t dropped = 0;
  std::int64_t not_found = 0;
};

class HlsServer {
 public:
  HlsServer(net::Runtime& rt, net::AccessNetwork& access, net::HostId host, const HlsCatalog& catalog,
            bool up = true);

  void set_up(bool up);
  bool up() const noexcept { return up_; }
  net::HostId host() const noexcept { return host_; }
  const ServerCounters& counters() const noexcept { return counters_; }

  void on_message(const net::Message& msg);

 private:
  net::Runtime& rt_;
  net::AccessNetwork& access_;
  net::HostId host_;
  const HlsCatalog& catalog_;
  std::uint32_t element_;
  bool up_;
  ServerCounters counters_;
};

/// Throughput-rule bitrate choice: highest rate r with r <= 0.8 * estimate,
/// or the lowest rate when none qualifies.
std::int64_t choose_bitrate(std::span<const std::int64_t> bitrates, std::int64_t estimate);

struct HlsClientConfig {
  sim::Time start_at = 0;
  sim::Time stop_at = 0;
  sim::Duration timeout = sim::sec(4);
  int upshift_after = 3;
  std::int64_t initial_estimate = 10'000'000;
  int buffer_target = 3;
  // Resolved addresses in DNS order. Empty when the network routes by name.
  std::vector<net::HostId> addresses;
  int max_attempts = 4;
  std::int64_t request_bytes = 400;
};

struct HlsClientStats {
  std::int64_t chunks = 0;
  std::int64_t chunk_bytes = 0;
  std::int64_t stalls = 0;
  sim::Duration stall_time = 0;
  std::int64_t downshifts = 0;
  std::int64_t upshifts = 0;
  std::int64_t timeouts = 0;
  std::int64_t failovers = 0;
  bool hard_failure = false;
};

/// Live HLS player. Fetches the playlist once, then requests each chunk as
/// soon as it is available (and the buffer is below target). Playback starts
/// with the first chunk; a chunk arriving after the buffer ran dry is a stall.
class HlsClient {
 public:
  HlsClient(net::Runtime& rt, net::AccessNetwork& access, net::HostId host, const HlsCatalog& catalog,
            HlsClientConfig config);

  /// Schedules the first request at start_at.
  void start();
  void on_message(const net::Message& msg);

  std::int64_t bitrate() const noexcept { return bitrate_; }
  std::int64_t estimate() const noexcept { return estimate_; }
  const HlsClientStats& stats() const noexcept { return stats_; }
  net::HostId host() const noexcept { return host_; }
  std::size_t address_index() const noexcept { return address_; }

 private:
  struct Request {
    std::uint64_t id = 0;
    std::int64_t chunk = -1; // -1: playlist
    std::int64_t bitrate = 0;
    std::uint32_t attempt = 0;
    sim::Time first_sent = 0;
    std::optional<sim::EventId> timer;
    bool connecting = false;
  };

  void request_playlist();
  void request_chunk(std::int64_t chunk);
  void schedule_chunk(std::int64_t chunk);
  void send_current();
  void send_connect();
  void arm_timer();
  void on_timeout(std::uint64_t id);
  void on_response(const net::Message& msg);
  void on_chunk(const net::Message& msg, const Request& r);
  std::string url_of(const Request& r) const;

  net::Runtime& rt_;
  net::AccessNetwork& access_;
  net::HostId host_;
  const HlsCatalog& catalog_;
  HlsClientConfig config_;
  std::uint32_t element_;

  std::optional<Request> current_;
  std::uint64_t next_request_ = 1;
  std::size_t address_ = 0;
  std::int64_t bitrate_ = 0;
  std::int64_t estimate_ = 0;
  int streak_ = 0;
  bool playing_ = false;
  sim::Time buffered_until_ = 0;
  bool stopped_ = false;
  HlsClientStats stats_;
};

struct IptvChannel {
  std::uint32_t id = 0;
  std::string group;
  std::int64_t bitrate = 4'000'000;
  std::int64_t packet_bytes = 1400;

  sim::Duration packet_interval() const { return sim::transmission_time(packet_bytes, bitrate); }
};

/// Constant-rate stream source.
class IptvSource {
 public:
  IptvSource(net::Runtime& rt, net::AccessNetwork& access, net::HostId host, IptvChannel channel,
             sim::Time start_at, sim::Time stop_at);

  void start();
  std::int64_t emitted() const noexcept { return emitted_; }
  const IptvChannel& channel() const noexcept { return channel_; }
  net::HostId host() const noexcept { return host_; }

 private:
  void emit();

  net::Runtime& rt_;
  net::AccessNetwork& access_;
  net::HostId host_;
  IptvChannel channel_;
  sim::Time start_at_;
  sim::Time stop_at_;
  std::int64_t emitted_ = 0;
};

struct ZapCommand {
  sim::Time at = 0;
  std::uint32_t channel = 0;
};

struct StbConfig {
  sim::Time join_at = 0;
  sim::Time stop_at = 0;
  std::uint32_t channel = 0;
  sim::Duration report_interval = sim::sec(5);
  sim::Duration report_phase = 0; // offset of the periodic reports in [0, interval)
  std::vector<ZapCommand> zaps;
};

struct StbStats {
  std::int64_t packets = 0;
  std::int64_t bytes = 0;
  std::int64_t foreign = 0; // packets of a channel not currently watched
  std::vector<sim::Duration> acquisitions;
};

/// Set-top box: IGMP membership, periodic reports, channel changes.
class Stb {
 public:
  Stb(net::Runtime& rt, net::AccessNetwork& access, net::HostId host,
      std::vector<IptvChannel> channels, StbConfig config);

  void start();
  void zap(std::uint32_t channel);
  void on_message(const net::Message& msg);

  std::uint32_t channel() const noexcept { return channel_; }
  const StbStats& stats() const noexcept { return stats_; }
  net::HostId host() const noexcept { return host_; }

 private:
  const IptvChannel& find(std::uint32_t id) const;
  void send_igmp(std::uint32_t channel, bool join);
  void report();

  net::Runtime& rt_;
  net::AccessNetwork& access_;
  net::HostId host_;
  std::vector<IptvChannel> channels_;
  StbConfig config_;
  std::uint32_t element_;
  std::uint32_t channel_ = 0;
  bool joined_ = false;
  std::optional<sim::Time> zap_at_;
  StbStats stats_;
};

/// Introduces or withdraws the surrogate server on command.
class SurrogateAgent {
 public:
  using Apply = std::function<void(bool on)>;

  SurrogateAgent(net::Runtime& rt, std::string name, Apply apply);
  void toggle(bool on);
  bool on() const noexcept { return on_; }

 private:
  net::Runtime& rt_;
  std::uint32_t element_;
  Apply apply_;
  bool on_ = false;
};

} // namespace pointsim::apps
