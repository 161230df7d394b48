#pragma once

#include "pointsim/fid.hpp"
#include "pointsim/simkernel.hpp"
#include "pointsim/topology.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pointsim::harness {

struct NodeSpec {
  std::string name;
  pce::NodeRole role = pce::NodeRole::fn;
};

struct LinkSpec {
  std::string name;
  std::string a;
  std::string b;
  std::int64_t capacity_bps = 1'000'000'000;
  sim::Duration latency = sim::usec(100);
};

struct HostSpec {
  std::string name;
  std::string attach;
  std::int64_t capacity_bps = 16'000'000;
  sim::Duration latency = sim::msec(2);
};

struct TopologySpec {
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<HostSpec> hosts;
};

struct Params {
  sim::Duration coalesce_window = sim::msec(100);
  sim::Duration client_timeout = sim::sec(4);
  sim::Duration detection_delay = sim::msec(10);
  sim::Duration pce_processing = sim::msec(1);
  sim::Duration control_latency = sim::msec(1);
  sim::Duration reconvergence_delay = sim::sec(30);
  sim::Duration igmp_query_interval = sim::sec(5);
  std::int64_t mtu = 1400;
  int ttl = 64;
  std::optional<std::int64_t> queue_cap;
  bool telemetry = true;
  sim::Duration sample_interval = sim::sec(1);
};

struct HlsClientSpec {
  std::string host;
  sim::Time start = 0;
  std::optional<sim::Time> stop;
};

struct HlsSpec {
  std::string authority = "hls.trial";
  sim::Duration chunk_duration = sim::sec(2);
  std::vector<std::int64_t> bitrates{2'000'000, 8'000'000};
  int playlist_window = 3;
  std::string server;
  std::optional<std::string> surrogate;
  bool surrogate_on = false;
  std::vector<HlsClientSpec> clients;
  int upshift_after = 3;
  std::int64_t initial_estimate = 10'000'000;
  int buffer_target = 3;
  int max_attempts = 4;
};

struct ChannelSpec {
  std::uint32_t id = 0;
  std::string group;
  std::int64_t bitrate = 4'000'000;
  std::int64_t packet_bytes = 1400;
  std::string source;
  sim::Time start = 0;
  std::optional<sim::Time> stop;
};

struct ZapSpec {
  sim::Time at = 0;
  std::uint32_t channel = 0;
};

struct StbSpec {
  std::string host;
  std::uint32_t channel = 0;
  sim::Time join = 0;
  std::vector<ZapSpec> zaps;
};

struct IptvSpec {
  std::vector<ChannelSpec> channels;
  std::vector<StbSpec> stbs;
};

enum class Action { link_down, link_up, server_down, server_up, surrogate_on, surrogate_off };

const char* to_string(Action a);
std::optional<Action> action_from(std::string_view s);

struct ScriptEvent {
  sim::Time at = 0;
  Action action = Action::link_down;
  std::string target;
};

struct ScenarioConfig {
  std::string name;
  sim::Duration duration = sim::sec(30);
  std::uint64_t seed = 1;
  TopologySpec topology;
  fid::FidConfig fid{256, 5, fid::Mode::exact};
  Params params;
  std::optional<HlsSpec> hls;
  std::optional<IptvSpec> iptv;
  std::vector<ScriptEvent> events;
};

/// Rejected configuration. what() lists every violation, one per line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Parses and validates. A string "topology" is read relative to base_dir.
ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& file);

/// Every violation found; empty when the config is valid.
std::vector<std::string> validate(const ScenarioConfig& config);

/// Canonical JSON with every default filled in (durations in microseconds).
std::string effective_config(const ScenarioConfig& config);
/// FNV-1a over the effective config without the seed.
std::uint64_t config_hash(const ScenarioConfig& config);

/// Builds the graph (nodes and links in declaration order) and assigns link ids.
pce::TopologyGraph build_topology(const ScenarioConfig& config, std::uint64_t seed);

} // namespace pointsim::harness
