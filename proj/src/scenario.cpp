#include "pointsim/scenario.hpp"

#include "pointsim/hash.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pointsim::harness {

using nlohmann::json;
using nlohmann::ordered_json;

const char*
to_string(Action a)
{
  switch (a) {
  case Action::link_down:
    return "link_down";
  case Action::link_up:
    return "link_up";
  case Action::server_down:
    return "server_down";
  case Action::server_up:
    return "server_up";
  case Action::surrogate_on:
    return "surrogate_on";
  case Action::surrogate_off:
    return "surrogate_off";
  }
  return "?";
}

std::optional<Action>
action_from(std::string_view s)
{
  for (auto a : {Action::link_down, Action::link_up, Action::server_down, Action::server_up,
                 Action::surrogate_on, Action::surrogate_off}) {
    if (s == to_string(a)) {
      return a;
    }
  }
  return std::nullopt;
}

namespace {

std::string
join_lines(const std::vector<std::string>& v)
{
  std::string out = "invalid scenario:";
  for (const auto& s : v) {
    out += "\n  - " + s;
  }
  return out;
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
  : std::runtime_error(join_lines(violations)), violations_(std::move(violations))
{}

namespace {

/// Field extraction that records problems instead of throwing.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void fail(const std::string& path, const std::string& what) { errors_.push_back(path + ": " + what); }

  bool object(const json& j, const std::string& path)
  {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    return true;
  }

  void allow(const json& j, const std::string& path, std::initializer_list<std::string_view> keys)
  {
    for (const auto& [k, v] : j.items()) {
      bool ok = false;
      for (auto a : keys) {
        if (k == a || k == std::string(a) + "_ms" || k == std::string(a) + "_us") {
          ok = true;
        }
      }
      if (!ok) {
        fail(path, "unknown key '" + k + "'");
      }
    }
  }

  // Explicit nulls read as absent, so an effective config parses back.
  static bool present(const json& j, const std::string& key) { return j.contains(key) && !j.at(key).is_null(); }

  template <class T>
  bool integer(const json& j, const std::string& path, const std::string& key, T& out, bool required = false)
  {
    if (!present(j, key)) {
      if (required) {
        fail(path, "missing '" + key + "'");
      }
      return false;
    }
    const auto& v = j.at(key);
    if (v.is_number_integer()) {
      out = static_cast<T>(v.get<std::int64_t>());
      return true;
    }
    if (v.is_number_float() && std::isfinite(v.get<double>()) && v.get<double>() == std::floor(v.get<double>())) {
      out = static_cast<T>(v.get<double>());
      return true;
    }
    fail(path, "'" + key + "' must be an integer");
    return false;
  }

  bool duration(const json& j, const std::string& path, const std::string& key, sim::Duration& out,
                bool required = false)
  {
    const bool ms = present(j, key + "_ms");
    const bool us = present(j, key + "_us");
    if (ms && us) {
      fail(path, "both '" + key + "_ms' and '" + key + "_us' given");
      return false;
    }
    if (!ms && !us) {
      if (required) {
        fail(path, "missing '" + key + "_ms'");
      }
      return false;
    }
    const auto& v = j.at(ms ? key + "_ms" : key + "_us");
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      fail(path, "'" + key + (ms ? "_ms" : "_us") + "' must be a number");
      return false;
    }
    const double scale = ms ? 1000.0 : 1.0;
    out = static_cast<sim::Duration>(std::llround(v.get<double>() * scale));
    return true;
  }

  bool text(const json& j, const std::string& path, const std::string& key, std::string& out,
            bool required = false)
  {
    if (!present(j, key)) {
      if (required) {
        fail(path, "missing '" + key + "'");
      }
      return false;
    }
    if (!j.at(key).is_string()) {
      fail(path, "'" + key + "' must be a string");
      return false;
    }
    out = j.at(key).get<std::string>();
    return true;
  }

  bool boolean(const json& j, const std::string& path, const std::string& key, bool& out)
  {
    if (!present(j, key)) {
      return false;
    }
    if (!j.at(key).is_boolean()) {
      fail(path, "'" + key + "' must be true or false");
      return false;
    }
    out = j.at(key).get<bool>();
    return true;
  }

  const json* array(const json& j, const std::string& path, const std::string& key)
  {
    if (!present(j, key)) {
      return nullptr;
    }
    if (!j.at(key).is_array()) {
      fail(path, "'" + key + "' must be an array");
      return nullptr;
    }
    return &j.at(key);
  }

 private:
  std::vector<std::string>& errors_;
};

json
parse_json(std::string_view text, const std::string& what)
{
  try {
    return json::parse(text);
  }
  catch (const json::parse_error& e) {
    throw ConfigError({what + ": " + e.what()});
  }
}

std::string
read_file(const std::filesystem::path& file)
{
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw ConfigError({"cannot read " + file.string()});
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void
read_topology(Reader& r, const json& j, TopologySpec& t)
{
  const std::string path = "topology";
  if (!r.object(j, path)) {
    return;
  }
  r.allow(j, path, {"nodes", "links", "hosts"});
  if (const auto* nodes = r.array(j, path, "nodes")) {
    for (std::size_t i = 0; i < nodes->size(); ++i) {
      const auto& n = (*nodes)[i];
      const std::string p = path + ".nodes[" + std::to_string(i) + "]";
      if (!r.object(n, p)) {
        continue;
      }
      r.allow(n, p, {"name", "role"});
      NodeSpec s;
      r.text(n, p, "name", s.name, true);
      std::string role = "fn";
      r.text(n, p, "role", role);
      try {
        s.role = pce::role_from_string(role);
      }
      catch (const std::exception&) {
        r.fail(p, "unknown role '" + role + "' (fn, nap, pce)");
      }
      t.nodes.push_back(std::move(s));
    }
  }
  if (const auto* links = r.array(j, path, "links")) {
    for (std::size_t i = 0; i < links->size(); ++i) {
      const auto& l = (*links)[i];
      const std::string p = path + ".links[" + std::to_string(i) + "]";
      if (!r.object(l, p)) {
        continue;
      }
      r.allow(l, p, {"name", "a", "b", "capacity_bps", "latency"});
      LinkSpec s;
      r.text(l, p, "name", s.name, true);
      r.text(l, p, "a", s.a, true);
      r.text(l, p, "b", s.b, true);
      r.integer(l, p, "capacity_bps", s.capacity_bps);
      r.duration(l, p, "latency", s.latency);
      t.links.push_back(std::move(s));
    }
  }
  if (const auto* hosts = r.array(j, path, "hosts")) {
    for (std::size_t i = 0; i < hosts->size(); ++i) {
      const auto& h = (*hosts)[i];
      const std::string p = path + ".hosts[" + std::to_string(i) + "]";
      if (!r.object(h, p)) {
        continue;
      }
      r.allow(h, p, {"name", "attach", "capacity_bps", "latency"});
      HostSpec s;
      r.text(h, p, "name", s.name, true);
      r.text(h, p, "attach", s.attach, true);
      r.integer(h, p, "capacity_bps", s.capacity_bps);
      r.duration(h, p, "latency", s.latency);
      t.hosts.push_back(std::move(s));
    }
  }
}

void
read_params(Reader& r, const json& j, Params& p)
{
  const std::string path = "params";
  if (!r.object(j, path)) {
    return;
  }
  r.allow(j, path, {"coalesce_window", "client_timeout", "detection_delay", "pce_processing", "control_latency",
                    "reconvergence_delay", "igmp_query_interval", "mtu", "ttl", "queue_cap", "telemetry",
                    "sample_interval"});
  r.duration(j, path, "coalesce_window", p.coalesce_window);
  r.duration(j, path, "client_timeout", p.client_timeout);
  r.duration(j, path, "detection_delay", p.detection_delay);
  r.duration(j, path, "pce_processing", p.pce_processing);
  r.duration(j, path, "control_latency", p.control_latency);
  r.duration(j, path, "reconvergence_delay", p.reconvergence_delay);
  r.duration(j, path, "igmp_query_interval", p.igmp_query_interval);
  r.integer(j, path, "mtu", p.mtu);
  r.integer(j, path, "ttl", p.ttl);
  if (j.contains("queue_cap") && !j.at("queue_cap").is_null()) {
    std::int64_t cap = 0;
    if (r.integer(j, path, "queue_cap", cap)) {
      p.queue_cap = cap;
    }
  }
  r.boolean(j, path, "telemetry", p.telemetry);
  r.duration(j, path, "sample_interval", p.sample_interval);
}

void
read_hls(Reader& r, const json& j, HlsSpec& h)
{
  const std::string path = "hls";
  if (!r.object(j, path)) {
    return;
  }
  r.allow(j, path, {"authority", "chunk_duration", "bitrates_bps", "playlist_window", "server", "surrogate",
                    "surrogate_on", "clients", "upshift_after", "initial_estimate_bps", "buffer_target",
                    "max_attempts"});
  r.text(j, path, "authority", h.authority);
  r.duration(j, path, "chunk_duration", h.chunk_duration);
  if (const auto* rates = r.array(j, path, "bitrates_bps")) {
    h.bitrates.clear();
    for (const auto& v : *rates) {
      if (!v.is_number_integer()) {
        r.fail(path, "'bitrates_bps' entries must be integers");
        continue;
      }
      h.bitrates.push_back(v.get<std::int64_t>());
    }
  }
  r.integer(j, path, "playlist_window", h.playlist_window);
  r.text(j, path, "server", h.server, true);
  std::string surrogate;
  if (r.text(j, path, "surrogate", surrogate)) {
    h.surrogate = surrogate;
  }
  r.boolean(j, path, "surrogate_on", h.surrogate_on);
  r.integer(j, path, "upshift_after", h.upshift_after);
  r.integer(j, path, "initial_estimate_bps", h.initial_estimate);
  r.integer(j, path, "buffer_target", h.buffer_target);
  r.integer(j, path, "max_attempts", h.max_attempts);
  if (const auto* clients = r.array(j, path, "clients")) {
    for (std::size_t i = 0; i < clients->size(); ++i) {
      const auto& c = (*clients)[i];
      const std::string p = path + ".clients[" + std::to_string(i) + "]";
      if (!r.object(c, p)) {
        continue;
      }
      r.allow(c, p, {"host", "start", "stop"});
      HlsClientSpec s;
      r.text(c, p, "host", s.host, true);
      r.duration(c, p, "start", s.start);
      sim::Time stop = 0;
      if (r.duration(c, p, "stop", stop)) {
        s.stop = stop;
      }
      h.clients.push_back(std::move(s));
    }
  }
}

void
read_iptv(Reader& r, const json& j, IptvSpec& v)
{
  const std::string path = "iptv";
  if (!r.object(j, path)) {
    return;
  }
  r.allow(j, path, {"channels", "stbs"});
  if (const auto* channels = r.array(j, path, "channels")) {
    for (std::size_t i = 0; i < channels->size(); ++i) {
      const auto& c = (*channels)[i];
      const std::string p = path + ".channels[" + std::to_string(i) + "]";
      if (!r.object(c, p)) {
        continue;
      }
      r.allow(c, p, {"id", "group", "bitrate_bps", "packet_bytes", "source", "start", "stop"});
      ChannelSpec s;
      r.integer(c, p, "id", s.id, true);
      r.text(c, p, "group", s.group, true);
      r.integer(c, p, "bitrate_bps", s.bitrate);
      r.integer(c, p, "packet_bytes", s.packet_bytes);
      r.text(c, p, "source", s.source, true);
      r.duration(c, p, "start", s.start);
      sim::Time stop = 0;
      if (r.duration(c, p, "stop", stop)) {
        s.stop = stop;
      }
      v.channels.push_back(std::move(s));
    }
  }
  if (const auto* stbs = r.array(j, path, "stbs")) {
    for (std::size_t i = 0; i < stbs->size(); ++i) {
      const auto& b = (*stbs)[i];
      const std::string p = path + ".stbs[" + std::to_string(i) + "]";
      if (!r.object(b, p)) {
        continue;
      }
      r.allow(b, p, {"host", "channel", "join", "zaps"});
      StbSpec s;
      r.text(b, p, "host", s.host, true);
      r.integer(b, p, "channel", s.channel, true);
      r.duration(b, p, "join", s.join);
      if (const auto* zaps = r.array(b, p, "zaps")) {
        for (std::size_t k = 0; k < zaps->size(); ++k) {
          const auto& z = (*zaps)[k];
          const std::string zp = p + ".zaps[" + std::to_string(k) + "]";
          if (!r.object(z, zp)) {
            continue;
          }
          r.allow(z, zp, {"at", "channel"});
          ZapSpec zs;
          r.duration(z, zp, "at", zs.at, true);
          r.integer(z, zp, "channel", zs.channel, true);
          s.zaps.push_back(zs);
        }
      }
      v.stbs.push_back(std::move(s));
    }
  }
}

void
read_events(Reader& r, const json& events, std::vector<ScriptEvent>& out)
{
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const std::string p = "events[" + std::to_string(i) + "]";
    if (!r.object(e, p)) {
      continue;
    }
    r.allow(e, p, {"at", "action", "target"});
    ScriptEvent s;
    r.duration(e, p, "at", s.at, true);
    std::string action;
    if (r.text(e, p, "action", action, true)) {
      if (auto a = action_from(action)) {
        s.action = *a;
      }
      else {
        r.fail(p, "unknown action '" + action + "'");
      }
    }
    r.text(e, p, "target", s.target);
    out.push_back(std::move(s));
  }
}

} // namespace

ScenarioConfig
parse_scenario(std::string_view text, const std::filesystem::path& base_dir)
{
  const json j = parse_json(text, "scenario");
  std::vector<std::string> errors;
  Reader r(errors);
  ScenarioConfig c;
  if (!r.object(j, "scenario")) {
    throw ConfigError(errors);
  }
  r.allow(j, "scenario", {"name", "duration", "seed", "topology", "fid", "params", "hls", "iptv", "events"});
  r.text(j, "scenario", "name", c.name);
  r.duration(j, "scenario", "duration", c.duration);
  r.integer(j, "scenario", "seed", c.seed);
  if (j.contains("topology")) {
    const auto& t = j.at("topology");
    if (t.is_string()) {
      const auto file = base_dir / t.get<std::string>();
      try {
        const json inc = parse_json(read_file(file), file.string());
        read_topology(r, inc.is_object() && inc.contains("topology") ? inc.at("topology") : inc, c.topology);
      }
      catch (const ConfigError& e) {
        errors.insert(errors.end(), e.violations().begin(), e.violations().end());
      }
    }
    else {
      read_topology(r, t, c.topology);
    }
  }
  else {
    r.fail("scenario", "missing 'topology'");
  }
  if (j.contains("fid")) {
    const auto& f = j.at("fid");
    if (r.object(f, "fid")) {
      r.allow(f, "fid", {"mode", "m", "k"});
      std::string mode = fid::to_string(c.fid.mode);
      r.text(f, "fid", "mode", mode);
      try {
        c.fid.mode = fid::mode_from_string(mode);
      }
      catch (const std::exception&) {
        r.fail("fid", "unknown mode '" + mode + "' (exact, bloom)");
      }
      r.integer(f, "fid", "m", c.fid.m);
      r.integer(f, "fid", "k", c.fid.k);
    }
  }
  if (j.contains("params")) {
    read_params(r, j.at("params"), c.params);
  }
  if (j.contains("hls")) {
    c.hls.emplace();
    read_hls(r, j.at("hls"), *c.hls);
  }
  if (j.contains("iptv")) {
    c.iptv.emplace();
    read_iptv(r, j.at("iptv"), *c.iptv);
  }
  if (const auto* events = r.array(j, "scenario", "events")) {
    read_events(r, *events, c.events);
  }
  auto more = validate(c);
  errors.insert(errors.end(), more.begin(), more.end());
  if (!errors.empty()) {
    throw ConfigError(std::move(errors));
  }
  return c;
}

ScenarioConfig
load_scenario(const std::filesystem::path& file)
{
  auto c = parse_scenario(read_file(file), file.parent_path());
  if (c.name.empty()) {
    c.name = file.stem().string();
  }
  return c;
}

std::vector<std::string>
validate(const ScenarioConfig& c)
{
  std::vector<std::string> e;
  auto fail = [&e] (const std::string& path, const std::string& what) { e.push_back(path + ": " + what); };

  if (c.duration <= 0) {
    fail("scenario", "duration must be positive");
  }

  std::map<std::string, pce::NodeRole> nodes;
  for (const auto& n : c.topology.nodes) {
    if (n.name.empty()) {
      fail("topology", "node with an empty name");
    }
    else if (!nodes.emplace(n.name, n.role).second) {
      fail("topology", "duplicate node '" + n.name + "'");
    }
  }
  if (nodes.empty()) {
    fail("topology", "no nodes");
  }
  std::size_t pce_nodes = 0;
  for (const auto& n : c.topology.nodes) {
    pce_nodes += n.role == pce::NodeRole::pce ? 1 : 0;
  }
  if (pce_nodes > 1) {
    fail("topology", "at most one pce node");
  }
  std::set<std::string> links;
  for (const auto& l : c.topology.links) {
    const std::string p = "topology.links '" + l.name + "'";
    if (l.name.empty() || l.name.find_first_of(":,.") != std::string::npos) {
      fail(p, "link names must be non-empty and free of ':', ',' and '.'");
    }
    if (!links.insert(l.name).second) {
      fail(p, "duplicate link");
    }
    if (!nodes.contains(l.a)) {
      fail(p, "unknown endpoint '" + l.a + "'");
    }
    if (!nodes.contains(l.b)) {
      fail(p, "unknown endpoint '" + l.b + "'");
    }
    if (l.a == l.b) {
      fail(p, "self loop");
    }
    if (l.capacity_bps <= 0) {
      fail(p, "capacity must be positive");
    }
    if (l.latency < 0) {
      fail(p, "latency must be non-negative");
    }
  }
  std::set<std::string> hosts;
  for (const auto& h : c.topology.hosts) {
    const std::string p = "topology.hosts '" + h.name + "'";
    if (h.name.empty()) {
      fail("topology.hosts", "host with an empty name");
    }
    if (nodes.contains(h.name) || links.contains(h.name) || !hosts.insert(h.name).second) {
      fail(p, "name already used");
    }
    auto it = nodes.find(h.attach);
    if (it == nodes.end()) {
      fail(p, "unknown attachment node '" + h.attach + "'");
    }
    else if (it->second != pce::NodeRole::nap) {
      fail(p, "hosts attach to nap nodes only");
    }
    if (h.capacity_bps <= 0) {
      fail(p, "capacity must be positive");
    }
    if (h.latency < 0) {
      fail(p, "latency must be non-negative");
    }
  }

  if (c.fid.k < 1 || c.fid.k >= c.fid.m) {
    fail("fid", "need 1 <= k < m");
  }
  if (c.fid.mode == fid::Mode::exact && 2 * c.topology.links.size() > c.fid.m) {
    fail("fid", "exact mode needs m >= number of directed links (" + std::to_string(2 * c.topology.links.size()) +
                    " > " + std::to_string(c.fid.m) + ")");
  }

  const auto& p = c.params;
  if (p.coalesce_window < 0) {
    fail("params", "coalesce_window must be non-negative");
  }
  if (p.client_timeout <= 0) {
    fail("params", "client_timeout must be positive");
  }
  if (p.detection_delay < 0 || p.pce_processing < 0 || p.control_latency < 0) {
    fail("params", "control-plane delays must be non-negative");
  }
  if (p.reconvergence_delay < 0) {
    fail("params", "reconvergence_delay must be non-negative");
  }
  if (p.igmp_query_interval <= 0) {
    fail("params", "igmp_query_interval must be positive");
  }
  if (p.mtu <= 0) {
    fail("params", "mtu must be positive");
  }
  if (p.ttl <= 0) {
    fail("params", "ttl must be positive");
  }
  if (p.queue_cap && *p.queue_cap < 1) {
    fail("params", "queue_cap must be at least 1");
  }
  if (p.sample_interval <= 0) {
    fail("params", "sample_interval must be positive");
  }

  std::set<std::string> used;
  auto claim = [&] (const std::string& path, const std::string& host) {
    if (!hosts.contains(host)) {
      fail(path, "unknown host '" + host + "'");
    }
    else if (!used.insert(host).second) {
      fail(path, "host '" + host + "' already has an application");
    }
  };
  auto in_run = [&] (const std::string& path, sim::Time t) {
    if (t < 0 || t > c.duration) {
      fail(path, "time outside the run");
    }
  };

  if (c.hls) {
    const auto& h = *c.hls;
    if (h.authority.empty() || h.authority.find(' ') != std::string::npos) {
      fail("hls", "authority must be a non-empty host name");
    }
    if (h.chunk_duration <= 0) {
      fail("hls", "chunk_duration must be positive");
    }
    if (h.bitrates.empty() || !std::is_sorted(h.bitrates.begin(), h.bitrates.end()) ||
        std::adjacent_find(h.bitrates.begin(), h.bitrates.end()) != h.bitrates.end() || h.bitrates.front() <= 0) {
      fail("hls", "bitrates must be positive and strictly increasing");
    }
    if (h.playlist_window < 1) {
      fail("hls", "playlist_window must be at least 1");
    }
    if (h.upshift_after < 1 || h.buffer_target < 1 || h.max_attempts < 1) {
      fail("hls", "upshift_after, buffer_target and max_attempts must be at least 1");
    }
    if (h.initial_estimate <= 0) {
      fail("hls", "initial_estimate must be positive");
    }
    claim("hls.server", h.server);
    if (h.surrogate) {
      claim("hls.surrogate", *h.surrogate);
    }
    else if (h.surrogate_on) {
      fail("hls", "surrogate_on without a surrogate");
    }
    for (std::size_t i = 0; i < h.clients.size(); ++i) {
      const auto& cl = h.clients[i];
      const std::string cp = "hls.clients[" + std::to_string(i) + "]";
      claim(cp, cl.host);
      in_run(cp + ".start", cl.start);
      if (cl.stop) {
        in_run(cp + ".stop", *cl.stop);
        if (*cl.stop < cl.start) {
          fail(cp, "stop before start");
        }
      }
    }
  }

  if (c.iptv) {
    std::set<std::uint32_t> ids;
    std::set<std::string> groups;
    for (std::size_t i = 0; i < c.iptv->channels.size(); ++i) {
      const auto& ch = c.iptv->channels[i];
      const std::string cp = "iptv.channels[" + std::to_string(i) + "]";
      if (!ids.insert(ch.id).second) {
        fail(cp, "duplicate channel id " + std::to_string(ch.id));
      }
      if (ch.group.empty() || !groups.insert(ch.group).second) {
        fail(cp, "group must be non-empty and unique");
      }
      if (ch.bitrate <= 0) {
        fail(cp, "bitrate must be positive");
      }
      if (ch.packet_bytes <= 0 || ch.packet_bytes > p.mtu) {
        fail(cp, "packet_bytes must lie in (0, mtu]");
      }
      claim(cp + ".source", ch.source);
      in_run(cp + ".start", ch.start);
      if (ch.stop) {
        in_run(cp + ".stop", *ch.stop);
      }
    }
    for (std::size_t i = 0; i < c.iptv->stbs.size(); ++i) {
      const auto& s = c.iptv->stbs[i];
      const std::string sp = "iptv.stbs[" + std::to_string(i) + "]";
      claim(sp, s.host);
      if (!ids.contains(s.channel)) {
        fail(sp, "unknown channel " + std::to_string(s.channel));
      }
      in_run(sp + ".join", s.join);
      for (const auto& z : s.zaps) {
        in_run(sp + ".zaps", z.at);
        if (!ids.contains(z.channel)) {
          fail(sp + ".zaps", "unknown channel " + std::to_string(z.channel));
        }
        if (z.at < s.join) {
          fail(sp + ".zaps", "zap before join");
        }
      }
    }
  }

  std::map<std::string, bool> link_up;
  for (const auto& l : c.topology.links) {
    link_up[l.name] = true;
  }
  bool surrogate = c.hls && c.hls->surrogate_on;
  std::vector<const ScriptEvent*> ordered;
  for (const auto& ev : c.events) {
    ordered.push_back(&ev);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [] (const ScriptEvent* a, const ScriptEvent* b) { return a->at < b->at; });
  for (const auto* ev : ordered) {
    const std::string ep = std::string("events '") + to_string(ev->action) + " " + ev->target + "'";
    in_run(ep, ev->at);
    switch (ev->action) {
    case Action::link_down:
    case Action::link_up: {
      auto it = link_up.find(ev->target);
      if (it == link_up.end()) {
        fail(ep, "unknown link");
        break;
      }
      const bool up = ev->action == Action::link_up;
      if (it->second == up) {
        fail(ep, std::string("link is already ") + (up ? "up" : "down"));
      }
      it->second = up;
      break;
    }
    case Action::server_down:
    case Action::server_up:
      if (!c.hls || (ev->target != c.hls->server && ev->target != c.hls->surrogate.value_or(""))) {
        fail(ep, "target must be an HLS server");
      }
      break;
    case Action::surrogate_on:
    case Action::surrogate_off: {
      if (!c.hls || !c.hls->surrogate) {
        fail(ep, "no surrogate configured");
        break;
      }
      const bool on = ev->action == Action::surrogate_on;
      if (surrogate == on) {
        fail(ep, std::string("surrogate is already ") + (on ? "on" : "off"));
      }
      surrogate = on;
      break;
    }
    }
  }
  return e;
}

namespace {

ordered_json
effective_json(const ScenarioConfig& c)
{
  ordered_json j;
  j["name"] = c.name;
  j["duration_us"] = c.duration;
  j["seed"] = c.seed;
  auto& t = j["topology"];
  t["nodes"] = ordered_json::array();
  for (const auto& n : c.topology.nodes) {
    t["nodes"].push_back({{"name", n.name}, {"role", pce::to_string(n.role)}});
  }
  t["links"] = ordered_json::array();
  for (const auto& l : c.topology.links) {
    t["links"].push_back({{"name", l.name}, {"a", l.a}, {"b", l.b}, {"capacity_bps", l.capacity_bps},
                          {"latency_us", l.latency}});
  }
  t["hosts"] = ordered_json::array();
  for (const auto& h : c.topology.hosts) {
    t["hosts"].push_back(
      {{"name", h.name}, {"attach", h.attach}, {"capacity_bps", h.capacity_bps}, {"latency_us", h.latency}});
  }
  j["fid"] = {{"mode", fid::to_string(c.fid.mode)}, {"m", c.fid.m}, {"k", c.fid.k}};
  const auto& p = c.params;
  j["params"] = {{"coalesce_window_us", p.coalesce_window},
                 {"client_timeout_us", p.client_timeout},
                 {"detection_delay_us", p.detection_delay},
                 {"pce_processing_us", p.pce_processing},
                 {"control_latency_us", p.control_latency},
                 {"reconvergence_delay_us", p.reconvergence_delay},
                 {"igmp_query_interval_us", p.igmp_query_interval},
                 {"mtu", p.mtu},
                 {"ttl", p.ttl},
                 {"queue_cap", p.queue_cap ? ordered_json(*p.queue_cap) : ordered_json(nullptr)},
                 {"telemetry", p.telemetry},
                 {"sample_interval_us", p.sample_interval}};
  if (c.hls) {
    const auto& h = *c.hls;
    ordered_json clients = ordered_json::array();
    for (const auto& cl : h.clients) {
      clients.push_back({{"host", cl.host}, {"start_us", cl.start}, {"stop_us", cl.stop.value_or(c.duration)}});
    }
    j["hls"] = {{"authority", h.authority},
                {"chunk_duration_us", h.chunk_duration},
                {"bitrates_bps", h.bitrates},
                {"playlist_window", h.playlist_window},
                {"server", h.server},
                {"surrogate", h.surrogate ? ordered_json(*h.surrogate) : ordered_json(nullptr)},
                {"surrogate_on", h.surrogate_on},
                {"clients", clients},
                {"upshift_after", h.upshift_after},
                {"initial_estimate_bps", h.initial_estimate},
                {"buffer_target", h.buffer_target},
                {"max_attempts", h.max_attempts}};
  }
  if (c.iptv) {
    ordered_json channels = ordered_json::array();
    for (const auto& ch : c.iptv->channels) {
      channels.push_back({{"id", ch.id},
                          {"group", ch.group},
                          {"bitrate_bps", ch.bitrate},
                          {"packet_bytes", ch.packet_bytes},
                          {"source", ch.source},
                          {"start_us", ch.start},
                          {"stop_us", ch.stop.value_or(c.duration)}});
    }
    ordered_json stbs = ordered_json::array();
    for (const auto& s : c.iptv->stbs) {
      ordered_json zaps = ordered_json::array();
      for (const auto& z : s.zaps) {
        zaps.push_back({{"at_us", z.at}, {"channel", z.channel}});
      }
      stbs.push_back({{"host", s.host}, {"channel", s.channel}, {"join_us", s.join}, {"zaps", zaps}});
    }
    j["iptv"] = {{"channels", channels}, {"stbs", stbs}};
  }
  j["events"] = ordered_json::array();
  for (const auto& ev : c.events) {
    j["events"].push_back({{"at_us", ev.at}, {"action", to_string(ev.action)}, {"target", ev.target}});
  }
  return j;
}

} // namespace

std::string
effective_config(const ScenarioConfig& config)
{
  return effective_json(config).dump(2);
}

std::uint64_t
config_hash(const ScenarioConfig& config)
{
  auto j = effective_json(config);
  j.erase("seed");
  return fnv1a64(j.dump(), kFnvOffset);
}

pce::TopologyGraph
build_topology(const ScenarioConfig& config, std::uint64_t seed)
{
  pce::TopologyGraph g;
  for (const auto& n : config.topology.nodes) {
    g.add_node(n.name, n.role);
  }
  for (const auto& l : config.topology.links) {
    g.add_link(l.name, *g.find_node(l.a), *g.find_node(l.b), l.capacity_bps, l.latency);
  }
  g.assign_link_ids(config.fid, seed);
  return g;
}

} // namespace pointsim::harness
