#include "pointsim/runner.hpp"

#include "pointsim/apps.hpp"
#include "pointsim/fabric.hpp"
#include "pointsim/hash.hpp"
#include "pointsim/ip_baseline.hpp"
#include "pointsim/nap.hpp"
#include "pointsim/net.hpp"
#include "pointsim/pce.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace pointsim::harness {

using telemetry::EventType;

const char*
to_string(Mode m)
{
  return m == Mode::icn ? "icn" : "ip";
}

std::optional<Mode>
mode_from(std::string_view s)
{
  if (s == "icn") {
    return Mode::icn;
  }
  if (s == "ip") {
    return Mode::ip;
  }
  return std::nullopt;
}

bool
RunResult::ok() const
{
  return first_violation() == nullptr;
}

const InvariantResult*
RunResult::first_violation() const
{
  for (const auto& i : invariants) {
    if (!i.ok) {
      return &i;
    }
  }
  return nullptr;
}

telemetry::SummaryOptions
summary_options(const ScenarioConfig& config)
{
  telemetry::SummaryOptions o;
  o.stream_end = config.duration;
  if (config.iptv) {
    for (const auto& ch : config.iptv->channels) {
      apps::IptvChannel c{ch.id, ch.group, ch.bitrate, ch.packet_bytes};
      o.channel_interval[ch.id] = c.packet_interval();
      o.stream_end = std::min(o.stream_end, ch.stop.value_or(config.duration));
    }
  }
  return o;
}

namespace {

constexpr sim::Duration kDrainLimit = sim::sec(120);
constexpr sim::Duration kSettle = sim::sec(1);

std::string
hex(std::uint64_t v)
{
  return fmt::format("{:016x}", v);
}

/// Everything one run owns. Members are declared in dependency order.
struct World {
  const ScenarioConfig& config;
  Mode mode;
  std::uint64_t seed;
  sim::Scheduler scheduler;
  std::unique_ptr<telemetry::EventLog> log;
  net::Runtime rt;
  sim::RngStreams rng;
  pce::TopologyGraph topo;
  net::AccessNetwork access;
  net::PacketLedger ledger;

  std::unique_ptr<pce::Pce> pce_core;
  std::unique_ptr<pce::PceActor> pce_actor;
  std::unique_ptr<fabric::Fabric> fabric;
  std::map<pce::NodeId, std::unique_ptr<nap::Nap>> naps;
  std::unique_ptr<ip::IpNetwork> ipnet;

  std::unique_ptr<apps::HlsCatalog> catalog;
  std::map<std::string, std::unique_ptr<apps::HlsServer>> servers;
  std::vector<std::unique_ptr<apps::HlsClient>> clients;
  std::unique_ptr<apps::SurrogateAgent> surrogate;
  std::vector<std::unique_ptr<apps::IptvSource>> sources;
  std::vector<std::unique_ptr<apps::Stb>> stbs;
  std::unique_ptr<telemetry::Agents> agents;
  std::vector<RoutingChange> routing_changes;

  World(const ScenarioConfig& c, Mode m, std::uint64_t s)
    : config(c)
    , mode(m)
    , seed(s)
    , log(std::make_unique<telemetry::EventLog>(&scheduler))
    , rt(scheduler, *log)
    , rng(s)
    , topo(build_topology(c, sim::RngStreams::derive_seed(s, "link-ids")))
    , access(rt)
    , ledger(rt)
  {}

  net::HostId host(const std::string& name) const { return *access.find(name); }

  nap::Nap& nap_of(net::HostId h) { return *naps.at(access.attach(h)); }

  void build_network();
  void build_hls();
  void build_iptv();
  void build_script();
  void build_agents(bool enabled);
  std::map<std::string, std::uint64_t> routing_state() const;
  void set_link(const std::string& name, bool up);
};

void
World::build_network()
{
  for (const auto& h : config.topology.hosts) {
    access.add_host(h.name, *topo.find_node(h.attach), h.capacity_bps, h.latency);
  }
  const auto& p = config.params;
  if (mode == Mode::icn) {
    pce_core = std::make_unique<pce::Pce>(topo);
    pce_actor = std::make_unique<pce::PceActor>(rt, *pce_core, pce::PceTiming{p.pce_processing, p.control_latency});
    fabric::FabricConfig fc;
    if (p.queue_cap) {
      fc.queue_cap = static_cast<std::size_t>(*p.queue_cap);
    }
    fc.detection_delay = p.detection_delay;
    fabric = std::make_unique<fabric::Fabric>(rt, topo, ledger, fc);
    fabric->on_topology_change([this] (const pce::TopologyEvent& ev) { pce_actor->topology_event(ev); });
    nap::NapConfig nc{p.coalesce_window, p.mtu, p.ttl};
    for (const auto& n : topo.nodes()) {
      if (n.role != pce::NodeRole::nap) {
        continue;
      }
      auto nap = std::make_unique<nap::Nap>(rt, n.id, n.name, *fabric, *pce_actor, access, nc);
      fabric->attach(n.id, [ptr = nap.get()] (const net::Packet& pkt) { ptr->from_fabric(pkt); });
      naps.emplace(n.id, std::move(nap));
    }
    pce_actor->on_match([this] (const pce::MatchNotice& m) { naps.at(m.publisher)->on_match(m); });
    pce_actor->on_fid_update([this] (const pce::FidUpdate& u) { naps.at(u.publisher)->on_fid_update(u); });
    access.set_uplink([this] (net::HostId h, const net::Message& m) { nap_of(h).from_host(h, m); });
  }
  else {
    ip::IpConfig ic;
    ic.reconvergence_delay = p.reconvergence_delay;
    ic.mtu = p.mtu;
    ic.ttl = p.ttl;
    if (p.queue_cap) {
      ic.queue_cap = static_cast<std::size_t>(*p.queue_cap);
    }
    ipnet = std::make_unique<ip::IpNetwork>(rt, topo, ledger, access, ic);
    access.set_uplink([this] (net::HostId h, const net::Message& m) { ipnet->from_host(h, m); });
  }
}

void
World::build_hls()
{
  if (!config.hls) {
    return;
  }
  const auto& h = *config.hls;
  catalog = std::make_unique<apps::HlsCatalog>();
  catalog->authority = h.authority;
  catalog->chunk_duration = h.chunk_duration;
  catalog->bitrates = h.bitrates;
  catalog->playlist_window = h.playlist_window;
  catalog->validate();

  const auto primary = host(h.server);
  servers[h.server] = std::make_unique<apps::HlsServer>(rt, access, primary, *catalog, true);
  std::vector<net::HostId> addresses{primary};
  if (h.surrogate) {
    const auto sid = host(*h.surrogate);
    servers[*h.surrogate] = std::make_unique<apps::HlsServer>(rt, access, sid, *catalog, h.surrogate_on);
    addresses.push_back(sid);
  }
  for (auto& [name, server] : servers) {
    access.set_receiver(server->host(), [s = server.get()] (const net::Message& m) { s->on_message(m); });
  }
  if (mode == Mode::icn) {
    nap_of(primary).publish_http(h.authority, primary);
    if (h.surrogate && h.surrogate_on) {
      const auto sid = host(*h.surrogate);
      nap_of(sid).publish_http(h.authority, sid);
    }
  }
  if (h.surrogate) {
    const auto sid = host(*h.surrogate);
    surrogate = std::make_unique<apps::SurrogateAgent>(rt, "surrogate-agent", [this, sid, &h] (bool on) {
      servers.at(*h.surrogate)->set_up(on);
      if (mode == Mode::icn) {
        if (on) {
          nap_of(sid).publish_http(h.authority, sid);
        }
        else {
          nap_of(sid).withdraw_http(h.authority);
        }
      }
    });
  }
  for (const auto& c : h.clients) {
    apps::HlsClientConfig cc;
    cc.start_at = c.start;
    cc.stop_at = c.stop.value_or(config.duration);
    cc.timeout = config.params.client_timeout;
    cc.upshift_after = h.upshift_after;
    cc.initial_estimate = h.initial_estimate;
    cc.buffer_target = h.buffer_target;
    cc.max_attempts = h.max_attempts;
    if (mode == Mode::ip) {
      cc.addresses = addresses;
    }
    auto client = std::make_unique<apps::HlsClient>(rt, access, host(c.host), *catalog, cc);
    access.set_receiver(client->host(), [cl = client.get()] (const net::Message& m) { cl->on_message(m); });
    client->start();
    clients.push_back(std::move(client));
  }
}

void
World::build_iptv()
{
  if (!config.iptv) {
    return;
  }
  std::vector<apps::IptvChannel> channels;
  for (const auto& ch : config.iptv->channels) {
    apps::IptvChannel c{ch.id, ch.group, ch.bitrate, ch.packet_bytes};
    channels.push_back(c);
    const auto src = host(ch.source);
    if (mode == Mode::icn) {
      nap_of(src).publish_stream(ch.group, src);
    }
    else {
      ipnet->set_mrouter(ch.group, access.attach(src));
    }
    auto source = std::make_unique<apps::IptvSource>(rt, access, src, c, ch.start, ch.stop.value_or(config.duration));
    access.set_receiver(src, [] (const net::Message&) {});
    source->start();
    sources.push_back(std::move(source));
  }
  const auto interval = config.params.igmp_query_interval;
  for (const auto& s : config.iptv->stbs) {
    apps::StbConfig sc;
    sc.join_at = s.join;
    sc.stop_at = config.duration;
    sc.channel = s.channel;
    sc.report_interval = interval;
    sc.report_phase = static_cast<sim::Duration>(
      rng.stream("stb-report/" + s.host).below(static_cast<std::uint64_t>(interval)));
    for (const auto& z : s.zaps) {
      sc.zaps.push_back({z.at, z.channel});
    }
    auto stb = std::make_unique<apps::Stb>(rt, access, host(s.host), channels, sc);
    access.set_receiver(stb->host(), [b = stb.get()] (const net::Message& m) { b->on_message(m); });
    stb->start();
    stbs.push_back(std::move(stb));
  }
}

std::map<std::string, std::uint64_t>
World::routing_state() const
{
  std::map<std::string, std::uint64_t> out;
  if (mode != Mode::icn) {
    return out;
  }
  bool placed = false;
  for (const auto& n : topo.nodes()) {
    std::uint64_t h = fabric->node(n.id).state_hash();
    if (auto it = naps.find(n.id); it != naps.end()) {
      h = fnv1a64(it->second->state_hash(), h);
    }
    if (n.role == pce::NodeRole::pce) {
      h = fnv1a64(pce_core->state_hash(), h);
      placed = true;
    }
    out[n.name] = h;
  }
  if (!placed) {
    out["pce"] = pce_core->state_hash();
  }
  return out;
}

void
World::set_link(const std::string& name, bool up)
{
  const auto link = *topo.find_physical(name);
  const auto state = up ? pce::LinkState::up : pce::LinkState::down;
  if (mode == Mode::icn) {
    fabric->set_link_state(link, state);
  }
  else {
    ipnet->set_link_state(link, state);
  }
}

void
World::build_script()
{
  std::vector<sim::Time> times;
  for (const auto& ev : config.events) {
    times.push_back(ev.at);
  }
  std::sort(times.begin(), times.end());
  for (const auto& ev : config.events) {
    switch (ev.action) {
    case Action::link_down:
    case Action::link_up: {
      const bool up = ev.action == Action::link_up;
      auto next = std::upper_bound(times.begin(), times.end(), ev.at);
      sim::Time settle = ev.at + kSettle;
      if (next != times.end()) {
        settle = std::min(settle, *next - 1);
      }
      settle = std::max(settle, ev.at);
      scheduler.schedule_at(ev.at, [this, name = ev.target, up, settle] {
        RoutingChange rc;
        rc.at = scheduler.now();
        rc.link = name;
        rc.up = up;
        auto before = std::make_shared<std::map<std::string, std::uint64_t>>(routing_state());
        set_link(name, up);
        if (mode != Mode::icn) {
          return;
        }
        scheduler.schedule_at(settle, [this, rc, before] () mutable {
          for (const auto& [el, h] : routing_state()) {
            if (before->at(el) != h) {
              rc.changed.insert(el);
            }
          }
          for (const auto& n : topo.nodes()) {
            if (n.role == pce::NodeRole::fn) {
              rc.forwarding_nodes.insert(n.name);
            }
          }
          routing_changes.push_back(std::move(rc));
        });
      });
      break;
    }
    case Action::server_down:
    case Action::server_up:
      scheduler.schedule_at(ev.at, [this, name = ev.target, up = ev.action == Action::server_up] {
        servers.at(name)->set_up(up);
      });
      break;
    case Action::surrogate_on:
    case Action::surrogate_off:
      scheduler.schedule_at(ev.at, [this, on = ev.action == Action::surrogate_on] { surrogate->toggle(on); });
      break;
    }
  }
}

void
World::build_agents(bool enabled)
{
  agents = std::make_unique<telemetry::Agents>(scheduler, *log, config.params.sample_interval, enabled);
  const fabric::LinkEngine& engine = mode == Mode::icn ? fabric->links() : ipnet->links();
  for (const auto& l : topo.links()) {
    agents->add_probe(engine.element(l.index), "tx_bytes",
                      [&engine, li = l.index] { return engine.counters(li).tx_bytes; });
    agents->add_probe(engine.element(l.index), "rx_bytes",
                      [&engine, li = l.index] { return engine.counters(li).rx_bytes; });
  }
  for (const auto& c : clients) {
    const auto el = access.element(c->host());
    agents->add_probe(el, "chunk_bytes", [cl = c.get()] { return cl->stats().chunk_bytes; });
    agents->add_probe(el, "bitrate", [cl = c.get()] { return cl->bitrate(); });
  }
  for (const auto& s : stbs) {
    const auto el = access.element(s->host());
    agents->add_probe(el, "rx_bytes", [b = s.get()] { return b->stats().bytes; });
  }
  agents->start(config.duration);
}

InvariantResult
check_conservation(const net::PacketLedger& ledger, const telemetry::Summary& s)
{
  const auto& t = ledger.totals();
  InvariantResult r{"conservation", true, ""};
  const bool live = t.injected + t.replicated == t.delivered + t.dropped;
  const bool logged = s.at("bytes.injected") == static_cast<double>(t.injected) &&
                      s.at("bytes.replicated") == static_cast<double>(t.replicated) &&
                      s.at("bytes.delivered") == static_cast<double>(t.delivered) &&
                      s.at("bytes.dropped") == static_cast<double>(t.dropped);
  r.ok = live && logged;
  r.detail = fmt::format("injected={} replicated={} delivered={} dropped={}", t.injected, t.replicated,
                         t.delivered, t.dropped);
  return r;
}

InvariantResult
check_spanning_tree(const ip::IpNetwork& net)
{
  const auto& topo = net.topology();
  std::vector<std::size_t> parent(topo.node_count());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent] (std::size_t x) {
    while (parent[x] != x) {
      x = parent[x] = parent[parent[x]];
    }
    return x;
  };
  InvariantResult r{"spanning_tree", true, ""};
  for (auto p : net.stp().active()) {
    const auto& l = topo.link(topo.physical(p).forward);
    if (topo.physical_state(p) != pce::LinkState::up) {
      r.ok = false;
      r.detail = "active tree uses down link " + topo.physical(p).name;
      return r;
    }
    const auto a = find(l.src);
    const auto b = find(l.dst);
    if (a == b) {
      r.ok = false;
      r.detail = "active tree has a cycle through " + topo.physical(p).name;
      return r;
    }
    parent[a] = b;
  }
  r.detail = fmt::format("{} active links", net.stp().active().size());
  return r;
}

} // namespace

RunResult
run_scenario(const ScenarioConfig& config, const RunOptions& options)
{
  auto errors = validate(config);
  if (!errors.empty()) {
    throw ConfigError(std::move(errors));
  }
  World w(config, options.mode, options.seed);
  RunResult result;
  result.mode = options.mode;
  result.seed = options.seed;
  result.config_hash = config_hash(config);
  result.scenario = config.name;
  result.summary_options = summary_options(config);

  auto& log = *w.log;
  const auto run_el = log.intern("run");
  log.emit(EventType::run_start, run_el,
           {static_cast<std::int64_t>(options.seed), static_cast<std::int64_t>(result.config_hash),
            options.mode == Mode::icn ? 0 : 1},
           config.name);
  ScenarioConfig echoed = config;
  echoed.seed = options.seed;
  log.emit(EventType::config, run_el, {}, nlohmann::json::parse(effective_config(echoed)).dump());

  w.build_network();
  w.build_hls();
  w.build_iptv();
  w.build_script();
  w.build_agents(options.telemetry.value_or(config.params.telemetry));

  w.scheduler.run_until(config.duration);
  w.scheduler.run_until(config.duration + kDrainLimit);
  result.end = std::max(config.duration, log.events().empty() ? 0 : log.events().back().at);

  result.summary = telemetry::summarize(log, result.summary_options);
  result.invariants.push_back(check_conservation(w.ledger, result.summary));
  result.invariants.push_back({"drained", w.scheduler.pending() == 0 && w.ledger.totals().in_flight() == 0,
                               fmt::format("{} events pending", w.scheduler.pending())});
  if (config.fid.mode == fid::Mode::exact) {
    result.invariants.push_back({"exact_fid_no_false_positive", result.summary.at("false_positives") == 0,
                                 fmt::format("{} false positives", result.summary.at("false_positives"))});
  }
  if (w.ipnet) {
    result.invariants.push_back(check_spanning_tree(*w.ipnet));
  }
  result.routing_changes = std::move(w.routing_changes);
  result.log = std::move(w.log);
  return result;
}

std::string
render_summary(const RunResult& r)
{
  std::string out;
  out += fmt::format("scenario: {}\n", r.scenario);
  out += fmt::format("mode: {}\n", to_string(r.mode));
  out += fmt::format("seed: {}\n", r.seed);
  out += fmt::format("config_hash: {}\n", hex(r.config_hash));
  out += fmt::format("event_log_hash: {}\n", hex(r.log->hash()));
  out += fmt::format("dataplane_hash: {}\n", hex(r.log->dataplane_hash()));
  out += fmt::format("end_us: {}\n", r.end);
  for (const auto& i : r.invariants) {
    out += fmt::format("invariant.{}: {} ({})\n", i.name, i.ok ? "ok" : "VIOLATED", i.detail);
  }
  for (std::size_t k = 0; k < r.routing_changes.size(); ++k) {
    const auto& rc = r.routing_changes[k];
    std::string changed;
    for (const auto& e : rc.changed) {
      changed += (changed.empty() ? "" : ",") + e;
    }
    out += fmt::format("reroute.{}: t_us={} link={} {} changed={}\n", k, rc.at, rc.link, rc.up ? "up" : "down",
                       changed);
  }
  out += "---\n";
  for (const auto& [key, v] : r.summary) {
    out += fmt::format("{} = {}\n", key, telemetry::format_value(v));
  }
  return out;
}

void
write_artifacts(const RunResult& result, const ScenarioConfig& config, const std::filesystem::path& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  }
  auto write_text = [] (const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
      throw std::runtime_error("cannot write " + file.string());
    }
  };
  ScenarioConfig echoed = config;
  echoed.seed = result.seed;
  write_text(dir / "effective_config.json", effective_config(echoed) + "\n");
  telemetry::export_log(*result.log, dir / "events.jsonl", telemetry::Format::jsonl);
  telemetry::export_log(*result.log, dir / "metrics.csv", telemetry::Format::csv);
  write_text(dir / "summary.txt", render_summary(result));
}

SummaryFile
read_summary(const std::filesystem::path& file)
{
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("cannot read " + file.string());
  }
  SummaryFile s;
  std::string line;
  bool body = false;
  while (std::getline(in, line)) {
    if (line == "---") {
      body = true;
      continue;
    }
    if (body) {
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) {
        continue;
      }
      s.values[line.substr(0, eq)] = std::stod(line.substr(eq + 3));
    }
    else {
      const auto colon = line.find(": ");
      if (colon != std::string::npos) {
        s.header[line.substr(0, colon)] = line.substr(colon + 2);
      }
    }
  }
  return s;
}

ComparisonReport
compare_runs(const std::filesystem::path& a, const std::filesystem::path& b)
{
  const auto sa = read_summary(a / "summary.txt");
  const auto sb = read_summary(b / "summary.txt");
  std::vector<std::string> problems;
  auto header = [] (const SummaryFile& s, const std::string& k) {
    auto it = s.header.find(k);
    return it == s.header.end() ? std::string() : it->second;
  };
  if (header(sa, "config_hash").empty() || header(sa, "config_hash") != header(sb, "config_hash")) {
    problems.push_back("config hash mismatch: " + header(sa, "config_hash") + " vs " + header(sb, "config_hash"));
  }
  if (header(sa, "seed") != header(sb, "seed")) {
    problems.push_back("seed mismatch: " + header(sa, "seed") + " vs " + header(sb, "seed"));
  }
  if (!problems.empty()) {
    throw ConfigError(std::move(problems));
  }
  ComparisonReport r;
  r.scenario = header(sa, "scenario");
  r.mode_a = header(sa, "mode");
  r.mode_b = header(sb, "mode");
  std::set<std::string> keys;
  for (const auto& [k, v] : sa.values) {
    keys.insert(k);
  }
  for (const auto& [k, v] : sb.values) {
    keys.insert(k);
  }
  for (const auto& k : keys) {
    auto get = [&k] (const SummaryFile& s) {
      auto it = s.values.find(k);
      return it == s.values.end() ? 0.0 : it->second;
    };
    r.rows.push_back({k, get(sa), get(sb), get(sb) - get(sa)});
  }
  if ((r.mode_a == "icn" && r.mode_b == "ip") || (r.mode_a == "ip" && r.mode_b == "icn")) {
    const auto& icn = r.mode_a == "icn" ? sa.values : sb.values;
    const auto& ipv = r.mode_a == "icn" ? sb.values : sa.values;
    double icn_bytes = 0;
    double ip_bytes = 0;
    for (const auto& [k, v] : icn) {
      if (k.starts_with("link.") && std::count(k.begin(), k.end(), '.') == 2) {
        icn_bytes += v;
      }
    }
    for (const auto& [k, v] : ipv) {
      if (k.starts_with("link.") && std::count(k.begin(), k.end(), '.') == 2) {
        ip_bytes += v;
      }
      if (k.starts_with("link.") && k.ends_with(".chunk.bytes")) {
        auto it = icn.find(k);
        if (it != icn.end() && it->second > 0) {
          r.derived["chunk_bytes_ratio_ip_to_icn." + k.substr(5, k.size() - 5 - 12)] = v / it->second;
        }
      }
    }
    if (ip_bytes > 0) {
      r.derived["bandwidth_saving_pct"] = 100.0 * (ip_bytes - icn_bytes) / ip_bytes;
    }
    auto value = [] (const std::map<std::string, double>& m, const std::string& k) {
      auto it = m.find(k);
      return it == m.end() ? 0.0 : it->second;
    };
    const double di = value(icn, "iptv.disruption_max_us");
    const double dp = value(ipv, "iptv.disruption_max_us");
    r.derived["disruption_max_us.icn"] = di;
    r.derived["disruption_max_us.ip"] = dp;
    if (di > 0) {
      r.derived["disruption_ratio_ip_to_icn"] = dp / di;
    }
    r.derived["stalls.icn"] = value(icn, "hls.stalls");
    r.derived["stalls.ip"] = value(ipv, "hls.stalls");
  }
  return r;
}

std::string
render_comparison(const ComparisonReport& report)
{
  std::string out = fmt::format("scenario: {}\nA: {}\nB: {}\n\n", report.scenario, report.mode_a, report.mode_b);
  std::size_t width = 3;
  for (const auto& row : report.rows) {
    width = std::max(width, row.key.size());
  }
  out += fmt::format("{:<{}}  {:>16}  {:>16}  {:>16}\n", "key", width, "A", "B", "B-A");
  for (const auto& row : report.rows) {
    out += fmt::format("{:<{}}  {:>16}  {:>16}  {:>16}\n", row.key, width, telemetry::format_value(row.a),
                       telemetry::format_value(row.b), telemetry::format_value(row.delta));
  }
  if (!report.derived.empty()) {
    out += "\nderived:\n";
    for (const auto& [k, v] : report.derived) {
      out += fmt::format("  {} = {}\n", k, telemetry::format_value(v));
    }
  }
  return out;
}

} // namespace pointsim::harness
