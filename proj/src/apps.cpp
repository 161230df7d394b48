#include "pointsim/apps.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace pointsim::apps {

using telemetry::EventType;

namespace {

constexpr std::int64_t kErrorBytes = 200;
constexpr std::int64_t kConnectBytes = 60;
constexpr std::int64_t kIgmpBytes = 64;

std::int64_t
as_field(std::uint64_t v)
{
  return static_cast<std::int64_t>(v);
}

std::optional<std::int64_t>
parse_int(std::string_view s)
{
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

} // namespace

void
HlsCatalog::validate() const
{
  if (authority.empty()) {
    throw std::invalid_argument("HLS authority must not be empty");
  }
  if (chunk_duration <= 0) {
    throw std::invalid_argument("chunk duration must be positive");
  }
  if (bitrates.empty() || !std::is_sorted(bitrates.begin(), bitrates.end()) ||
      std::adjacent_find(bitrates.begin(), bitrates.end()) != bitrates.end() || bitrates.front() <= 0) {
    throw std::invalid_argument("bitrates must be positive, distinct and ascending");
  }
  if (playlist_window < 1) {
    throw std::invalid_argument("playlist window must be at least 1");
  }
}

std::int64_t
HlsCatalog::live_edge(sim::Time t) const
{
  return t / chunk_duration - 1;
}

std::int64_t
HlsCatalog::chunk_bytes(std::int64_t bitrate) const
{
  return bitrate * chunk_duration / 8 / 1'000'000;
}

bool
HlsCatalog::offers(std::int64_t bitrate) const
{
  return std::find(bitrates.begin(), bitrates.end(), bitrate) != bitrates.end();
}

std::string
HlsCatalog::chunk_path(std::int64_t bitrate, std::int64_t chunk)
{
  return "/live/" + std::to_string(bitrate) + "/seg" + std::to_string(chunk) + ".ts";
}

std::optional<HlsCatalog::ChunkRef>
HlsCatalog::parse_chunk(std::string_view path)
{
  constexpr std::string_view prefix = "/live/";
  if (!path.starts_with(prefix) || !path.ends_with(".ts")) {
    return std::nullopt;
  }
  path.remove_prefix(prefix.size());
  path.remove_suffix(3);
  const auto slash = path.find("/seg");
  if (slash == std::string_view::npos) {
    return std::nullopt;
  }
  auto rate = parse_int(path.substr(0, slash));
  auto index = parse_int(path.substr(slash + 4));
  if (!rate || !index) {
    return std::nullopt;
  }
  return ChunkRef{*rate, *index};
}

net::PlaylistInfo
HlsCatalog::playlist(sim::Time t) const
{
  return {live_edge(t), bitrates, chunk_duration};
}

std::int64_t
HlsCatalog::playlist_bytes() const
{
  return 200 + 64 * playlist_window * static_cast<std::int64_t>(bitrates.size());
}

std::vector<std::string>
HlsCatalog::playlist_entries(sim::Time t) const
{
  std::vector<std::string> out;
  const auto edge = live_edge(t);
  for (auto rate : bitrates) {
    for (auto n = std::max<std::int64_t>(0, edge - playlist_window + 1); n <= edge; ++n) {
      out.push_back(chunk_path(rate, n));
    }
  }
  return out;
}

HlsServer::HlsServer(net::Runtime& rt, net::AccessNetwork& access, net::HostId host,
                     const HlsCatalog& catalog, bool up)
  : rt_(rt), access_(access), host_(host), catalog_(catalog), element_(access.element(host)), up_(up)
{}

void
HlsServer::set_up(bool up)
{
  if (up == up_) {
    return;
  }
  up_ = up;
  rt_.log.emit(EventType::server_state, element_, {up ? 1 : 0});
}

void
HlsServer::on_message(const net::Message& msg)
{
  if (msg.type == net::MessageType::connect) {
    if (!up_) {
      return;
    }
    net::Message ack;
    ack.id = rt_.message_id();
    ack.type = net::MessageType::connect_ack;
    ack.cls = net::ContentClass::connect;
    ack.size = kConnectBytes;
    ack.src = host_;
    ack.dst = msg.src;
    ack.request_id = msg.request_id;
    access_.send_up(host_, std::move(ack));
    return;
  }
  if (msg.type != net::MessageType::http_request) {
    return;
  }
  ++counters_.requests;
  const std::string url = msg.host + msg.path;
  if (!up_) {
    ++counters_.dropped;
    rt_.log.emit(EventType::server_drop, element_, {as_field(msg.request_id)}, url);
    return;
  }
  net::Message resp;
  resp.id = rt_.message_id();
  resp.type = net::MessageType::http_response;
  resp.src = host_;
  resp.dst = msg.src;
  resp.request_id = msg.request_id;
  resp.method = msg.method;
  resp.host = msg.host;
  resp.path = msg.path;
  resp.name = msg.name;
  resp.status = 200;
  std::int64_t item = -1;
  if (msg.path == HlsCatalog::playlist_path()) {
    resp.cls = net::ContentClass::playlist;
    resp.size = catalog_.playlist_bytes();
    resp.playlist = catalog_.playlist(rt_.now());
  }
  else if (auto ref = HlsCatalog::parse_chunk(msg.path);
           ref && catalog_.offers(ref->bitrate) && ref->index >= 0 &&
           ref->index <= catalog_.live_edge(rt_.now())) {
    resp.cls = net::ContentClass::chunk;
    resp.size = catalog_.chunk_bytes(ref->bitrate);
    item = ref->index;
  }
  else {
    ++counters_.not_found;
    resp.cls = net::ContentClass::error;
    resp.status = 404;
    resp.size = kErrorBytes;
  }
  rt_.log.emit(EventType::server_request, element_,
               {as_field(msg.request_id), static_cast<std::int64_t>(resp.cls)}, url);
  rt_.log.emit(EventType::server_response, element_,
               {as_field(resp.id), resp.size, static_cast<std::int64_t>(resp.cls), item,
                as_field(msg.request_id)},
               url);
  ++counters_.responses;
  access_.send_up(host_, std::move(resp));
}

std::int64_t
choose_bitrate(std::span<const std::int64_t> bitrates, std::int64_t estimate)
{
  if (bitrates.empty()) {
    throw std::invalid_argument("empty bitrate ladder");
  }
  std::int64_t best = bitrates.front();
  for (auto b : bitrates) {
    if (5 * b <= 4 * estimate) {
      best = std::max(best, b);
    }
  }
  return best;
}

HlsClient::HlsClient(net::Runtime& rt, net::AccessNetwork& access, net::HostId host,
                     const HlsCatalog& catalog, HlsClientConfig config)
  : rt_(rt)
  , access_(access)
  , host_(host)
  , catalog_(catalog)
  , config_(std::move(config))
  , element_(access.element(host))
  , estimate_(config_.initial_estimate)
{
  if (config_.timeout <= 0 || config_.upshift_after < 1 || config_.initial_estimate <= 0 ||
      config_.buffer_target < 1 || config_.max_attempts < 1 || config_.stop_at < config_.start_at) {
    throw std::invalid_argument("invalid HLS client configuration");
  }
  bitrate_ = choose_bitrate(catalog_.bitrates, estimate_);
}

void
HlsClient::start()
{
  rt_.scheduler.schedule_at(config_.start_at, [this] { request_playlist(); });
}

std::string
HlsClient::url_of(const Request& r) const
{
  return r.chunk < 0 ? HlsCatalog::playlist_path() : HlsCatalog::chunk_path(r.bitrate, r.chunk);
}

void
HlsClient::request_playlist()
{
  current_ = Request{next_request_++, -1, 0, 0, rt_.now(), std::nullopt, false};
  send_current();
  arm_timer();
}

void
HlsClient::request_chunk(std::int64_t chunk)
{
  if (stopped_) {
    return;
  }
  current_ = Request{next_request_++, chunk, bitrate_, 0, rt_.now(), std::nullopt, false};
  send_current();
  arm_timer();
}

void
HlsClient::schedule_chunk(std::int64_t chunk)
{
  sim::Time at = std::max(rt_.now(), catalog_.available_at(chunk));
  if (playing_) {
    at = std::max(at, buffered_until_ - config_.buffer_target * catalog_.chunk_duration);
  }
  if (stopped_ || at >= config_.stop_at) {
    if (!stopped_) {
      stopped_ = true;
      rt_.log.emit(EventType::app_stop, element_);
    }
    return;
  }
  if (at == rt_.now()) {
    request_chunk(chunk);
    return;
  }
  rt_.scheduler.schedule_at(at, [this, chunk] { request_chunk(chunk); });
}

void
HlsClient::send_current()
{
  auto& r = *current_;
  net::Message m;
  m.id = rt_.message_id();
  m.type = net::MessageType::http_request;
  m.cls = net::ContentClass::request;
  m.size = config_.request_bytes;
  m.src = host_;
  m.dst = config_.addresses.empty() ? net::kNoHost : config_.addresses[address_];
  m.method = "GET";
  m.host = catalog_.authority;
  m.path = url_of(r);
  m.name = pce::http_name(m.host, m.path);
  m.request_id = r.id;
  m.attempt = r.attempt;
  const auto cls = r.chunk < 0 ? net::ContentClass::playlist : net::ContentClass::chunk;
  rt_.log.emit(EventType::http_request, element_,
               {as_field(r.id), r.attempt, static_cast<std::int64_t>(cls), r.bitrate, r.chunk},
               m.host + m.path);
  access_.send_up(host_, std::move(m));
}

void
HlsClient::send_connect()
{
  current_->connecting = true;
  net::Message m;
  m.id = rt_.message_id();
  m.type = net::MessageType::connect;
  m.cls = net::ContentClass::connect;
  m.size = kConnectBytes;
  m.src = host_;
  m.dst = config_.addresses[address_];
  m.request_id = current_->id;
  access_.send_up(host_, std::move(m));
  arm_timer();
}

void
HlsClient::arm_timer()
{
  if (current_->timer) {
    rt_.scheduler.cancel(*current_->timer);
  }
  const auto id = current_->id;
  current_->timer = rt_.scheduler.schedule(config_.timeout, [this, id] { on_timeout(id); });
}

void
HlsClient::on_timeout(std::uint64_t id)
{
  if (!current_ || current_->id != id) {
    return;
  }
  auto& r = *current_;
  r.timer.reset();
  ++stats_.timeouts;
  rt_.log.emit(EventType::http_timeout, element_, {as_field(id), r.attempt});
  if (!config_.addresses.empty()) {
    if (address_ + 1 < config_.addresses.size()) {
      rt_.log.emit(EventType::failover, element_,
                   {config_.addresses[address_], config_.addresses[address_ + 1]});
      ++address_;
      ++stats_.failovers;
      send_connect();
      return;
    }
  }
  else if (static_cast<int>(r.attempt) + 1 < config_.max_attempts) {
    ++r.attempt;
    send_current();
    arm_timer();
    return;
  }
  rt_.log.emit(EventType::hard_failure, element_, {as_field(id)});
  stats_.hard_failure = true;
  current_.reset();
  stopped_ = true;
}

void
HlsClient::on_message(const net::Message& msg)
{
  if (!current_ || msg.request_id != current_->id) {
    return;
  }
  if (msg.type == net::MessageType::connect_ack) {
    if (current_->connecting) {
      current_->connecting = false;
      ++current_->attempt;
      send_current();
      arm_timer();
    }
    return;
  }
  if (msg.type != net::MessageType::http_response || current_->connecting) {
    return;
  }
  if (current_->timer) {
    rt_.scheduler.cancel(*current_->timer);
    current_->timer.reset();
  }
  on_response(msg);
}

void
HlsClient::on_response(const net::Message& msg)
{
  const Request r = *current_;
  current_.reset();
  if (msg.status != 200) {
    rt_.log.emit(EventType::http_error, element_, {as_field(r.id), msg.status});
    const sim::Duration backoff = catalog_.chunk_duration / 4;
    if (r.chunk < 0) {
      rt_.scheduler.schedule(backoff, [this] { request_playlist(); });
    }
    else if (!stopped_ && rt_.now() + backoff < config_.stop_at) {
      rt_.scheduler.schedule(backoff, [this, n = r.chunk] { request_chunk(n); });
    }
    return;
  }
  if (r.chunk < 0) {
    rt_.log.emit(EventType::http_response, element_,
                 {as_field(r.id), msg.size, static_cast<std::int64_t>(msg.cls), rt_.now() - r.first_sent, -1},
                 msg.host + msg.path);
    const auto edge = msg.playlist ? msg.playlist->live_edge : catalog_.live_edge(rt_.now());
    schedule_chunk(std::max<std::int64_t>(edge + 1, 0));
    return;
  }
  on_chunk(msg, r);
  schedule_chunk(r.chunk + 1);
}

void
HlsClient::on_chunk(const net::Message& msg, const Request& r)
{
  const auto now = rt_.now();
  const auto D = catalog_.chunk_duration;
  // Measured from the first attempt, so timeout waits count.
  const sim::Duration elapsed = std::max<sim::Duration>(1, now - r.first_sent);
  const std::int64_t sample = msg.size * 8 * 1'000'000 / elapsed;
  estimate_ = (estimate_ + sample) / 2;
  ++stats_.chunks;
  stats_.chunk_bytes += msg.size;
  rt_.log.emit(EventType::http_response, element_,
               {as_field(r.id), msg.size, static_cast<std::int64_t>(msg.cls), elapsed, r.chunk},
               msg.host + msg.path);

  if (!playing_) {
    playing_ = true;
    buffered_until_ = now + D;
    rt_.log.emit(EventType::playback_start, element_, {r.chunk, D});
  }
  else if (now > buffered_until_) {
    const sim::Duration stall = now - buffered_until_;
    ++stats_.stalls;
    stats_.stall_time += stall;
    rt_.log.emit(EventType::stall, element_, {buffered_until_, stall, r.chunk});
    buffered_until_ = now + D;
  }
  else {
    buffered_until_ += D;
  }

  const auto& ladder = catalog_.bitrates;
  const std::int64_t wanted = choose_bitrate(ladder, estimate_);
  if (wanted < bitrate_) {
    rt_.log.emit(EventType::bitrate_switch, element_, {bitrate_, wanted, -1});
    bitrate_ = wanted;
    ++stats_.downshifts;
    streak_ = 0;
  }
  else if (wanted > bitrate_) {
    if (++streak_ >= config_.upshift_after) {
      const auto next = *std::upper_bound(ladder.begin(), ladder.end(), bitrate_);
      rt_.log.emit(EventType::bitrate_switch, element_, {bitrate_, next, 1});
      bitrate_ = next;
      ++stats_.upshifts;
      streak_ = 0;
    }
  }
  else {
    streak_ = 0;
  }
}

IptvSource::IptvSource(net::Runtime& rt, net::AccessNetwork& access, net::HostId host, IptvChannel channel,
                       sim::Time start_at, sim::Time stop_at)
  : rt_(rt), access_(access), host_(host), channel_(std::move(channel)), start_at_(start_at), stop_at_(stop_at)
{
  if (channel_.group.empty() || channel_.bitrate <= 0 || channel_.packet_bytes <= 0) {
    throw std::invalid_argument("invalid IPTV channel");
  }
}

void
IptvSource::start()
{
  rt_.scheduler.schedule_at(start_at_, [this] { emit(); });
}

void
IptvSource::emit()
{
  if (rt_.now() >= stop_at_) {
    return;
  }
  net::Message m;
  m.id = rt_.message_id();
  m.type = net::MessageType::iptv_data;
  m.cls = net::ContentClass::iptv;
  m.size = channel_.packet_bytes;
  m.src = host_;
  m.group = channel_.group;
  m.channel = channel_.id;
  m.seq = static_cast<std::uint64_t>(emitted_);
  ++emitted_;
  access_.send_up(host_, std::move(m));
  rt_.scheduler.schedule(channel_.packet_interval(), [this] { emit(); });
}

Stb::Stb(net::Runtime& rt, net::AccessNetwork& access, net::HostId host, std::vector<IptvChannel> channels,
         StbConfig config)
  : rt_(rt)
  , access_(access)
  , host_(host)
  , channels_(std::move(channels))
  , config_(std::move(config))
  , element_(access.element(host))
{
  if (config_.report_interval <= 0 || config_.report_phase < 0 ||
      config_.report_phase >= config_.report_interval) {
    throw std::invalid_argument("STB report phase must lie in [0, interval)");
  }
  find(config_.channel);
  for (const auto& z : config_.zaps) {
    find(z.channel);
  }
}

const IptvChannel&
Stb::find(std::uint32_t id) const
{
  for (const auto& c : channels_) {
    if (c.id == id) {
      return c;
    }
  }
  throw std::invalid_argument("unknown channel " + std::to_string(id));
}

void
Stb::start()
{
  rt_.scheduler.schedule_at(config_.join_at, [this] {
    channel_ = config_.channel;
    joined_ = true;
    zap_at_ = rt_.now();
    send_igmp(channel_, true);
    rt_.scheduler.schedule(config_.report_phase == 0 ? config_.report_interval : config_.report_phase,
                           [this] { report(); });
  });
  for (const auto& z : config_.zaps) {
    rt_.scheduler.schedule_at(z.at, [this, ch = z.channel] { zap(ch); });
  }
}

void
Stb::send_igmp(std::uint32_t channel, bool join)
{
  const auto& c = find(channel);
  net::Message m;
  m.id = rt_.message_id();
  m.type = net::MessageType::igmp;
  m.cls = net::ContentClass::igmp;
  m.size = kIgmpBytes;
  m.src = host_;
  m.group = c.group;
  m.channel = c.id;
  m.join = join;
  rt_.log.emit(EventType::igmp, element_, {join ? 1 : 0, c.id}, c.group);
  access_.send_up(host_, std::move(m));
}

void
Stb::report()
{
  if (rt_.now() >= config_.stop_at) {
    return;
  }
  send_igmp(channel_, true);
  rt_.scheduler.schedule(config_.report_interval, [this] { report(); });
}

void
Stb::zap(std::uint32_t channel)
{
  if (!joined_) {
    return;
  }
  const std::uint32_t from = channel_;
  rt_.log.emit(EventType::zap, element_, {from, channel, 0});
  if (channel != from) {
    send_igmp(from, false);
    channel_ = channel;
    send_igmp(channel, true);
  }
  zap_at_ = rt_.now();
}

void
Stb::on_message(const net::Message& msg)
{
  if (msg.type != net::MessageType::iptv_data) {
    return;
  }
  if (!joined_ || msg.channel != channel_) {
    ++stats_.foreign;
    return;
  }
  ++stats_.packets;
  stats_.bytes += msg.size;
  if (zap_at_) {
    const sim::Duration acquisition = rt_.now() - *zap_at_;
    stats_.acquisitions.push_back(acquisition);
    rt_.log.emit(EventType::acquire, element_, {channel_, acquisition, *zap_at_});
    zap_at_.reset();
  }
  rt_.log.emit(EventType::stb_rx, element_, {channel_, as_field(msg.seq), msg.size});
}

SurrogateAgent::SurrogateAgent(net::Runtime& rt, std::string name, Apply apply)
  : rt_(rt), element_(rt.log.intern(name)), apply_(std::move(apply))
{}

void
SurrogateAgent::toggle(bool on)
{
  rt_.log.emit(EventType::surrogate, element_, {on ? 1 : 0});
  on_ = on;
  if (apply_) {
    apply_(on);
  }
}

} // namespace pointsim::apps
