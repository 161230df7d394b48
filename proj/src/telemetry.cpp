#include "pointsim/telemetry.hpp"

#include "pointsim/net.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

namespace pointsim::telemetry {

std::vector<Interval>
disruption_intervals(std::span<const sim::Time> arrivals, sim::Duration nominal, sim::Time active_start,
                     sim::Time active_end, std::optional<sim::Duration> max_gap)
{
  if (nominal <= 0) {
    throw std::invalid_argument("nominal interval must be positive");
  }
  const sim::Duration gap = max_gap.value_or(2 * nominal);
  std::vector<Interval> out;
  if (active_end <= active_start) {
    return out;
  }
  std::vector<sim::Time> t;
  for (auto a : arrivals) {
    if (a >= active_start && a < active_end) {
      t.push_back(a);
    }
  }
  if (t.empty()) {
    out.push_back({active_start, active_end});
    return out;
  }
  std::sort(t.begin(), t.end());
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] - t[i - 1] > gap) {
      out.push_back({t[i - 1] + nominal, t[i]});
    }
  }
  if (active_end - t.back() > gap) {
    out.push_back({t.back() + nominal, active_end});
  }
  return out;
}

Agents::Agents(sim::Scheduler& scheduler, EventLog& log, sim::Duration interval, bool enabled)
  : scheduler_(scheduler), log_(log), interval_(interval), enabled_(enabled)
{
  if (interval_ <= 0) {
    throw std::invalid_argument("sampling interval must be positive");
  }
}

void
Agents::add_probe(std::uint32_t element, std::string metric, Probe probe)
{
  probes_.push_back({element, std::move(metric), std::move(probe)});
}

void
Agents::record(std::uint32_t element, std::string metric, std::int64_t value)
{
  if (enabled_) {
    log_.add_sample({scheduler_.now(), element, std::move(metric), value});
  }
}

void
Agents::start(sim::Time until)
{
  if (!enabled_) {
    return;
  }
  const sim::Time first = ((scheduler_.now() + interval_ - 1) / interval_) * interval_;
  if (first <= until) {
    scheduler_.schedule_at(first, [this, until] { tick(until); });
  }
}

void
Agents::tick(sim::Time until)
{
  for (const auto& p : probes_) {
    log_.add_sample({scheduler_.now(), p.element, p.metric, p.probe()});
  }
  if (scheduler_.now() + interval_ <= until) {
    scheduler_.schedule(interval_, [this, until] { tick(until); });
  }
}

namespace {

std::string
physical_of(const std::string& link_element)
{
  return link_element.substr(0, link_element.find(':'));
}

struct StbTrace {
  std::vector<sim::Time> arrivals;
  // Active segments: [acquire, next zap or stream end).
  std::vector<std::pair<sim::Time, std::optional<sim::Time>>> segments;
  std::int64_t channel = 0;
};

struct ClientTrace {
  std::int64_t max_bitrate = 0;
  bool pending_recovery = false;
  std::int64_t recoveries = 0;
  std::int64_t chunks = 0;
};

std::map<std::string, StbTrace>
stb_traces(const EventLog& log)
{
  std::map<std::string, StbTrace> traces;
  for (const auto& e : log.events()) {
    if (e.type == EventType::acquire) {
      auto& tr = traces[log.element_name(e.element)];
      tr.segments.emplace_back(e.at, std::nullopt);
      tr.channel = e.f[0];
    }
    else if (e.type == EventType::zap) {
      auto& tr = traces[log.element_name(e.element)];
      if (!tr.segments.empty() && !tr.segments.back().second) {
        tr.segments.back().second = e.at;
      }
    }
    else if (e.type == EventType::stb_rx) {
      traces[log.element_name(e.element)].arrivals.push_back(e.at);
    }
  }
  return traces;
}

sim::Duration
nominal_for(const StbTrace& tr, const SummaryOptions& options)
{
  if (auto it = options.channel_interval.find(tr.channel); it != options.channel_interval.end()) {
    return it->second;
  }
  sim::Duration best = 0;
  for (std::size_t i = 1; i < tr.arrivals.size(); ++i) {
    const auto d = tr.arrivals[i] - tr.arrivals[i - 1];
    if (d > 0 && (best == 0 || d < best)) {
      best = d;
    }
  }
  return best > 0 ? best : 1;
}

} // namespace

std::map<std::string, std::vector<Interval>>
stb_disruptions(const EventLog& log, const SummaryOptions& options)
{
  std::map<std::string, std::vector<Interval>> out;
  for (const auto& [name, tr] : stb_traces(log)) {
    auto& list = out[name];
    const auto nominal = nominal_for(tr, options);
    for (const auto& [start, stop] : tr.segments) {
      const sim::Time end = stop.value_or(std::max(options.stream_end, start));
      auto part = disruption_intervals(tr.arrivals, nominal, start, end);
      list.insert(list.end(), part.begin(), part.end());
    }
  }
  return out;
}

Summary
summarize(const EventLog& log, const SummaryOptions& options)
{
  Summary s;
  auto add = [&s] (const std::string& key, double v) { s[key] += v; };
  const auto chunk = static_cast<std::int64_t>(net::ContentClass::chunk);

  s["events"] = static_cast<double>(log.events().size());
  s["samples"] = static_cast<double>(log.samples().size());
  for (const char* k : {"bytes.injected", "bytes.replicated", "bytes.delivered", "bytes.dropped",
                        "false_positives", "hls.server_chunk_responses", "hls.client_chunk_responses",
                        "hls.distinct_chunk_bytes", "hls.stalls", "hls.stall_us", "hls.max_stall_us",
                        "hls.downshifts", "hls.upshifts", "hls.recoveries", "hls.timeouts", "hls.failovers",
                        "hls.hard_failures", "hls.errors", "iptv.rx_packets", "iptv.acquisitions",
                        "iptv.acquisition_max_us", "stp.changes", "snoop.flushes", "pce.invalidations",
                        "coalesce.groups", "coalesce.requests", "spurious", "warnings"}) {
    s[k] = 0;
  }

  std::set<std::string> distinct_chunks;
  std::map<std::string, ClientTrace> clients;
  // Summary slots per (link element, class); map nodes never move.
  std::map<std::pair<std::uint32_t, std::int64_t>, std::pair<double*, double*>> link_slots;
  double acquisition_total = 0;
  double& injected = s["bytes.injected"];
  double& replicated = s["bytes.replicated"];
  double& delivered = s["bytes.delivered"];
  double& dropped = s["bytes.dropped"];
  for (const auto& e : log.events()) {
    const std::string& el = log.element_name(e.element);
    switch (e.type) {
    case EventType::inject:
      injected += static_cast<double>(e.f[2]);
      break;
    case EventType::replicate:
      replicated += static_cast<double>(e.f[1]);
      break;
    case EventType::deliver:
      delivered += static_cast<double>(e.f[2]);
      break;
    case EventType::drop:
      dropped += static_cast<double>(e.f[2]);
      add("drops." + e.text, 1);
      break;
    case EventType::false_positive:
      add("false_positives", 1);
      break;
    case EventType::tx: {
      auto [it, fresh] = link_slots.try_emplace({e.element, e.f[3]});
      if (fresh) {
        const auto phys = physical_of(el);
        const auto cls = net::to_string(static_cast<net::ContentClass>(e.f[3]));
        it->second = {&s["link." + phys + ".bytes"], &s["link." + phys + "." + cls + ".bytes"]};
      }
      *it->second.first += static_cast<double>(e.f[2]);
      *it->second.second += static_cast<double>(e.f[2]);
      break;
    }
    case EventType::server_response:
      if (e.f[2] == chunk) {
        add("hls.server_chunk_responses", 1);
        if (distinct_chunks.insert(e.text).second) {
          add("hls.distinct_chunk_bytes", static_cast<double>(e.f[1]));
        }
      }
      break;
    case EventType::http_response:
      if (e.f[2] == chunk) {
        add("hls.client_chunk_responses", 1);
        ++clients[el].chunks;
      }
      break;
    case EventType::http_request: {
      auto& c = clients[el];
      c.max_bitrate = std::max(c.max_bitrate, e.f[3]);
      break;
    }
    case EventType::stall:
      add("hls.stalls", 1);
      add("hls.stall_us", static_cast<double>(e.f[1]));
      s["hls.max_stall_us"] = std::max(s["hls.max_stall_us"], static_cast<double>(e.f[1]));
      break;
    case EventType::bitrate_switch: {
      auto& c = clients[el];
      if (e.f[2] < 0) {
        add("hls.downshifts", 1);
        c.pending_recovery = true;
      }
      else {
        add("hls.upshifts", 1);
        c.max_bitrate = std::max(c.max_bitrate, e.f[1]);
        if (c.pending_recovery && e.f[1] >= c.max_bitrate) {
          c.pending_recovery = false;
          ++c.recoveries;
          add("hls.recoveries", 1);
        }
      }
      break;
    }
    case EventType::http_timeout:
      add("hls.timeouts", 1);
      break;
    case EventType::failover:
      add("hls.failovers", 1);
      break;
    case EventType::hard_failure:
      add("hls.hard_failures", 1);
      break;
    case EventType::http_error:
      add("hls.errors", 1);
      break;
    case EventType::stb_rx:
      add("iptv.rx_packets", 1);
      break;
    case EventType::acquire:
      add("iptv.acquisitions", 1);
      acquisition_total += static_cast<double>(e.f[1]);
      s["iptv.acquisition_max_us"] = std::max(s["iptv.acquisition_max_us"], static_cast<double>(e.f[1]));
      break;
    case EventType::stp_change:
      add("stp.changes", 1);
      break;
    case EventType::snoop_flush:
      add("snoop.flushes", 1);
      break;
    case EventType::invalidate:
      add("pce.invalidations", 1);
      break;
    case EventType::coalesce_open:
      add("coalesce.groups", 1);
      break;
    case EventType::coalesce_close:
      add("coalesce.requests", static_cast<double>(e.f[1]));
      break;
    case EventType::spurious:
      add("spurious", 1);
      break;
    case EventType::warning:
      add("warnings", 1);
      break;
    default:
      break;
    }
  }

  s["bytes.in_flight"] = s["bytes.injected"] + s["bytes.replicated"] - s["bytes.delivered"] - s["bytes.dropped"];
  const double server = s["hls.server_chunk_responses"];
  s["hls.merge_ratio"] = server > 0 ? s["hls.client_chunk_responses"] / server : 0;
  s["hls.clients"] = static_cast<double>(clients.size());
  double min_chunks = 0;
  bool first = true;
  for (const auto& [name, c] : clients) {
    min_chunks = first ? static_cast<double>(c.chunks) : std::min(min_chunks, static_cast<double>(c.chunks));
    first = false;
  }
  s["hls.min_client_chunks"] = min_chunks;
  s["iptv.acquisition_mean_us"] = s["iptv.acquisitions"] > 0 ? acquisition_total / s["iptv.acquisitions"] : 0;

  const auto disruptions = stb_disruptions(log, options);
  s["iptv.stbs"] = static_cast<double>(disruptions.size());
  double count = 0;
  double total = 0;
  double lo = 0;
  double hi = 0;
  double disrupted = 0;
  for (const auto& [name, list] : disruptions) {
    double stb_max = 0;
    for (const auto& iv : list) {
      const auto len = static_cast<double>(iv.length());
      lo = count == 0 ? len : std::min(lo, len);
      hi = std::max(hi, len);
      stb_max = std::max(stb_max, len);
      total += len;
      ++count;
    }
    if (!list.empty()) {
      ++disrupted;
    }
    s["stb." + name + ".disruptions"] = static_cast<double>(list.size());
    s["stb." + name + ".disruption_max_us"] = stb_max;
  }
  s["iptv.disruptions"] = count;
  s["iptv.disruption_total_us"] = total;
  s["iptv.disruption_min_us"] = lo;
  s["iptv.disruption_max_us"] = hi;
  s["iptv.stbs_disrupted"] = disrupted;
  return s;
}

std::string
format_value(double v)
{
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) {
    return fmt::format("{}", static_cast<std::int64_t>(v));
  }
  return fmt::format("{}", v);
}

void
write_jsonl(const EventLog& log, std::ostream& out)
{
  for (const auto& e : log.events()) {
    out << log.event_line(e) << '\n';
  }
  for (const auto& s : log.samples()) {
    out << log.sample_line(s) << '\n';
  }
}

EventLog
read_jsonl(std::istream& in)
{
  EventLog log;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) {
      continue;
    }
    try {
      const auto j = nlohmann::json::parse(line);
      const auto at = j.at("t").get<std::int64_t>();
      const auto el = log.intern(j.at("el").get<std::string>());
      if (j.contains("sample")) {
        log.add_sample({at, el, j.at("sample").get<std::string>(), j.at("v").get<std::int64_t>()});
        continue;
      }
      const auto name = j.at("ev").get<std::string>();
      const auto type = event_type_from(name);
      if (!type) {
        throw std::runtime_error("unknown event type '" + name + "'");
      }
      const auto& sc = schema(*type);
      Event e;
      e.at = at;
      e.type = *type;
      e.element = el;
      for (std::size_t i = 0; i < kEventFields; ++i) {
        if (!sc.fields[i].empty()) {
          e.f[i] = j.at(std::string(sc.fields[i])).get<std::int64_t>();
        }
      }
      if (!sc.text.empty()) {
        e.text = j.at(std::string(sc.text)).get<std::string>();
      }
      log.append(std::move(e));
    }
    catch (const std::exception& ex) {
      throw std::runtime_error(fmt::format("event log line {}: {}", n, ex.what()));
    }
  }
  return log;
}

namespace {

std::string
csv_field(const std::string& s)
{
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string>
split_csv(const std::string& line)
{
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      }
      else if (c == '"') {
        quoted = false;
      }
      else {
        out.back() += c;
      }
    }
    else if (c == '"') {
      quoted = true;
    }
    else if (c == ',') {
      out.emplace_back();
    }
    else {
      out.back() += c;
    }
  }
  return out;
}

std::int64_t
parse_int(const std::string& s)
{
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::runtime_error("not an integer: '" + s + "'");
  }
  return v;
}

constexpr const char* kCsvHeader = "t_us,element,metric,value";

} // namespace

void
write_metrics_csv(const EventLog& log, std::ostream& out)
{
  out << kCsvHeader << '\n';
  for (const auto& s : log.samples()) {
    out << s.at << ',' << csv_field(log.element_name(s.element)) << ',' << csv_field(s.metric) << ','
        << s.value << '\n';
  }
}

std::vector<CsvSample>
read_metrics_csv(std::istream& in)
{
  std::vector<CsvSample> out;
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("metrics csv: missing header");
  }
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) {
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 4) {
      throw std::runtime_error(fmt::format("metrics csv line {}: expected 4 fields", n));
    }
    out.push_back({parse_int(f[0]), f[1], f[2], parse_int(f[3])});
  }
  return out;
}

void
export_log(const EventLog& log, const std::filesystem::path& path, Format format)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  if (format == Format::jsonl) {
    write_jsonl(log, out);
  }
  else {
    write_metrics_csv(log, out);
  }
  out.flush();
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

EventLog
import_jsonl(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  return read_jsonl(in);
}

} // namespace pointsim::telemetry
