#include "pointsim/event_log.hpp"

#include <charconv>
#include <stdexcept>

namespace pointsim::telemetry {

namespace {

using S = EventSchema;

// Order must follow EventType.
const std::array<EventSchema, static_cast<std::size_t>(EventType::count_)> kSchemas{{
  S{"run_start", {"seed", "config_hash", "mode"}, "scenario", false},
  S{"config", {}, "config", false},
  S{"inject", {"pkt", "msg", "bytes", "cls", "item"}, "", true},
  S{"tx", {"pkt", "msg", "bytes", "cls", "item"}, "", true},
  S{"replicate", {"pkt", "bytes", "copies", "cls"}, "", true},
  S{"deliver", {"pkt", "msg", "bytes", "cls", "item"}, "", true},
  S{"drop", {"pkt", "msg", "bytes", "cls"}, "reason", true},
  S{"false_positive", {"pkt", "bytes"}, "", true},
  S{"link_state", {"up"}, "", false},
  S{"topology_notify", {"link", "up", "epoch"}, "", false},
  S{"invalidate", {"epoch", "invalidated", "notified"}, "", false},
  S{"publish", {"scope", "item", "stream"}, "", false},
  S{"unpublish", {"scope", "item"}, "", false},
  S{"subscribe", {"scope", "item", "refresh"}, "", false},
  S{"unsubscribe", {"scope", "item"}, "", false},
  S{"match", {"publisher", "subscriber", "scope", "item"}, "", false},
  S{"fid_update", {"scope", "item", "epoch", "popcount"}, "fid", false},
  S{"coalesce_open", {"group", "scope", "item", "close_at"}, "url", false},
  S{"coalesce_close", {"group", "members", "naps"}, "", false},
  S{"server_request", {"request", "cls"}, "url", false},
  S{"server_response", {"msg", "bytes", "cls", "item", "request"}, "url", false},
  S{"server_drop", {"request"}, "url", false},
  S{"server_state", {"up"}, "", false},
  S{"http_request", {"request", "attempt", "cls", "bitrate", "chunk"}, "url", false},
  S{"http_response", {"request", "bytes", "cls", "elapsed", "chunk"}, "url", false},
  S{"http_timeout", {"request", "attempt"}, "", false},
  S{"http_error", {"request", "status"}, "", false},
  S{"failover", {"from", "to"}, "", false},
  S{"hard_failure", {"request"}, "", false},
  S{"playback_start", {"chunk", "chunk_duration"}, "", false},
  S{"stall", {"start", "duration", "chunk"}, "", false},
  S{"bitrate_switch", {"from", "to", "direction"}, "", false},
  S{"spurious", {"msg", "bytes", "cls"}, "", false},
  S{"igmp", {"join", "channel"}, "group", false},
  S{"zap", {"from", "to", "interval"}, "", false},
  S{"acquire", {"channel", "acquisition", "zap_at"}, "", false},
  S{"stb_rx", {"channel", "seq", "bytes"}, "", false},
  S{"stp_change", {"epoch", "tree_links"}, "links", false},
  S{"snoop_flush", {"epoch"}, "", false},
  S{"surrogate", {"on"}, "", false},
  S{"app_stop", {}, "", false},
  S{"warning", {}, "message", false},
}};

void
append_int(std::string& out, std::int64_t v)
{
  const auto at = out.size();
  out.resize(at + 20);
  auto res = std::to_chars(out.data() + at, out.data() + out.size(), v);
  out.resize(static_cast<std::size_t>(res.ptr - out.data()));
}

} // namespace

const EventSchema&
schema(EventType type)
{
  return kSchemas.at(static_cast<std::size_t>(type));
}

std::optional<EventType>
event_type_from(std::string_view name)
{
  for (std::size_t i = 0; i < kSchemas.size(); ++i) {
    if (kSchemas[i].name == name) {
      return static_cast<EventType>(i);
    }
  }
  return std::nullopt;
}

void
append_json_string(std::string& out, std::string_view s)
{
  static constexpr char hex[] = "0123456789abcdef";
  out.push_back('"');
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
    case '"':
      out += "\\\"";
      break;
    case '\\':
      out += "\\\\";
      break;
    case '\n':
      out += "\\n";
      break;
    case '\r':
      out += "\\r";
      break;
    case '\t':
      out += "\\t";
      break;
    default:
      if (c < 0x20) {
        out += "\\u00";
        out.push_back(hex[c >> 4]);
        out.push_back(hex[c & 0xf]);
      }
      else {
        out.push_back(ch);
      }
    }
  }
  out.push_back('"');
}

std::uint32_t
EventLog::intern(std::string_view element)
{
  if (auto it = element_ids_.find(std::string(element)); it != element_ids_.end()) {
    return it->second;
  }
  const auto id = static_cast<std::uint32_t>(elements_.size());
  elements_.emplace_back(element);
  std::string quoted;
  append_json_string(quoted, element);
  quoted_.push_back(std::move(quoted));
  element_ids_.emplace(std::string(element), id);
  return id;
}

std::optional<std::uint32_t>
EventLog::find_element(std::string_view name) const
{
  if (auto it = element_ids_.find(std::string(name)); it != element_ids_.end()) {
    return it->second;
  }
  return std::nullopt;
}

void
EventLog::emit(EventType type, std::uint32_t element, Fields f, std::string text)
{
  append(Event{clock_ != nullptr ? clock_->now() : 0, type, element, f, std::move(text)});
}

void
EventLog::append(Event e)
{
  if (e.element >= elements_.size()) {
    throw std::out_of_range("EventLog::append: unknown element id");
  }
  if (!events_.empty() && e.at < events_.back().at) {
    throw std::logic_error("EventLog::append: time went backwards");
  }
  scratch_.clear();
  write_event_line(e, scratch_);
  scratch_.push_back('\n');
  hash_ = fnv1a64(scratch_, hash_);
  if (schema(e.type).dataplane) {
    dataplane_hash_ = fnv1a64(scratch_, dataplane_hash_);
  }
  events_.push_back(std::move(e));
}

void
EventLog::add_sample(MetricSample s)
{
  if (s.element >= elements_.size()) {
    throw std::out_of_range("EventLog::add_sample: unknown element id");
  }
  samples_.push_back(std::move(s));
}

void
EventLog::write_event_line(const Event& e, std::string& out) const
{
  const auto& sc = schema(e.type);
  out += "{\"t\":";
  append_int(out, e.at);
  out += ",\"ev\":\"";
  out += sc.name;
  out += "\",\"el\":";
  out += quoted_[e.element];
  for (std::size_t i = 0; i < kEventFields; ++i) {
    if (sc.fields[i].empty()) {
      continue;
    }
    out += ",\"";
    out += sc.fields[i];
    out += "\":";
    append_int(out, e.f[i]);
  }
  if (!sc.text.empty()) {
    out += ",\"";
    out += sc.text;
    out += "\":";
    append_json_string(out, e.text);
  }
  out.push_back('}');
}

std::string
EventLog::event_line(const Event& e) const
{
  std::string out;
  write_event_line(e, out);
  return out;
}

std::string
EventLog::sample_line(const MetricSample& s) const
{
  std::string out = "{\"t\":";
  append_int(out, s.at);
  out += ",\"sample\":";
  append_json_string(out, s.metric);
  out += ",\"el\":";
  append_json_string(out, elements_.at(s.element));
  out += ",\"v\":";
  append_int(out, s.value);
  out.push_back('}');
  return out;
}

} // namespace pointsim::telemetry
