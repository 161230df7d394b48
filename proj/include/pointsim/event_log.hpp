#pragma once

#include "pointsim/hash.hpp"
#include "pointsim/simkernel.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pointsim::telemetry {

enum class EventType : std::uint8_t {
  run_start,
  config,
  inject,
  tx,
  replicate,
  deliver,
  drop,
  false_positive,
  link_state,
  topology_notify,
  invalidate,
  publish,
  unpublish,
  subscribe,
  unsubscribe,
  match,
  fid_update,
  coalesce_open,
  coalesce_close,
  server_request,
  server_response,
  server_drop,
  server_state,
  http_request,
  http_response,
  http_timeout,
  http_error,
  failover,
  hard_failure,
  playback_start,
  stall,
  bitrate_switch,
  spurious,
  igmp,
  zap,
  acquire,
  stb_rx,
  stp_change,
  snoop_flush,
  surrogate,
  app_stop,
  warning,
  count_
};

inline constexpr std::size_t kEventFields = 5;

/// Field layout of one event type. Unused field slots have an empty name.
struct EventSchema {
  std::string_view name;
  std::array<std::string_view, kEventFields> fields;
  std::string_view text; // name of the free-text field, empty if none
  bool dataplane = false;
};

const EventSchema& schema(EventType type);
std::optional<EventType> event_type_from(std::string_view name);

using Fields = std::array<std::int64_t, kEventFields>;

struct Event {
  sim::Time at = 0;
  EventType type = EventType::warning;
  std::uint32_t element = 0;
  Fields f{};
  std::string text;
};

struct MetricSample {
  sim::Time at = 0;
  std::uint32_t element = 0;
  std::string metric;
  std::int64_t value = 0;
};

/// Ordered, hash-chained run log.
///
/// Each appended event is serialized to its canonical JSONL line and folded
/// into a running FNV-1a chain, so hash() equals the hash of the exported
/// event lines. dataplane_hash() covers only packet-level events.
class EventLog {
 public:
  explicit EventLog(const sim::Scheduler* clock = nullptr) : clock_(clock) {}

  std::uint32_t intern(std::string_view element);
  const std::string& element_name(std::uint32_t id) const { return elements_.at(id); }
  std::optional<std::uint32_t> find_element(std::string_view name) const;

  void emit(EventType type, std::uint32_t element, Fields f = {}, std::string text = {});
  void append(Event e);
  void add_sample(MetricSample s);

  const std::vector<Event>& events() const noexcept { return events_; }
  const std::vector<MetricSample>& samples() const noexcept { return samples_; }
  std::uint64_t hash() const noexcept { return hash_; }
  std::uint64_t dataplane_hash() const noexcept { return dataplane_hash_; }

  std::string event_line(const Event& e) const;
  std::string sample_line(const MetricSample& s) const;

 private:
  void write_event_line(const Event& e, std::string& out) const;

  const sim::Scheduler* clock_;
  std::vector<std::string> elements_;
  std::vector<std::string> quoted_; // JSON-escaped element names
  std::unordered_map<std::string, std::uint32_t> element_ids_;
  std::vector<Event> events_;
  std::vector<MetricSample> samples_;
  std::uint64_t hash_ = kFnvOffset;
  std::uint64_t dataplane_hash_ = kFnvOffset;
  std::string scratch_;

 public:
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;
  EventLog(EventLog&&) = default;
  EventLog& operator=(EventLog&&) = default;
};

/// JSON string escaping used by every artifact writer.
void append_json_string(std::string& out, std::string_view s);

} // namespace pointsim::telemetry
