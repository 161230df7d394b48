#pragma once

#include "pointsim/event_log.hpp"
#include "pointsim/simkernel.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pointsim::telemetry {

struct Interval {
  sim::Time start = 0;
  sim::Time end = 0;
  sim::Duration length() const { return end - start; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Delivery gaps in a stream of arrivals observed over [active_start, active_end).
/// A gap between consecutive arrivals a < b counts when b - a > max_gap and
/// yields [a + nominal, b), the span in which a packet was due but missing.
/// A silent tail longer than max_gap yields [last + nominal, active_end).
/// No arrivals at all yields the whole active period. max_gap defaults to
/// twice the nominal interval.
std::vector<Interval> disruption_intervals(std::span<const sim::Time> arrivals, sim::Duration nominal,
                                           sim::Time active_start, sim::Time active_end,
                                           std::optional<sim::Duration> max_gap = std::nullopt);

/// Per-element monitoring agents. Probes are sampled on a fixed virtual-time
/// grid into the log's metric series; sampling never emits events.
class Agents {
 public:
  using Probe = std::function<std::int64_t()>;

  Agents(sim::Scheduler& scheduler, EventLog& log, sim::Duration interval, bool enabled);

  void add_probe(std::uint32_t element, std::string metric, Probe probe);
  /// Immediate sample at the current virtual time.
  void record(std::uint32_t element, std::string metric, std::int64_t value);
  /// Samples every interval in [0, until].
  void start(sim::Time until);

  bool enabled() const noexcept { return enabled_; }
  std::size_t probes() const noexcept { return probes_.size(); }

 private:
  void tick(sim::Time until);

  struct Entry {
    std::uint32_t element;
    std::string metric;
    Probe probe;
  };

  sim::Scheduler& scheduler_;
  EventLog& log_;
  sim::Duration interval_;
  bool enabled_;
  std::vector<Entry> probes_;
};

struct SummaryOptions {
  // Nominal packet interval per IPTV channel id.
  std::map<std::int64_t, sim::Duration> channel_interval;
  // End of the observation window for stream disruptions.
  sim::Time stream_end = 0;
};

using Summary = std::map<std::string, double>;

/// Recomputes every reported figure from the event log alone.
Summary summarize(const EventLog& log, const SummaryOptions& options);

/// Per-STB disruption intervals, keyed by element name.
std::map<std::string, std::vector<Interval>> stb_disruptions(const EventLog& log,
                                                             const SummaryOptions& options);

/// Number rendering used by summary files: integers exactly, others in
/// shortest round-trip form.
std::string format_value(double v);

/// Event lines followed by sample lines, one JSON object per line.
void write_jsonl(const EventLog& log, std::ostream& out);
/// Inverse of write_jsonl. Throws std::runtime_error naming the bad line.
EventLog read_jsonl(std::istream& in);

struct CsvSample {
  sim::Time at = 0;
  std::string element;
  std::string metric;
  std::int64_t value = 0;
  friend bool operator==(const CsvSample&, const CsvSample&) = default;
};

void write_metrics_csv(const EventLog& log, std::ostream& out);
std::vector<CsvSample> read_metrics_csv(std::istream& in);

enum class Format { jsonl, csv };

/// Throws std::runtime_error when the path cannot be written.
void export_log(const EventLog& log, const std::filesystem::path& path, Format format);
EventLog import_jsonl(const std::filesystem::path& path);

} // namespace pointsim::telemetry
