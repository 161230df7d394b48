#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <queue>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace pointsim::sim {

/// Virtual time in integer microseconds. Floats never enter event ordering.
using Time = std::int64_t;
using Duration = std::int64_t;
using EventId = std::uint64_t;

constexpr Duration usec(std::int64_t v) { return v; }
constexpr Duration msec(std::int64_t v) { return v * 1000; }
constexpr Duration sec(std::int64_t v) { return v * 1'000'000; }

/// Serialization time of `bytes` over a link of `bits_per_second`, rounded up.
constexpr Duration transmission_time(std::int64_t bytes, std::int64_t bits_per_second)
{
  const std::int64_t bits = bytes * 8;
  return (bits * 1'000'000 + bits_per_second - 1) / bits_per_second;
}

/// Deterministic discrete-event scheduler.
///
/// Events fire in (fire_at, seq) order, where seq is the insertion counter;
/// ties on time therefore execute FIFO. The event id doubles as the seq.
class Scheduler {
 public:
  using Action = std::function<void()>;

  /// Throws std::invalid_argument on a negative delay.
  EventId schedule(Duration delay, Action action);
  EventId schedule_at(Time at, Action action);

  /// Returns false when the event already ran, was cancelled, or is unknown.
  bool cancel(EventId id);

  /// Executes every event with fire_at <= t_end, then parks the clock at t_end.
  std::size_t run_until(Time t_end);

  Time now() const noexcept { return now_; }
  std::size_t pending() const noexcept { return queue_.size() - cancelled_; }
  std::uint64_t executed() const noexcept { return executed_; }

 private:
  // Heap entries stay small; actions live in a slot table.
  struct Entry {
    Time at;
    EventId seq;
    std::uint32_t slot;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const noexcept
    {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };
  enum class Status : std::uint8_t { pending, cancelled, done };

  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::vector<Action> actions_;
  std::vector<std::uint32_t> free_slots_;
  // Indexed by seq - 1.
  std::vector<Status> status_;
  std::size_t cancelled_ = 0;
  Time now_ = 0;
  EventId next_seq_ = 1;
  std::uint64_t executed_ = 0;
};

/// One named random substream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

/// Named substreams derived from (master seed, label). Adding a consumer
/// with a new label never shifts the sequence seen by existing labels.
class RngStreams {
 public:
  explicit RngStreams(std::uint64_t master_seed) : master_(master_seed) {}

  RngStream& stream(std::string_view label);
  double draw(std::string_view label) { return stream(label).uniform(); }
  std::uint64_t master_seed() const noexcept { return master_; }

  static std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

 private:
  std::uint64_t master_;
  std::map<std::string, std::unique_ptr<RngStream>, std::less<>> streams_;
};

} // namespace pointsim::sim
