#include "pointsim/simkernel.hpp"

#include "pointsim/hash.hpp"

#include <limits>
#include <stdexcept>

namespace pointsim::sim {

EventId
Scheduler::schedule(Duration delay, Action action)
{
  if (delay < 0) {
    throw std::invalid_argument("Scheduler::schedule: negative delay");
  }
  return schedule_at(now_ + delay, std::move(action));
}

EventId
Scheduler::schedule_at(Time at, Action action)
{
  if (at < now_) {
    throw std::invalid_argument("Scheduler::schedule_at: time is in the past");
  }
  const EventId id = next_seq_++;
  std::uint32_t slot = 0;
  if (free_slots_.empty()) {
    slot = static_cast<std::uint32_t>(actions_.size());
    actions_.push_back(std::move(action));
  }
  else {
    slot = free_slots_.back();
    free_slots_.pop_back();
    actions_[slot] = std::move(action);
  }
  queue_.push(Entry{at, id, slot});
  status_.push_back(Status::pending);
  return id;
}

bool
Scheduler::cancel(EventId id)
{
  if (id == 0 || id >= next_seq_ || status_[id - 1] != Status::pending) {
    return false;
  }
  status_[id - 1] = Status::cancelled;
  ++cancelled_;
  return true;
}

std::size_t
Scheduler::run_until(Time t_end)
{
  if (t_end < now_) {
    throw std::invalid_argument("Scheduler::run_until: bound is before now");
  }
  std::size_t count = 0;
  while (!queue_.empty() && queue_.top().at <= t_end) {
    const Entry entry = queue_.top();
    queue_.pop();
    Action action = std::move(actions_[entry.slot]);
    actions_[entry.slot] = nullptr;
    free_slots_.push_back(entry.slot);
    auto& st = status_[entry.seq - 1];
    if (st == Status::cancelled) {
      st = Status::done;
      --cancelled_;
      continue;
    }
    st = Status::done;
    now_ = entry.at;
    action();
    ++count;
    ++executed_;
  }
  now_ = t_end;
  return count;
}

std::uint64_t
RngStream::below(std::uint64_t bound)
{
  if (bound == 0) {
    throw std::invalid_argument("RngStream::below: zero bound");
  }
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v = 0;
  do {
    v = engine_();
  } while (v >= limit);
  return v % bound;
}

std::uint64_t
RngStreams::derive_seed(std::uint64_t master, std::string_view label)
{
  std::uint64_t state = master ^ fnv1a64(label);
  return splitmix64(state);
}

RngStream&
RngStreams::stream(std::string_view label)
{
  auto it = streams_.find(label);
  if (it == streams_.end()) {
    it = streams_.emplace(std::string(label),
                          std::make_unique<RngStream>(derive_seed(master_, label))).first;
  }
  return *it->second;
}

} // namespace pointsim::sim
