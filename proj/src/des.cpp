#include "rtxpsim/des.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace rtxpsim {

void Simulator::schedule_at(SimTime fire_at, Handler fn) {
  if (fire_at < now_) {
    throw std::logic_error("Simulator::schedule_at: event at t=" + std::to_string(fire_at) +
                           " is in the past (clock=" + std::to_string(now_) + ")");
  }
  heap_.push_back(Event{fire_at, next_seq_++, std::move(fn)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
}

std::size_t Simulator::run_until(SimTime t_end) {
  if (t_end < now_) {
    throw std::logic_error("Simulator::run_until: horizon before current clock");
  }
  std::size_t count = 0;
  while (!heap_.empty() && heap_.front().at <= t_end) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Event ev = std::move(heap_.back());
    heap_.pop_back();
    now_ = ev.at; // heap order guarantees monotone clock
    ev.fn();
    ++dispatched_;
    ++count;
  }
  now_ = t_end;
  return count;
}

} // namespace rtxpsim
