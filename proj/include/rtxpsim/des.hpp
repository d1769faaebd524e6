#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "rtxpsim/sim_time.hpp"

namespace rtxpsim {

// Deterministic discrete-event core. Events fire in (time, insertion sequence)
// order, so simultaneous events dispatch FIFO and a replay with the same seeds
// produces a bit-identical trace.
class Simulator {
public:
  using Handler = std::function<void()>;

  SimTime now() const { return now_; }
  std::size_t dispatched() const { return dispatched_; }
  std::size_t pending() const { return heap_.size(); }

  // Scheduling in the past is a logic error; throws std::logic_error.
  void schedule_at(SimTime fire_at, Handler fn);
  void schedule_in(SimTime delay, Handler fn) { schedule_at(now_ + delay, std::move(fn)); }

  // Dispatches every event with fire_at <= t_end (including events scheduled
  // while draining), leaves the clock at t_end. Returns the dispatch count of
  // this call.
  std::size_t run_until(SimTime t_end);

private:
  struct Event {
    SimTime at;
    std::uint64_t seq;
    Handler fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  std::vector<Event> heap_;
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::size_t dispatched_ = 0;
};

} // namespace rtxpsim
