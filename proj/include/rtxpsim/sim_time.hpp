#pragma once

#include <cstdint>

namespace rtxpsim {

// Simulation time in integer microseconds. All protocol durations in this
// project are exact multiples of the 200 us jamming code, so integer us
// arithmetic keeps phase boundaries exact across arbitrarily long runs.
using SimTime = std::int64_t;

constexpr SimTime operator""_us(unsigned long long v) { return static_cast<SimTime>(v); }
constexpr SimTime operator""_ms(unsigned long long v) { return static_cast<SimTime>(v) * 1000; }
constexpr SimTime operator""_s(unsigned long long v) { return static_cast<SimTime>(v) * 1000000; }

constexpr double to_ms(SimTime t) { return static_cast<double>(t) / 1000.0; }
constexpr double to_seconds(SimTime t) { return static_cast<double>(t) / 1000000.0; }

} // namespace rtxpsim
