#pragma once

#include <compare>
#include <cstdint>

namespace stormsim {

/// Milliseconds since scenario start. Every algorithm and simulator timestamp
/// uses this clock; wall time never reaches the algorithms.
struct SimTime {
    std::int64_t ms = 0;

    constexpr auto operator<=>(const SimTime&) const = default;

    friend constexpr SimTime operator+(SimTime t, std::int64_t delta_ms) {
        return SimTime{t.ms + delta_ms};
    }
    /// Elapsed milliseconds between two instants.
    friend constexpr std::int64_t operator-(SimTime a, SimTime b) { return a.ms - b.ms; }
};

}  // namespace stormsim
