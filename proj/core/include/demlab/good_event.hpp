#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "demlab/clock.hpp"
#include "demlab/envelope.hpp"
#include "demlab/series.hpp"

namespace demlab {

struct EnvelopeViolation {
    std::string series_id;
    std::int64_t step = 0;
    double exceedance = 0.0;  // signed distance past the violated bound
};

// Checks that every series value at the clock's current step lies inside
// its envelope. Returns the first violating series, or nullopt.
inline std::optional<EnvelopeViolation> check_good_event(
    const std::vector<TrackedSeries>& series, const std::vector<Trajectory>& trajectories,
    const Envelope& env, const SimClock& clock) {
    if (series.size() != trajectories.size())
        throw std::invalid_argument("check_good_event: series/trajectory count mismatch");
    double t = clock.t();
    for (std::size_t s = 0; s < series.size(); ++s) {
        double value = series[s].at(clock.i);
        double lo = env.lo(trajectories[s], t);
        double hi = env.hi(trajectories[s], t);
        if (value < lo) return EnvelopeViolation{series[s].id, clock.i, value - lo};
        if (value > hi) return EnvelopeViolation{series[s].id, clock.i, value - hi};
    }
    return std::nullopt;
}

}  // namespace demlab
