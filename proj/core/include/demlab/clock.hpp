#pragma once

#include <cstdint>
#include <stdexcept>

namespace demlab {

// Discrete process clock: step i out of a horizon of m steps, continuous
// time t = i/n.
struct SimClock {
    std::int64_t i = 0;
    std::int64_t n = 1;
    std::int64_t horizon = 0;

    SimClock() = default;
    SimClock(std::int64_t n_, std::int64_t horizon_) : i(0), n(n_), horizon(horizon_) {
        if (n <= 0) throw std::invalid_argument("SimClock: n must be positive");
        if (horizon < 0) throw std::invalid_argument("SimClock: negative horizon");
    }

    double t() const { return static_cast<double>(i) / static_cast<double>(n); }
    double t_at(std::int64_t step) const {
        return static_cast<double>(step) / static_cast<double>(n);
    }

    void advance() {
        if (i >= horizon)
            throw std::invalid_argument("SimClock: horizon exceeded");
        ++i;
    }
};

}  // namespace demlab
