#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "demlab/clock.hpp"
#include "demlab/envelope.hpp"

namespace demlab {

// Tracks entries into the critical interval
//   I(t) = [scale*(x(t)+delta(t)), scale*(x(t)+epsilon(t))].
// Records the step j at which the series last entered I from below and
// clears it when the series drops back under the delta boundary.
class CriticalIntervalMonitor {
public:
    CriticalIntervalMonitor(Trajectory traj, Envelope env)
        : traj_(std::move(traj)), env_(std::move(env)) {
        if (!env_.has_delta())
            throw std::invalid_argument("CriticalIntervalMonitor: envelope needs delta");
    }

    void observe(double value, const SimClock& clock) {
        double t = clock.t();
        double inner = env_.scale * (traj_(t) + env_.delta(t));
        double outer = env_.scale * (traj_(t) + env_.epsilon(t));
        if (value < inner) {
            in_interval_ = false;
            entry_step_.reset();
        } else if (value <= outer) {
            if (!in_interval_) {
                in_interval_ = true;
                entry_step_ = clock.i;
                ++entry_count_;
            }
        }
        // above the outer bound: envelope violation, handled by the good
        // event check; the recorded entry step is kept for reporting
    }

    bool in_interval() const { return in_interval_; }
    std::optional<std::int64_t> entry_step() const { return entry_step_; }
    std::int64_t entry_count() const { return entry_count_; }

private:
    Trajectory traj_;
    Envelope env_;
    bool in_interval_ = false;
    std::optional<std::int64_t> entry_step_;
    std::int64_t entry_count_ = 0;
};

}  // namespace demlab
