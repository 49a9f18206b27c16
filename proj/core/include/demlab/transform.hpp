#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "demlab/clock.hpp"
#include "demlab/envelope.hpp"

namespace demlab {

enum class Sign { Plus, Minus };

// Frozen super/submartingale transform of a tracked variable:
//   X^+-(i) = X(i) - scale*(x(t_i) +- eps(t_i))   while the good event held
//             at step i-1, and constant from the first failure onward.
class MartingaleTransform {
public:
    MartingaleTransform(Sign sign, Trajectory traj, Envelope env)
        : sign_(sign), traj_(std::move(traj)), env_(std::move(env)) {}

    // Advance to the next step. good_event_held_last_step refers to the
    // event E_{i-1}; E_{-1} holds trivially, so step 0 always evaluates
    // the raw transform.
    double step(double new_value, const SimClock& clock, bool good_event_held_last_step) {
        double v;
        if (frozen_at_ || !good_event_held_last_step) {
            if (!frozen_at_) frozen_at_ = clock.i;
            v = values_.empty() ? 0.0 : values_.back();
        } else {
            v = raw(new_value, clock.t());
        }
        values_.push_back(v);
        return v;
    }

    double raw(double value, double t) const {
        double band = (sign_ == Sign::Plus) ? env_.epsilon(t) : -env_.epsilon(t);
        return value - env_.scale * (traj_(t) + band);
    }

    Sign sign() const { return sign_; }
    bool frozen() const { return frozen_at_.has_value(); }
    std::optional<std::int64_t> frozen_at() const { return frozen_at_; }
    double current() const { return values_.back(); }
    const std::vector<double>& values() const { return values_; }
    const Envelope& envelope() const { return env_; }

private:
    Sign sign_;
    Trajectory traj_;
    Envelope env_;
    std::optional<std::int64_t> frozen_at_;
    std::vector<double> values_;
};

// Memory-light variant keeping only the current value; used inside long runs.
class RunningTransform {
public:
    RunningTransform(Sign sign, double scale) : sign_(sign), scale_(scale) {}

    double step(double new_value, double traj, double eps, bool good_event_held_last_step,
                std::int64_t step_index) {
        if (frozen_at_ >= 0 || !good_event_held_last_step) {
            if (frozen_at_ < 0) frozen_at_ = step_index;
            return value_;
        }
        double band = (sign_ == Sign::Plus) ? eps : -eps;
        value_ = new_value - scale_ * (traj + band);
        return value_;
    }

    double current() const { return value_; }
    bool frozen() const { return frozen_at_ >= 0; }
    std::int64_t frozen_at() const { return frozen_at_; }

private:
    Sign sign_;
    double scale_;
    double value_ = 0.0;
    std::int64_t frozen_at_ = -1;
};

}  // namespace demlab
