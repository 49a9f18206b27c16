#pragma once

#include <functional>
#include <optional>
#include <stdexcept>

namespace demlab {

// Deterministic trajectory t -> x(t) a tracked variable concentrates around.
struct Trajectory {
    std::function<double(double)> value;
    double operator()(double t) const { return value(t); }
};

// Error band around a trajectory. The tracked variable is expected to stay
// inside [scale*(x(t)-eps(t)), scale*(x(t)+eps(t))]. delta, when present,
// marks the inner boundary of the critical interval.
struct Envelope {
    std::function<double(double)> epsilon;
    std::function<double(double)> delta;  // may be empty
    double scale = 1.0;

    bool has_delta() const { return static_cast<bool>(delta); }

    double lo(const Trajectory& traj, double t) const {
        return scale * (traj(t) - epsilon(t));
    }
    double hi(const Trajectory& traj, double t) const {
        return scale * (traj(t) + epsilon(t));
    }

    // delta(t) <= epsilon(t) must hold over the horizon; checked on a grid.
    void validate(double t_max, int grid = 1000) const {
        if (!has_delta()) return;
        for (int g = 0; g <= grid; ++g) {
            double t = t_max * static_cast<double>(g) / grid;
            double d = delta(t), e = epsilon(t);
            if (!(d > 0.0) || d > e)
                throw std::invalid_argument("Envelope: need 0 < delta(t) <= epsilon(t)");
        }
    }
};

}  // namespace demlab
