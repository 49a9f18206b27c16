#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace demlab {

// Per-step record of one tracked variable. One value per step, no gaps.
struct TrackedSeries {
    std::string id;
    std::vector<double> values;
    std::vector<double> drifts;  // optional exact conditional drifts

    void record(std::int64_t step, double value) {
        if (step != static_cast<std::int64_t>(values.size()))
            throw std::invalid_argument("TrackedSeries: non-contiguous step");
        values.push_back(value);
    }

    double at(std::int64_t step) const { return values.at(static_cast<std::size_t>(step)); }
    std::int64_t last_step() const { return static_cast<std::int64_t>(values.size()) - 1; }
};

}  // namespace demlab
