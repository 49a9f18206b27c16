#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "demlab/good_event.hpp"

namespace demlab {

// One recorded row of a tracked variable's trace, matching the time-series
// file schema.
struct TraceRow {
    std::int64_t step;
    double t;
    double value;
    double traj;  // scale * trajectory
    double lo;    // scale * (trajectory - eps)
    double hi;    // scale * (trajectory + eps)
};

struct MartingaleTrace {
    std::string var;
    std::vector<TraceRow> rows;
    double final_value = 0.0;
    double final_transform_plus = 0.0;
    double final_transform_minus = 0.0;
    std::optional<std::int64_t> frozen_plus_at;
    std::optional<std::int64_t> frozen_minus_at;
};

struct DriftCheckSummary {
    std::int64_t checks = 0;
    std::int64_t failures = 0;
    double worst_margin = 0.0;  // most positive supermartingale margin seen
};

struct RunResult {
    std::vector<MartingaleTrace> traces;
    std::optional<EnvelopeViolation> violation;
    double max_dev_ratio = 0.0;  // max over steps/vars of |X - scale*x| / (scale*eps)
    std::map<std::string, double> finals;
    DriftCheckSummary drift;
    // process-specific extras
    std::map<std::string, double> stats;
};

}  // namespace demlab
