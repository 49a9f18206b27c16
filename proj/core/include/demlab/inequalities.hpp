#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace demlab {

struct AzumaParams {
    double C;         // almost-sure one-step bound
    std::int64_t m;   // number of steps
    double lambda;    // deviation
};

struct FreedmanParams {
    double C;       // one-sided one-step bound
    double b;       // variance budget
    double lambda;  // deviation
};

// P(Y_m - Y_0 >= lambda) <= exp(-lambda^2 / (2 C^2 m)), clamped to 1.
inline double azuma_bound(const AzumaParams& p) {
    if (p.C <= 0.0 || p.m <= 0 || p.lambda <= 0.0)
        throw std::invalid_argument("azuma_bound: parameters must be positive");
    double e = std::exp(-(p.lambda * p.lambda) / (2.0 * p.C * p.C * static_cast<double>(p.m)));
    return std::min(e, 1.0);
}

// P(exists m: V_m <= b and Y_m - Y_0 >= lambda) <= exp(-lambda^2 / (2(b + C lambda))).
inline double freedman_bound(const FreedmanParams& p) {
    if (p.C <= 0.0 || p.b < 0.0 || p.lambda <= 0.0)
        throw std::invalid_argument("freedman_bound: need C > 0, b >= 0, lambda > 0");
    double e = std::exp(-(p.lambda * p.lambda) / (2.0 * (p.b + p.C * p.lambda)));
    return std::min(e, 1.0);
}

// Fraction of final deviations >= lambda (inclusive).
inline double empirical_tail(const std::vector<double>& final_deviations, double lambda) {
    if (final_deviations.empty())
        throw std::invalid_argument("empirical_tail: empty sample");
    std::int64_t count = 0;
    for (double d : final_deviations)
        if (d >= lambda) ++count;
    return static_cast<double>(count) / static_cast<double>(final_deviations.size());
}

// Running sum of per-step conditional variances V_i.
class VarianceLedger {
public:
    void add(double step_variance) {
        if (step_variance < 0.0 || !std::isfinite(step_variance))
            throw std::invalid_argument("VarianceLedger: step variance must be >= 0");
        total_ += step_variance;
        entries_.push_back(step_variance);
    }

    double total() const { return total_; }
    const std::vector<double>& entries() const { return entries_; }

private:
    double total_ = 0.0;
    std::vector<double> entries_;
};

}  // namespace demlab
