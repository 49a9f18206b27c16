#pragma once

#include <cstdint>
#include <vector>

#include "demlab/rng.hpp"
#include "demlab/run_types.hpp"
#include "demlab/trajectories.hpp"

namespace demlab::bb {

// Exact state of the balls-and-bins process: n bins, i balls placed.
struct BallsBinsState {
    std::int64_t n = 0;
    std::int64_t i = 0;
    std::vector<std::uint32_t> loads;     // per-bin ball counts
    std::vector<std::int64_t> histogram;  // histogram[l] = #bins with load l
    Xoshiro256ss rng;

    explicit BallsBinsState(std::int64_t n_, std::uint64_t seed);

    std::int64_t count(int k) const {
        return k >= 0 && k < static_cast<int>(histogram.size()) ? histogram[k] : 0;
    }

    // Audits histogram against the per-bin loads; throws on mismatch.
    void audit() const;
};

BallsBinsState init(std::int64_t n, std::uint64_t seed);

// Place one ball into a uniformly random bin.
void step(BallsBinsState& state);

// Exact conditional expectation of the one-step change of X_k:
// (X_{k-1} - X_k)/n with X_{-1} = 0.
double exact_drift(const BallsBinsState& state, int k);

enum class EnvelopeVariant { Basic, SelfCorrect };

struct RunParams {
    std::int64_t n;
    std::int64_t m;
    int kappa = 4;
    EnvelopeVariant variant = EnvelopeVariant::SelfCorrect;
    double alpha = 0.1;  // self-correct only
    std::uint64_t seed = 0;
    std::int64_t stride = 1;
    bool check_drift = false;  // assert supermartingale drift signs along the path
};

// Maximum m for which the variant's envelope argument applies.
std::int64_t horizon_limit(std::int64_t n, EnvelopeVariant variant, double alpha);

// Runs m steps tracking X_0..X_kappa against their trajectories, with the
// frozen +- transforms, per-step good-event checks, and (self-correct)
// critical-interval monitoring.
RunResult run(const RunParams& params);

}  // namespace demlab::bb
