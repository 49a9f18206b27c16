#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "demlab/rng.hpp"
#include "demlab/run_types.hpp"

namespace demlab::er {

// Erdős–Rényi edge-addition process with union-find component tracking.
struct ComponentState {
    std::int64_t n = 0;
    std::int64_t i = 0;  // edges added
    std::vector<std::int32_t> parent;
    std::vector<std::int32_t> size;
    std::vector<std::int64_t> histogram;  // histogram[k] = #components of size k
    std::int64_t components = 0;
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;  // u < v
    std::unordered_set<std::uint64_t> edge_keys;
    Xoshiro256ss rng;

    ComponentState(std::int64_t n_, std::uint64_t seed);

    std::int32_t find(std::int32_t v);
    std::int64_t count(int k) const {
        return k >= 1 && k < static_cast<int>(histogram.size()) ? histogram[k] : 0;
    }
    bool has_edge(std::int32_t u, std::int32_t v) const;
    std::int64_t max_edges() const { return n * (n - 1) / 2; }
    void audit();
};

ComponentState init(std::int64_t n, std::uint64_t seed);

// Adds one edge chosen uniformly from the missing edges. Returns true if the
// edge merged two components.
bool step(ComponentState& state);

// Main term of the conditional drift of Y_k:
//   -2k Y_k / n + sum_{j=1}^{k-1} j(k-j) (Y_j/n)(Y_{k-j}/n)
double formula_drift(const ComponentState& state, int k);

// Exact conditional expectation of dY_k by enumeration over all missing
// edges (small n only).
double exact_drift_oracle(ComponentState& state, int k);

struct RunParams {
    std::int64_t n;
    double c;
    int kappa = 4;
    std::uint64_t seed = 0;
    std::int64_t stride = 1;
    bool check_drift = false;
};

RunResult run(const RunParams& params);

}  // namespace demlab::er
