#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "demlab/inequalities.hpp"
#include "demlab/rng.hpp"
#include "demlab/run_types.hpp"
#include "demlab/transform.hpp"

namespace demlab::gm {

// Simple d-regular graph. Adjacency is stored flat: neighbors of v are
// adj[v*d .. v*d+d), with matching edge ids in adj_edge.
struct RegularGraph {
    std::int64_t n = 0;
    int d = 0;
    std::vector<std::int32_t> adj;
    std::vector<std::int32_t> adj_edge;
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;  // u < v

    std::int64_t edge_count() const { return static_cast<std::int64_t>(edges.size()); }

    // Checks d-regularity, simplicity, and adjacency/edge consistency.
    void audit() const;
};

RegularGraph build_from_edges(std::int64_t n, int d,
                              std::vector<std::pair<std::int32_t, std::int32_t>> edges);

// Deterministic circulant construction: v ~ v +- 1..floor(d/2), plus the
// antipode v + n/2 when d is odd.
RegularGraph gen_circulant(std::int64_t n, int d);

// Configuration model with random switch repairs; simple and d-regular, but
// not claimed uniform.
RegularGraph gen_pairing(std::int64_t n, int d, std::uint64_t seed);

// Plain-text graph format: "n d" then one "u v" line per edge,
// lexicographically sorted, 0-based.
void write_graph(const RegularGraph& graph, const std::string& path);
RegularGraph read_graph(const std::string& path);

// State of the random greedy matching process.
struct MatchingState {
    const RegularGraph* graph = nullptr;
    std::int64_t i = 0;  // |M|
    std::vector<std::pair<std::int32_t, std::int32_t>> matching;
    std::vector<std::uint8_t> matched;
    std::vector<std::int32_t> deg;        // D_v = unmatched neighbors, for all v
    std::vector<std::int64_t> deg_hist;   // counts per D value, over all v
    std::int32_t deg_min = 0, deg_max = 0;
    std::vector<std::int32_t> alive;      // edge ids with both endpoints unmatched
    std::vector<std::int32_t> alive_pos;  // edge id -> index in alive, -1 if dead
    Xoshiro256ss rng;

    MatchingState(const RegularGraph& g, std::uint64_t seed);

    std::int64_t alive_count() const { return static_cast<std::int64_t>(alive.size()); }
    std::int64_t unmatched_count() const { return graph->n - 2 * i; }
    void refresh_deg_bounds();
    void audit() const;
};

// One greedy step: a uniformly random alive edge joins the matching.
// Returns false when no alive edge remains (normal halt).
bool match_step(MatchingState& state);

// Exact conditional expectation of dD_v:
//   -(sum of D_u over unmatched neighbors u of v) / alive_count
double exact_drift(const MatchingState& state, std::int32_t v);

// Crude per-step variance bound C * (E[|dD_v|] + |trajectory shift|), with
// E[|dD_v|] = (x_1 + 2 x_2)/|E(i)| computed exactly from the edge classes.
double variance_step(const MatchingState& state, std::int32_t v, double shift_abs,
                     double increment_bound);

struct RunParams {
    double K = 2.0;
    std::uint64_t seed = 0;
    std::int64_t stride = 1;
    bool check_drift = false;
    int drift_sample = 4;  // vertices sampled per step for exact drift checks
};

// Transform increment bound used for the Freedman bookkeeping.
inline constexpr double kIncrementBound = 5.0;

RunResult match_run(const RegularGraph& graph, const RunParams& params);

}  // namespace demlab::gm
