#include "demlab/matching.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace demlab::gm {

namespace {
std::uint64_t pair_key(std::int64_t n, std::int32_t u, std::int32_t v) {
    if (u > v) std::swap(u, v);
    return static_cast<std::uint64_t>(u) * static_cast<std::uint64_t>(n) +
           static_cast<std::uint64_t>(v);
}
}  // namespace

void RegularGraph::audit() const {
    std::vector<int> degree(n, 0);
    // edges are kept sorted with u < v, so duplicates are adjacent
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [u, v] = edges[i];
        if (u >= v) throw std::runtime_error("RegularGraph: loop or unnormalized edge");
        if (u < 0 || v >= n) throw std::runtime_error("RegularGraph: vertex out of range");
        if (i > 0 && !(edges[i - 1] < edges[i]))
            throw std::runtime_error("RegularGraph: repeated or unsorted edge");
        ++degree[u];
        ++degree[v];
    }
    for (std::int32_t v = 0; v < n; ++v)
        if (degree[v] != d) throw std::runtime_error("RegularGraph: not d-regular");
    if (static_cast<std::int64_t>(edges.size()) != n * d / 2)
        throw std::runtime_error("RegularGraph: bad edge count");
}

RegularGraph build_from_edges(std::int64_t n, int d,
                              std::vector<std::pair<std::int32_t, std::int32_t>> edges) {
    RegularGraph g;
    g.n = n;
    g.d = d;
    for (auto& [u, v] : edges)
        if (u > v) std::swap(u, v);
    std::sort(edges.begin(), edges.end());
    g.edges = std::move(edges);
    g.adj.assign(static_cast<std::size_t>(n) * d, -1);
    g.adj_edge.assign(static_cast<std::size_t>(n) * d, -1);
    std::vector<int> fill(n, 0);
    for (std::int32_t e = 0; e < static_cast<std::int32_t>(g.edges.size()); ++e) {
        auto [u, v] = g.edges[e];
        g.adj[static_cast<std::size_t>(u) * d + fill[u]] = v;
        g.adj_edge[static_cast<std::size_t>(u) * d + fill[u]++] = e;
        g.adj[static_cast<std::size_t>(v) * d + fill[v]] = u;
        g.adj_edge[static_cast<std::size_t>(v) * d + fill[v]++] = e;
    }
    g.audit();
    return g;
}

RegularGraph gen_circulant(std::int64_t n, int d) {
    if (d <= 0 || d >= n || (n * d) % 2 != 0 || (d % 2 == 1 && n % 2 != 0))
        throw std::invalid_argument("gen_circulant: infeasible (n, d)");
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    // each offset 1..floor(d/2) contributes one edge per vertex in the +off
    // direction; with d < n these are all distinct
    for (std::int32_t v = 0; v < n; ++v) {
        for (int off = 1; off <= d / 2; ++off) {
            std::int32_t u = static_cast<std::int32_t>((v + off) % n);
            edges.emplace_back(v, u);
        }
    }
    if (d % 2 == 1)
        for (std::int32_t v = 0; v < n / 2; ++v)
            edges.emplace_back(v, static_cast<std::int32_t>(v + n / 2));
    return build_from_edges(n, d, std::move(edges));
}

RegularGraph gen_pairing(std::int64_t n, int d, std::uint64_t seed) {
    if (d <= 0 || d >= n || (n * d) % 2 != 0)
        throw std::invalid_argument("gen_pairing: infeasible (n, d)");
    Xoshiro256ss rng(seed);
    const std::int64_t points = n * d;

    // A run of unlucky switch proposals (or a wedged tiny instance) can
    // exhaust the budget; start over with a fresh pairing when that happens.
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<std::int32_t> perm(points);
        for (std::int64_t p = 0; p < points; ++p)
            perm[p] = static_cast<std::int32_t>(p / d);  // owner vertex of each half-edge
        // Fisher-Yates over the half-edge owners, then pair consecutive entries
        for (std::int64_t p = points - 1; p > 0; --p) {
            auto q = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(p + 1)));
            std::swap(perm[p], perm[q]);
        }
        std::vector<std::pair<std::int32_t, std::int32_t>> edges;
        edges.reserve(points / 2);
        for (std::int64_t p = 0; p < points; p += 2) edges.emplace_back(perm[p], perm[p + 1]);

        // repair loops and multi-edges by random degree-preserving switchings;
        // multiplicities come from a sorted key list plus a small delta map so
        // the common path avoids hashing millions of entries
        std::vector<std::uint64_t> base_keys;
        base_keys.reserve(edges.size());
        for (auto& e : edges)
            if (e.first != e.second) base_keys.push_back(pair_key(n, e.first, e.second));
        std::sort(base_keys.begin(), base_keys.end());
        std::unordered_map<std::uint64_t, int> delta;  // changes made by switches
        auto mult_of = [&](std::uint64_t key) {
            auto range = std::equal_range(base_keys.begin(), base_keys.end(), key);
            int m = static_cast<int>(range.second - range.first);
            auto it = delta.find(key);
            return it == delta.end() ? m : m + it->second;
        };
        auto is_bad = [&](std::pair<std::int32_t, std::int32_t> e) {
            return e.first == e.second || mult_of(pair_key(n, e.first, e.second)) > 1;
        };
        std::vector<std::size_t> bad;
        for (std::size_t idx = 0; idx < edges.size(); ++idx)
            if (is_bad(edges[idx])) bad.push_back(idx);

        std::int64_t budget = 10 * n * d + 1000;
        while (!bad.empty() && budget > 0) {
            --budget;
            std::size_t bi = bad.back();
            if (!is_bad(edges[bi])) {  // repaired as a side effect of an earlier switch
                bad.pop_back();
                continue;
            }
            auto oi = static_cast<std::size_t>(rng.next_below(edges.size()));
            if (oi == bi) continue;
            auto [u, v] = edges[bi];
            auto [x, y] = edges[oi];
            // propose (u,v),(x,y) -> (u,x),(v,y)
            if (u == x || v == y) continue;
            if (mult_of(pair_key(n, u, x)) > 0 || mult_of(pair_key(n, v, y)) > 0) continue;
            if (u != v) --delta[pair_key(n, u, v)];
            if (x != y) --delta[pair_key(n, x, y)];
            edges[bi] = {u, x};
            edges[oi] = {v, y};
            ++delta[pair_key(n, u, x)];
            ++delta[pair_key(n, v, y)];
            if (is_bad(edges[oi])) bad.push_back(oi);
        }
        if (bad.empty()) return build_from_edges(n, d, std::move(edges));
    }
    throw std::runtime_error("gen_pairing: could not reach a simple graph");
}

void write_graph(const RegularGraph& graph, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_graph: cannot open " + path);
    out << graph.n << " " << graph.d << "\n";
    for (auto [u, v] : graph.edges) out << u << " " << v << "\n";
    if (!out) throw std::runtime_error("write_graph: write failed");
}

RegularGraph read_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_graph: cannot open " + path);
    std::int64_t n;
    int d;
    if (!(in >> n >> d)) throw std::runtime_error("read_graph: bad header");
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    std::int32_t u, v;
    while (in >> u >> v) edges.emplace_back(u, v);
    return build_from_edges(n, d, std::move(edges));
}

MatchingState::MatchingState(const RegularGraph& g, std::uint64_t seed)
    : graph(&g),
      matched(g.n, 0),
      deg(g.n, g.d),
      deg_hist(g.d + 1, 0),
      deg_min(g.d),
      deg_max(g.d),
      alive_pos(g.edge_count(), -1),
      rng(seed) {
    deg_hist[g.d] = g.n;
    alive.resize(g.edge_count());
    for (std::int32_t e = 0; e < g.edge_count(); ++e) {
        alive[e] = e;
        alive_pos[e] = e;
    }
}

void MatchingState::refresh_deg_bounds() {
    deg_min = graph->d;
    deg_max = 0;
    for (std::int32_t x = 0; x <= graph->d; ++x) {
        if (deg_hist[x] == 0) continue;
        deg_min = std::min(deg_min, x);
        deg_max = std::max(deg_max, x);
    }
}

void MatchingState::audit() const {
    const auto& g = *graph;
    std::int64_t handshake = 0;
    for (std::int32_t v = 0; v < g.n; ++v) {
        std::int32_t cnt = 0;
        for (int j = 0; j < g.d; ++j)
            if (!matched[g.adj[static_cast<std::size_t>(v) * g.d + j]]) ++cnt;
        if (cnt != deg[v]) throw std::runtime_error("matching: degree bookkeeping broken");
        if (!matched[v]) handshake += deg[v];
    }
    if (handshake != 2 * alive_count())
        throw std::runtime_error("matching: handshake identity broken");
    std::vector<std::uint8_t> used(g.n, 0);
    for (auto [u, v] : matching) {
        if (used[u] || used[v]) throw std::runtime_error("matching: overlapping edges");
        used[u] = used[v] = 1;
    }
    if (static_cast<std::int64_t>(matching.size()) != i)
        throw std::runtime_error("matching: size out of sync");
}

bool match_step(MatchingState& state) {
    if (state.alive.empty()) return false;
    const auto& g = *state.graph;
    auto idx = static_cast<std::size_t>(state.rng.next_below(state.alive.size()));
    std::int32_t e = state.alive[idx];
    auto [a, b] = g.edges[e];
    state.matching.emplace_back(a, b);
    state.matched[a] = 1;
    state.matched[b] = 1;
    ++state.i;

    auto lower_deg = [&](std::int32_t u) {
        --state.deg_hist[state.deg[u]];
        --state.deg[u];
        ++state.deg_hist[state.deg[u]];
        if (state.deg[u] < state.deg_min) state.deg_min = state.deg[u];
    };
    auto remove_alive = [&](std::int32_t eid) {
        std::int32_t pos = state.alive_pos[eid];
        if (pos < 0) return;
        std::int32_t last = state.alive.back();
        state.alive[pos] = last;
        state.alive_pos[last] = pos;
        state.alive.pop_back();
        state.alive_pos[eid] = -1;
    };
    for (std::int32_t x : {a, b}) {
        const std::size_t base = static_cast<std::size_t>(x) * g.d;
        for (int j = 0; j < g.d; ++j) {
            lower_deg(g.adj[base + j]);
            remove_alive(g.adj_edge[base + j]);
        }
    }
    // deg_max can only shrink
    while (state.deg_max > 0 && state.deg_hist[state.deg_max] == 0) --state.deg_max;
    while (state.deg_min < state.deg_max && state.deg_hist[state.deg_min] == 0) ++state.deg_min;
    return true;
}

double exact_drift(const MatchingState& state, std::int32_t v) {
    if (state.alive.empty()) throw std::runtime_error("exact_drift: no alive edges");
    const auto& g = *state.graph;
    std::int64_t num = 0;
    const std::size_t base = static_cast<std::size_t>(v) * g.d;
    for (int j = 0; j < g.d; ++j) {
        std::int32_t u = g.adj[base + j];
        if (!state.matched[u]) num += state.deg[u];
    }
    return -static_cast<double>(num) / static_cast<double>(state.alive_count());
}

double variance_step(const MatchingState& state, std::int32_t v, double shift_abs,
                     double increment_bound) {
    const auto& g = *state.graph;
    if (state.alive.empty()) return 0.0;
    std::unordered_set<std::int32_t> nbhd;
    const std::size_t base = static_cast<std::size_t>(v) * g.d;
    for (int j = 0; j < g.d; ++j) {
        std::int32_t u = g.adj[base + j];
        if (!state.matched[u]) nbhd.insert(u);
    }
    // classify alive edges by how many endpoints lie in N_{G(i)}(v)
    std::int64_t x1 = 0, x2 = 0;
    for (std::int32_t eid : state.alive) {
        auto [p, q] = g.edges[eid];
        int k = static_cast<int>(nbhd.count(p)) + static_cast<int>(nbhd.count(q));
        if (k == 1) ++x1;
        if (k == 2) ++x2;
    }
    double mean_abs =
        static_cast<double>(x1 + 2 * x2) / static_cast<double>(state.alive_count());
    return increment_bound * (mean_abs + shift_abs);
}

RunResult match_run(const RegularGraph& graph, const RunParams& params) {
    if (params.K <= 0.0) throw std::invalid_argument("match_run: K must be positive");
    graph.audit();
    const std::int64_t n = graph.n;
    const int d = graph.d;
    const double dn = static_cast<double>(n);
    const double s = params.K * std::sqrt(static_cast<double>(d) * std::log(dn));
    const double sd = s / static_cast<double>(d);
    const double alpha = std::pow(sd, 0.1);
    const double p_cutoff = std::pow(sd, 0.2);

    MatchingState state(graph, params.seed);
    const std::int32_t v0 = 0;  // tracked vertex for the transform and ledger

    RunResult result;
    result.traces.resize(3);
    result.traces[0].var = "D_min";
    result.traces[1].var = "D_max";
    result.traces[2].var = "D_v0";

    RunningTransform plus(Sign::Plus, 1.0), minus(Sign::Minus, 1.0);
    VarianceLedger ledger;
    bool good_so_far = true;
    DriftCheckSummary drift;
    bool running = true;

    auto eps_at = [&](double p) {
        double p2 = p * p;
        return s / (p2 * p2);
    };

    for (std::int64_t i = 0; running; ++i) {
        double t = static_cast<double>(i) / dn;
        double p = 1.0 - 2.0 * t;
        double dp = d * p;
        bool have_eps = p > 0.0;
        double eps = have_eps ? eps_at(p) : 0.0;
        bool active = p > p_cutoff;

        if (active) {
            double lo = dp - eps, hi = dp + eps;
            bool violated_now = state.deg_min < lo || state.deg_max > hi;
            plus.step(static_cast<double>(state.deg[v0]), dp, eps, good_so_far, i);
            minus.step(static_cast<double>(state.deg[v0]), dp, eps, good_so_far, i);
            if (violated_now && !result.violation) {
                double vmin = static_cast<double>(state.deg_min);
                double vmax = static_cast<double>(state.deg_max);
                result.violation = EnvelopeViolation{
                    vmax > hi ? "D_max" : "D_min", i, vmax > hi ? vmax - hi : vmin - lo};
            }
            double dev = std::max(std::abs(state.deg_min - dp), std::abs(state.deg_max - dp));
            if (dev / eps > result.max_dev_ratio) result.max_dev_ratio = dev / eps;
            if (violated_now) good_so_far = false;
        }

        if (i % params.stride == 0) {
            double lo = have_eps ? dp - eps : dp;
            double hi = have_eps ? dp + eps : dp;
            result.traces[0].rows.push_back({i, t, static_cast<double>(state.deg_min), dp, lo, hi});
            result.traces[1].rows.push_back({i, t, static_cast<double>(state.deg_max), dp, lo, hi});
            result.traces[2].rows.push_back({i, t, static_cast<double>(state.deg[v0]), dp, lo, hi});
        }

        if (state.alive.empty()) break;

        // Freedman bookkeeping for the tracked vertex: the crude variance
        // bound C * (E[|dD_v|] + |shift of dp + eps over one step|)
        double drift_v0 = exact_drift(state, v0);
        {
            double shift_abs = 0.0;
            double p_next = 1.0 - 2.0 * (static_cast<double>(i + 1) / dn);
            if (have_eps && p_next > 0.0)
                shift_abs = std::abs((d * p_next + eps_at(p_next)) - (dp + eps));
            ledger.add(kIncrementBound * (std::abs(drift_v0) + shift_abs));
        }

        if (params.check_drift && active && good_so_far) {
            double lo = dp - eps, hi = dp + eps;
            if (lo > 0.0) {
                double rhs = -(lo * lo) / (0.5 * dn * p * hi);
                // structural part, valid for every vertex at once
                drift.checks += 1;
                if (2.0 * static_cast<double>(state.alive_count()) > dn * p * hi + 1e-9)
                    ++drift.failures;
                for (int j = 0; j < params.drift_sample; ++j) {
                    auto v = static_cast<std::int32_t>(
                        (i * params.drift_sample + j) % n);
                    if (state.deg[v] <= 0) continue;
                    double dv = exact_drift(state, v);
                    drift.checks += 1;
                    if (dv > rhs) ++drift.failures;
                    if (dv - rhs > drift.worst_margin) drift.worst_margin = dv - rhs;
                }
            }
        }

        running = match_step(state);
    }

    result.traces[0].final_value = static_cast<double>(state.deg_min);
    result.traces[1].final_value = static_cast<double>(state.deg_max);
    result.traces[2].final_value = static_cast<double>(state.deg[v0]);
    result.traces[2].final_transform_plus = plus.current();
    result.traces[2].final_transform_minus = minus.current();
    if (plus.frozen()) result.traces[2].frozen_plus_at = plus.frozen_at();
    if (minus.frozen()) result.traces[2].frozen_minus_at = minus.frozen_at();

    result.finals["matching_size"] = static_cast<double>(state.i);
    result.finals["unmatched"] = static_cast<double>(state.unmatched_count());
    result.stats["s"] = s;
    result.stats["alpha"] = alpha;
    result.stats["p_cutoff"] = p_cutoff;
    result.stats["variance_total"] = ledger.total();
    result.drift = drift;
    state.audit();
    return result;
}

}  // namespace demlab::gm
