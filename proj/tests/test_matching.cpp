#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "demlab/matching.hpp"

using namespace demlab;

TEST_CASE("circulant generator builds the expected graphs") {
    // n=6, d=2: the 6-cycle
    auto c6 = gm::gen_circulant(6, 2);
    c6.audit();
    CHECK(c6.edge_count() == 6);
    CHECK(c6.edges[0] == std::make_pair(std::int32_t{0}, std::int32_t{1}));

    // n=4, d=3: offsets +-1 plus the antipode = K_4
    auto k4 = gm::gen_circulant(4, 3);
    k4.audit();
    CHECK(k4.edge_count() == 6);

    CHECK_THROWS_AS(gm::gen_circulant(5, 3), std::invalid_argument);  // odd n*d
    CHECK_THROWS_AS(gm::gen_circulant(4, 4), std::invalid_argument);  // d >= n
}

TEST_CASE("pairing generator yields simple d-regular graphs") {
    auto k4 = gm::gen_pairing(4, 3, 5);
    k4.audit();
    CHECK(k4.edge_count() == 6);  // the only simple 3-regular graph on 4 vertices

    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        auto g = gm::gen_pairing(100, 3, seed);
        g.audit();
        CHECK(g.edge_count() == 150);
    }
    // deterministic in the seed
    auto a = gm::gen_pairing(60, 4, 9);
    auto b = gm::gen_pairing(60, 4, 9);
    CHECK(a.edges == b.edges);
}

TEST_CASE("graph files round-trip") {
    auto g = gm::gen_pairing(30, 4, 2);
    auto path = std::filesystem::temp_directory_path() / "demlab_graph_test.txt";
    gm::write_graph(g, path.string());
    auto back = gm::read_graph(path.string());
    back.audit();
    CHECK(back.n == g.n);
    CHECK(back.d == g.d);
    CHECK(back.edges == g.edges);
    std::filesystem::remove(path);
    CHECK_THROWS(gm::read_graph("/nonexistent/graph.txt"));
}

TEST_CASE("initial matching state tracks full degrees") {
    auto g = gm::gen_circulant(10, 4);
    gm::MatchingState s(g, 1);
    CHECK(s.alive_count() == g.edge_count());
    CHECK(s.unmatched_count() == 10);
    CHECK(s.deg_min == 4);
    CHECK(s.deg_max == 4);
    s.audit();
}

TEST_CASE("greedy matching on K_4 and C_4 is perfect") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto k4 = gm::gen_circulant(4, 3);
        gm::MatchingState s(k4, seed);
        while (gm::match_step(s)) s.audit();
        CHECK(s.i == 2);  // any maximal matching of K_4 is perfect
        CHECK(s.unmatched_count() == 0);

        auto c4 = gm::gen_circulant(4, 2);
        gm::MatchingState t(c4, seed);
        while (gm::match_step(t)) t.audit();
        CHECK(t.i == 2);  // C_4: both maximal matchings are perfect
    }
}

TEST_CASE("drift formula on hand-checked graphs") {
    // C_4 fresh: every vertex has D_v=2, two unmatched neighbors, 4 alive
    // edges: drift = -(2+2)/4 = -1.
    auto c4 = gm::gen_circulant(4, 2);
    gm::MatchingState s(c4, 1);
    for (std::int32_t v = 0; v < 4; ++v)
        CHECK(gm::exact_drift(s, v) == doctest::Approx(-1.0));

    // K_4 fresh: D_v=3, three unmatched neighbors, 6 alive edges:
    // drift = -9/6 = -1.5.
    auto k4 = gm::gen_circulant(4, 3);
    gm::MatchingState u(k4, 1);
    for (std::int32_t v = 0; v < 4; ++v)
        CHECK(gm::exact_drift(u, v) == doctest::Approx(-1.5));
}

TEST_CASE("drift formula equals enumeration on random states") {
    // Enumerate all alive edges; edge (a,b) lowers D_v by one for each of
    // a, b adjacent to v and unmatched (a=v or b=v contributes via its own
    // neighbors going out of reach only when they get matched -- D_v counts
    // unmatched neighbors, and v itself being matched does not change D_v).
    auto g = gm::gen_pairing(20, 3, 3);
    Xoshiro256ss rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        gm::MatchingState s(g, 100 + trial);
        int steps = static_cast<int>(rng.next_below(6));
        for (int i = 0; i < steps && !s.alive.empty(); ++i) gm::match_step(s);
        if (s.alive.empty()) continue;
        for (std::int32_t v = 0; v < g.n; ++v) {
            double expect = 0.0;
            for (std::int32_t e : s.alive) {
                auto [a, b] = g.edges[e];
                int delta = 0;
                for (int j = 0; j < g.d; ++j) {
                    std::int32_t u = g.adj[static_cast<std::size_t>(v) * g.d + j];
                    if (u == a || u == b) --delta;
                }
                expect += delta;
            }
            expect /= static_cast<double>(s.alive_count());
            CHECK(gm::exact_drift(s, v) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("degree bookkeeping survives a full run") {
    auto g = gm::gen_pairing(100, 5, 7);
    gm::MatchingState s(g, 42);
    int audits = 0;
    while (gm::match_step(s)) {
        if (++audits % 7 == 0) s.audit();
    }
    s.audit();
    // maximal: no alive edge remains, so unmatched vertices form an
    // independent set in g
    for (auto [u, v] : g.edges) CHECK((s.matched[u] || s.matched[v]));
}

TEST_CASE("alive edge selection is uniform") {
    // First pick on C_100: each of the 100 edges should appear ~1/100.
    auto g = gm::gen_circulant(100, 2);
    const int trials = 50000;
    std::vector<int> hits(g.edge_count(), 0);
    for (int trial = 0; trial < trials; ++trial) {
        gm::MatchingState s(g, 1000 + trial);
        gm::match_step(s);
        ++hits[static_cast<std::size_t>(
            std::find(g.edges.begin(), g.edges.end(), s.matching[0]) - g.edges.begin())];
    }
    double expect = trials / 100.0;
    double sigma = std::sqrt(expect * (1.0 - 1.0 / 100.0));
    for (int h : hits) CHECK(std::fabs(h - expect) <= 5.0 * sigma);
}

TEST_CASE("variance bound dominates the empirical one-step variance") {
    auto g = gm::gen_pairing(50, 6, 11);
    gm::MatchingState base(g, 99);
    for (int i = 0; i < 5; ++i) gm::match_step(base);
    std::int32_t v = 0;
    double bound = gm::variance_step(base, v, 0.0, gm::kIncrementBound);

    // resample the next step many times from identical states
    double mean = 0.0, m2 = 0.0;
    const int resamples = 10000;
    std::vector<double> deltas;
    deltas.reserve(resamples);
    for (int r = 0; r < resamples; ++r) {
        gm::MatchingState s(g, 99);
        for (int i = 0; i < 5; ++i) gm::match_step(s);
        s.rng = Xoshiro256ss(5000 + r);
        double before = s.deg[v];
        gm::match_step(s);
        deltas.push_back(s.deg[v] - before);
    }
    for (double d : deltas) mean += d;
    mean /= resamples;
    for (double d : deltas) m2 += (d - mean) * (d - mean);
    m2 /= resamples;
    CHECK(m2 <= bound);
    // and the increments themselves respect the almost-sure bound
    for (double d : deltas) CHECK(std::fabs(d) <= gm::kIncrementBound);
}

TEST_CASE("match_run traces degree extremes and the probe vertex") {
    auto g = gm::gen_circulant(2000, 100);
    gm::RunParams p;
    p.K = 2.0;
    p.seed = 3;
    p.stride = 1;
    p.check_drift = true;
    auto res = gm::match_run(g, p);
    std::set<std::string> vars;
    for (const auto& tr : res.traces) vars.insert(tr.var);
    CHECK(vars.count("D_min") == 1);
    CHECK(vars.count("D_max") == 1);
    CHECK(vars.count("D_v0") == 1);
    CHECK(res.finals.at("matching_size") + res.finals.at("unmatched") / 2.0 ==
          doctest::Approx(1000.0));
    CHECK(res.stats.at("s") == doctest::Approx(2.0 * std::sqrt(100.0 * std::log(2000.0))));
    CHECK(res.drift.checks > 0);
    CHECK(res.stats.at("variance_total") > 0.0);
    CHECK(res.drift.failures == 0);

    // deterministic
    auto res2 = gm::match_run(g, p);
    CHECK(res.finals.at("matching_size") == res2.finals.at("matching_size"));
    CHECK(res.traces[0].rows.back().value == res2.traces[0].rows.back().value);
}
