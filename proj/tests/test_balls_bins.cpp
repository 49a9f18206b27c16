#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "demlab/balls_bins.hpp"

using namespace demlab;

TEST_CASE("initial state is all-empty bins") {
    auto s = bb::init(50, 1);
    CHECK(s.n == 50);
    CHECK(s.i == 0);
    CHECK(s.count(0) == 50);
    CHECK(s.count(1) == 0);
    s.audit();
    CHECK_THROWS_AS(bb::init(0, 1), std::invalid_argument);
}

TEST_CASE("single-bin process is forced") {
    auto s = bb::init(1, 99);
    for (int i = 1; i <= 5; ++i) {
        bb::step(s);
        CHECK(s.i == i);
        CHECK(s.count(i) == 1);  // the lone bin has load i
        s.audit();
    }
}

TEST_CASE("histogram mass and ball count are conserved") {
    auto s = bb::init(200, 5);
    for (int i = 0; i < 1000; ++i) bb::step(s);
    s.audit();
    std::int64_t bins = 0, balls = 0;
    for (std::size_t l = 0; l < s.histogram.size(); ++l) {
        bins += s.histogram[l];
        balls += static_cast<std::int64_t>(l) * s.histogram[l];
    }
    CHECK(bins == 200);
    CHECK(balls == 1000);
}

TEST_CASE("drift formula equals exact enumeration over bins") {
    // The next ball lands in each bin with probability 1/n, so
    // E[dX_k] = (#bins that enter level k - #bins that leave)/n, enumerated
    // directly from the loads.
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        auto s = bb::init(12, seed);
        for (int step = 0; step < 40; ++step) {
            for (int k = 0; k <= 6; ++k) {
                double expect = 0.0;
                for (std::uint32_t load : s.loads) {
                    if (static_cast<int>(load) + 1 == k) expect += 1.0;
                    if (static_cast<int>(load) == k) expect -= 1.0;
                }
                expect /= static_cast<double>(s.n);
                CHECK(bb::exact_drift(s, k) == doctest::Approx(expect).epsilon(1e-15));
            }
            bb::step(s);
        }
    }
}

TEST_CASE("one-step counter changes are bounded") {
    auto s = bb::init(30, 11);
    std::vector<std::int64_t> prev(8);
    for (int k = 0; k <= 7; ++k) prev[k] = s.count(k);
    for (int i = 0; i < 500; ++i) {
        bb::step(s);
        for (int k = 0; k <= 7; ++k) {
            CHECK(std::llabs(s.count(k) - prev[k]) <= 1);
            prev[k] = s.count(k);
        }
    }
}

TEST_CASE("runs are deterministic in the seed") {
    bb::RunParams p{200, 300, 3, bb::EnvelopeVariant::SelfCorrect, 0.1, 77, 1, false};
    auto a = bb::run(p);
    auto b = bb::run(p);
    REQUIRE(a.traces.size() == b.traces.size());
    for (std::size_t v = 0; v < a.traces.size(); ++v) {
        REQUIRE(a.traces[v].rows.size() == b.traces[v].rows.size());
        for (std::size_t r = 0; r < a.traces[v].rows.size(); ++r)
            CHECK(a.traces[v].rows[r].value == b.traces[v].rows[r].value);
    }
    p.seed = 78;
    auto c = bb::run(p);
    bool differs = false;
    for (std::size_t r = 0; r < c.traces[0].rows.size(); ++r)
        differs |= c.traces[0].rows[r].value != a.traces[0].rows[r].value;
    CHECK(differs);
}

TEST_CASE("run tracks kappa+1 variables over the full horizon") {
    bb::RunParams p{500, 300, 4, bb::EnvelopeVariant::Basic, 0.1, 3, 1, true};
    auto res = bb::run(p);
    REQUIRE(res.traces.size() == 5);
    CHECK(res.traces[0].var == "X_0");
    CHECK(res.traces[4].var == "X_4");
    CHECK(res.traces[0].rows.size() == 301);  // steps 0..m inclusive
    CHECK(res.traces[0].rows.front().value == 500.0);
    // finals match the recorded last row
    CHECK(res.finals.at("X_0") == res.traces[0].rows.back().value);
    CHECK(res.drift.checks > 0);
    CHECK(res.drift.failures == 0);
    for (const auto& row : res.traces[1].rows) CHECK(row.lo <= row.hi);
}

TEST_CASE("horizon limits enforce the envelope domain") {
    std::int64_t n = 1000;
    auto basic = bb::horizon_limit(n, bb::EnvelopeVariant::Basic, 0.1);
    CHECK(basic == static_cast<std::int64_t>(n * std::log(static_cast<double>(n)) / 9.0));
    auto sc = bb::horizon_limit(n, bb::EnvelopeVariant::SelfCorrect, 0.1);
    CHECK(sc == static_cast<std::int64_t>(0.4 * n * std::log(static_cast<double>(n))));
    bb::RunParams p{n, sc + 1, 2, bb::EnvelopeVariant::SelfCorrect, 0.1, 1, 1, false};
    CHECK_THROWS_AS(bb::run(p), std::invalid_argument);
}

TEST_CASE("self-correct run reports critical interval entries") {
    bb::RunParams p{2000, 5000, 2, bb::EnvelopeVariant::SelfCorrect, 0.1, 21, 1, false};
    auto res = bb::run(p);
    CHECK(res.stats.count("critical_entries_X_0") == 1);
    CHECK(res.stats.count("critical_entries_X_2") == 1);
    for (int k = 0; k <= 2; ++k)
        CHECK(res.stats.at("critical_entries_X_" + std::to_string(k)) >= 0.0);
}

TEST_CASE("transforms freeze only when the envelope is violated") {
    // Desk-scale run with a generous envelope: no violation, no freezing.
    bb::RunParams p{5000, 4500, 2, bb::EnvelopeVariant::Basic, 0.1, 13, 1, false};
    auto res = bb::run(p);
    CHECK_FALSE(res.violation.has_value());
    for (const auto& tr : res.traces) {
        CHECK_FALSE(tr.frozen_plus_at.has_value());
        CHECK_FALSE(tr.frozen_minus_at.has_value());
        // final transforms bracket zero: X inside the band
        CHECK(tr.final_transform_plus <= 0.0);
        CHECK(tr.final_transform_minus >= 0.0);
    }
    CHECK(res.max_dev_ratio < 1.0);
}
