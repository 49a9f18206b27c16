#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "demlab/trajectories.hpp"

using namespace demlab;

TEST_CASE("occupancy trajectory closed form") {
    CHECK(traj::balls(0, 0.0) == 1.0);
    CHECK(traj::balls(1, 0.0) == 0.0);
    CHECK(traj::balls(1, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(traj::balls(2, 2.0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-14));
    CHECK(traj::balls(3, 0.5) == doctest::Approx(std::pow(0.5, 3) / 6.0 * std::exp(-0.5)));
    // large k goes through the log-space branch
    CHECK(traj::balls(25, 10.0) ==
          doctest::Approx(std::exp(25.0 * std::log(10.0) - 10.0 - std::lgamma(26.0))));
}

TEST_CASE("occupancy trajectory peaks at t=k and stays below 1/2") {
    for (int k = 1; k <= 20; ++k) {
        double peak = traj::balls(k, static_cast<double>(k));
        CHECK(peak < 0.5);
        CHECK(peak > traj::balls(k, k - 0.1));
        CHECK(peak > traj::balls(k, k + 0.1));
    }
}

TEST_CASE("component trajectory closed form") {
    CHECK(traj::components(1, 0.0) == 1.0);
    CHECK(traj::components(2, 0.0) == 0.0);
    // y_2(t) = t e^{-4t}
    CHECK(traj::components(2, 0.25) == doctest::Approx(0.25 * std::exp(-1.0)).epsilon(1e-14));
    // y_3(t) = (3/6) (2t)^2 e^{-6t} = 2 t^2 e^{-6t}; at t=0.5: 0.5 e^{-3}
    CHECK(traj::components(3, 0.5) == doctest::Approx(0.5 * std::exp(-3.0)).epsilon(1e-14));
    // y_1(t) = e^{-2t}
    CHECK(traj::components(1, 0.7) == doctest::Approx(std::exp(-1.4)).epsilon(1e-14));
}

TEST_CASE("matching trajectory and domain") {
    CHECK(traj::matching_p(0.0) == 1.0);
    CHECK(traj::matching_p(0.25) == doctest::Approx(0.5));
    CHECK(traj::matching(10, 0.1) == doctest::Approx(8.0));
    CHECK_THROWS_AS(traj::matching_p(0.51), std::domain_error);
    CHECK_THROWS_AS(traj::matching_p(-0.01), std::domain_error);
}

TEST_CASE("analytic derivatives match finite differences") {
    const double h = 1e-6;
    for (int g = 1; g < 1000; ++g) {
        double t = 3.0 * g / 1000.0;
        for (int k = 0; k <= 6; ++k) {
            double fd = (traj::balls(k, t + h) - traj::balls(k, t - h)) / (2.0 * h);
            CHECK(traj::balls_deriv(k, t) == doctest::Approx(fd).epsilon(1e-6));
        }
        for (int k = 1; k <= 6; ++k) {
            double fd = (traj::components(k, t + h) - traj::components(k, t - h)) / (2.0 * h);
            CHECK(traj::components_deriv(k, t) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("derivative recurrences hold exactly") {
    for (int g = 0; g <= 100; ++g) {
        double t = 2.0 * g / 100.0;
        for (int k = 0; k <= 8; ++k) {
            double expect = (k == 0 ? 0.0 : traj::balls(k - 1, t)) - traj::balls(k, t);
            CHECK(std::fabs(traj::balls_deriv(k, t) - expect) <= 1e-12);
        }
    }
}

TEST_CASE("rk4 reproduces the occupancy closed forms") {
    auto sys = traj::balls_system(6);
    auto path = traj::integrate_rk4(sys, 3.0, 1e-3);
    REQUIRE(path.size() == 3001);
    double worst = 0.0;
    for (std::size_t step = 0; step < path.size(); ++step) {
        double t = 1e-3 * static_cast<double>(step);
        for (int k = 0; k <= 6; ++k)
            worst = std::max(worst, std::fabs(path[step][k] - traj::balls(k, t)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("rk4 reproduces the component closed forms") {
    auto sys = traj::components_system(6);
    auto path = traj::integrate_rk4(sys, 3.0, 1e-3);
    double worst = 0.0;
    for (std::size_t step = 0; step < path.size(); ++step) {
        double t = 1e-3 * static_cast<double>(step);
        for (int k = 1; k <= 6; ++k)
            worst = std::max(worst, std::fabs(path[step][k - 1] - traj::components(k, t)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("rk4 converges at fourth order") {
    auto sys = traj::balls_system(2);
    auto coarse = traj::integrate_rk4(sys, 1.0, 1e-2);
    auto fine = traj::integrate_rk4(sys, 1.0, 5e-3);
    double ec = std::fabs(coarse.back()[1] - traj::balls(1, 1.0));
    double ef = std::fabs(fine.back()[1] - traj::balls(1, 1.0));
    CHECK(ef * 8.0 <= ec);  // halving h should cut the error by ~16
}

TEST_CASE("tree identity holds exactly for small k") {
    // k=1 and k=2 are degenerate: empty sum vs 2(k-1)k^{k-2}
    auto id1 = traj::verify_tree_identity(1);
    CHECK(id1.lhs == 0);
    CHECK(id1.rhs == 0);
    auto id3 = traj::verify_tree_identity(3);
    CHECK(static_cast<std::uint64_t>(id3.lhs) == 12);
    CHECK(static_cast<std::uint64_t>(id3.rhs) == 12);
    auto id4 = traj::verify_tree_identity(4);
    CHECK(static_cast<std::uint64_t>(id4.lhs) == 96);
    for (int k = 1; k <= 20; ++k) CHECK(traj::verify_tree_identity(k).equal());
    CHECK_THROWS_AS(traj::verify_tree_identity(0), std::invalid_argument);
    CHECK_THROWS_AS(traj::verify_tree_identity(21), std::invalid_argument);
    CHECK(traj::u128_to_string(id3.lhs) == "12");
    CHECK(traj::u128_to_string(0) == "0");
}

TEST_CASE("error functions scale and shapes") {
    traj::ErrorFunctionSpec basic{traj::ErrorVariant::BbBasic, 1000};
    auto v0 = traj::eval_error(basic, 0.0);
    CHECK(v0.epsilon == doctest::Approx(std::pow(1000.0, -1.0 / 3.0)).epsilon(1e-12));
    CHECK_FALSE(v0.delta.has_value());
    auto v1 = traj::eval_error(basic, 1.0);
    CHECK(v1.epsilon == doctest::Approx(v0.epsilon * std::exp(3.0)).epsilon(1e-12));

    traj::ErrorFunctionSpec sc{traj::ErrorVariant::BbSelfCorrect, 1000, 0.1};
    auto s0 = traj::eval_error(sc, 0.0);
    REQUIRE(s0.delta.has_value());
    double base = std::pow(1000.0, -0.5 + 0.05);
    CHECK(s0.epsilon == doctest::Approx(base).epsilon(1e-12));
    CHECK(*s0.delta == doctest::Approx(0.5 * base).epsilon(1e-12));
    auto s2 = traj::eval_error(sc, 2.0);
    CHECK(s2.epsilon == doctest::Approx(base * 3.0).epsilon(1e-12));
    CHECK(*s2.delta == doctest::Approx(base * 2.5).epsilon(1e-12));
    CHECK(*s2.delta < s2.epsilon);

    traj::ErrorFunctionSpec comp{traj::ErrorVariant::Components, 1000, 0.1, 2};
    auto c = traj::eval_error(comp, 0.5);
    CHECK(c.epsilon ==
          doctest::Approx(std::pow(1000.0, -1.0 / 3.0) * std::exp(6.0 * 8.0 * 0.5)).epsilon(1e-12));

    traj::ErrorFunctionSpec match{traj::ErrorVariant::Matching, 1000, 0.1, 4, 10.0, 100};
    auto m = traj::eval_error(match, 0.25);  // p = 0.5
    CHECK(m.epsilon == doctest::Approx(10.0 * 16.0).epsilon(1e-12));

    // the envelope scale is n for counts, 1 for the degree band
    CHECK(traj::make_envelope(basic).scale == 1000.0);
    CHECK(traj::make_envelope(match).scale == 1.0);
}

TEST_CASE("taylor residual shrinks like the second derivative term") {
    auto f = [](double t) { return traj::balls(2, t); };
    auto fp = [](double t) { return traj::balls_deriv(2, t); };
    double coarse = traj::taylor_residual(f, fp, 0.7, 100);
    double fine = traj::taylor_residual(f, fp, 0.7, 10000);
    CHECK(coarse <= 1e-2);
    CHECK(fine <= coarse / 50.0);
}
