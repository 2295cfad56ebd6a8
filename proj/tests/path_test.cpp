#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "escbf/path.hpp"

using namespace escbf;

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

WaypointPath random_path(std::mt19937_64& rng, int n) {
    std::vector<Vec2> points;
    Vec2 p{uniform(rng, -5.0, 5.0), uniform(rng, -5.0, 5.0)};
    points.push_back(p);
    for (int i = 1; i < n; ++i) {
        p += Vec2{uniform(rng, 0.3, 3.0) * (uniform01(rng) < 0.5 ? -1.0 : 1.0),
                  uniform(rng, 0.3, 3.0) * (uniform01(rng) < 0.5 ? -1.0 : 1.0)};
        points.push_back(p);
    }
    return build_path(points);
}

double total_turning(const WaypointPath& path) {
    double sum = 0.0;
    for (double psi : path.turn_angles) sum += std::abs(psi);
    return sum;
}

}  // namespace

TEST_CASE("build_path derived fields") {
    const WaypointPath p = build_path({{0, 0}, {3, 4}});
    CHECK(p.total_length == doctest::Approx(5.0));
    CHECK(p.breakpoints[0] == 0.0);
    CHECK(p.breakpoints[1] == 1.0);

    const WaypointPath q = build_path({{0, 0}, {1, 0}, {3, 0}});
    CHECK(q.breakpoints[1] == doctest::Approx(1.0 / 3.0));
    CHECK(q.rem_lengths[0] == doctest::Approx(3.0));
    CHECK(q.rem_lengths[1] == doctest::Approx(2.0));
    CHECK(q.rem_lengths[2] == doctest::Approx(0.0));
}

TEST_CASE("build_path rejects bad input") {
    CHECK_THROWS_AS(build_path({{0, 0}}), TooFewWaypoints);
    CHECK_THROWS_AS(build_path({{0, 0}, {1, 0}, {1, 0}}), DegenerateSegment);
    try {
        build_path({{0, 0}, {1, 0}, {1, 0}});
    } catch (const DegenerateSegment& e) {
        CHECK(e.segment() == 2);
    }
}

TEST_CASE("build_path invariants on random paths") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 50; ++k) {
        const WaypointPath p = random_path(rng, 5);
        for (std::size_t i = 0; i < p.size(); ++i)
            CHECK(std::abs(p.cum_lengths[i] + p.rem_lengths[i] - p.total_length) <=
                  1e-9 * p.total_length);
        for (std::size_t i = 1; i < p.size(); ++i)
            CHECK(p.breakpoints[i] > p.breakpoints[i - 1]);
        for (double psi : p.turn_angles) {
            CHECK(psi >= 0.0);
            CHECK(psi <= 3.14159265358979323846);
        }
    }
}

TEST_CASE("turn_angle") {
    const WaypointPath straight = build_path({{0, 0}, {1, 0}, {2, 0}});
    CHECK(turn_angle(straight, 1) == doctest::Approx(0.0));

    const WaypointPath corner = build_path({{0, 0}, {1, 0}, {1, 1}});
    CHECK(turn_angle(corner, 1) == doctest::Approx(3.14159265358979323846 / 2.0));

    // Near reversal; oracle is the raw dot-product formula.
    const WaypointPath sharp = build_path({{0, 0}, {1, 0}, {0, 0.001}});
    const Vec2 a{1, 0};
    const Vec2 b{-1, 0.001};
    const double expected = std::acos(a.dot(b) / (a.norm() * b.norm()));
    CHECK(turn_angle(sharp, 1) == doctest::Approx(expected).epsilon(1e-12));

    CHECK_THROWS_AS(turn_angle(straight, 0), IndexOutOfRange);
    CHECK_THROWS_AS(turn_angle(straight, 2), IndexOutOfRange);
}

TEST_CASE("double sigmoid partition of unity at interior breakpoints") {
    std::mt19937_64 rng(11);
    const SmoothParams params;
    for (int k = 0; k < 20; ++k) {
        const WaypointPath p = random_path(rng, 5);
        for (std::size_t i = 1; i + 1 < p.size(); ++i) {
            const double si = p.breakpoints[i];
            for (double off : {-5.0 / params.beta, 0.0, 5.0 / params.beta}) {
                const double s = si + off;
                // sigma_{i-1} falling edge times sigma_i rising edge around s_i.
                const double falling = double_sigmoid(params, p, i - 1, s) /
                                       (1.0 / (1.0 + std::exp(-params.beta *
                                                              (s - p.breakpoints[i - 1] +
                                                               (i == 1 ? params.eps_end : 0.0)))));
                const double rising =
                    1.0 / (1.0 + std::exp(-params.beta * (s - p.breakpoints[i])));
                CHECK(std::abs(falling + rising - 1.0) <= 1e-9);
            }
        }
    }
}

TEST_CASE("double sigmoid endpoint and mid-segment values") {
    const SmoothParams params;
    const WaypointPath p = build_path({{0, 0}, {5, 0}, {5, 5}});
    CHECK(double_sigmoid(params, p, 0, 0.0) >= 0.9999);

    const double mid = 0.5 * (p.breakpoints[1] + p.breakpoints[2]);
    CHECK(double_sigmoid(params, p, 1, mid) >= 1.0 - 1e-6);
    CHECK_THROWS_AS(double_sigmoid(params, p, 2, 0.5), IndexOutOfRange);
}

TEST_CASE("smooth_point endpoints and interpolation") {
    const SmoothParams params;
    std::mt19937_64 rng(13);
    for (int k = 0; k < 20; ++k) {
        const WaypointPath p = random_path(rng, 5);
        CHECK(distance(smooth_point(p, params, 0.0), p.waypoints.front()) <=
              1e-4 * p.total_length);
        CHECK(distance(smooth_point(p, params, 1.0), p.waypoints.back()) <=
              1e-4 * p.total_length);
    }

    const WaypointPath line = build_path({{0, 0}, {2, 0}});
    CHECK(distance(smooth_point(line, params, 0.5), {1, 0}) <= 1e-6);

    const WaypointPath two = build_path({{0, 0}, {1, 0}, {3, 0}});
    CHECK(distance(smooth_point(two, params, 2.0 / 3.0), {2, 0}) <= 1e-6);
}

TEST_CASE("smooth_tangent matches finite differences") {
    SmoothParams params;
    params.beta = 200.0;
    params.eps_end = 10.0 / params.beta;
    std::mt19937_64 rng(17);
    const double h = 1e-6;
    for (int k = 0; k < 100; ++k) {
        const WaypointPath p = random_path(rng, 5);
        const double s = uniform(rng, 0.05, 0.95);
        const Vec2 analytic = smooth_tangent(p, params, s, TangentMode::Full);
        const Vec2 numeric =
            (smooth_point(p, params, s + h) - smooth_point(p, params, s - h)) / (2.0 * h);
        CHECK(distance(analytic, numeric) <= 1e-4 * std::max(1.0, numeric.norm()));
    }
}

TEST_CASE("simplified tangent approximates full mode away from breakpoints") {
    const SmoothParams params;
    std::mt19937_64 rng(19);
    for (int k = 0; k < 50; ++k) {
        const WaypointPath p = random_path(rng, 4);
        double s = uniform(rng, 0.02, 0.98);
        bool near = false;
        for (double si : p.breakpoints)
            if (std::abs(s - si) < 10.0 / params.beta) near = true;
        if (near) continue;
        const Vec2 full = smooth_tangent(p, params, s, TangentMode::Full);
        const Vec2 simple = smooth_tangent(p, params, s, TangentMode::Simplified);
        CHECK(distance(full, simple) <= 1e-3 * p.total_length);
    }

    const WaypointPath line = build_path({{0, 0}, {2, 0}});
    const Vec2 t = smooth_tangent(line, params, 0.4, TangentMode::Simplified);
    CHECK(t.x == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::abs(t.y) <= 1e-9);
}

TEST_CASE("simplified tangent magnitude never exceeds L") {
    const SmoothParams params;
    std::mt19937_64 rng(23);
    for (int k = 0; k < 20; ++k) {
        const WaypointPath p = random_path(rng, 5);
        for (int j = 0; j <= 100; ++j) {
            const double s = j / 100.0;
            CHECK(smooth_tangent(p, params, s, TangentMode::Simplified).norm() <=
                  p.total_length * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("remaining_length") {
    const WaypointPath p = build_path({{0, 0}, {10, 0}});
    CHECK(remaining_length(p, 0.0) == doctest::Approx(10.0));
    CHECK(remaining_length(p, 1.0) == doctest::Approx(0.0));
    CHECK(remaining_length(p, 0.25) == doctest::Approx(7.5));
}

TEST_CASE("path_time_derivative") {
    const SmoothParams params;
    const WaypointPath p = build_path({{0, 0}, {3, 4}, {6, 4}});

    const PathDynamics frozen = path_time_derivative(p, params, 0.4, {0, 0});
    CHECK(frozen.l_dot == 0.0);
    CHECK(frozen.xr_partial_t.norm() == 0.0);
    for (double sd : frozen.s_dot_breakpoints) CHECK(sd == 0.0);

    const PathDynamics dyn = path_time_derivative(p, params, 0.4, {0.3, 0.4});
    CHECK(dyn.l_dot == doctest::Approx(-0.5));
    // s_dot_i = (rem_i / L^2) l_dot with rem = 3, L = 8.
    CHECK(dyn.s_dot_breakpoints[0] == doctest::Approx(3.0 / 64.0 * -0.5));

    // Linearity in the head rate.
    const PathDynamics twice = path_time_derivative(p, params, 0.4, {0.6, 0.8});
    CHECK(twice.l_dot == doctest::Approx(2.0 * dyn.l_dot));
    CHECK(twice.xr_partial_t.x == doctest::Approx(2.0 * dyn.xr_partial_t.x));
    CHECK(twice.xr_partial_t.y == doctest::Approx(2.0 * dyn.xr_partial_t.y));
}

TEST_CASE("path_time_derivative xr term closed form") {
    // Segments 5 m and 3 m, so L = 8 and the interior breakpoint sits at 5/8.
    // At s = 0.4 only the first segment's sigmoid is live (the transition is
    // 0.225 away, far beyond the 1/beta window), so the term reduces to
    //   (w1 - w0) * (l_dot / L^2) * (rem_0*(s_1 - s) + rem_1*(s - s_0)) / s_1^2
    // with rem_0 = 8, rem_1 = 3. For xi = (0.3, 0.4) the unit first-segment
    // direction is (0.6, 0.8) and l_dot = -0.5, giving
    //   (3,4) * (-0.5/64) * (8*0.225 + 3*0.4) / 0.625^2 = (3,4) * -0.06.
    const SmoothParams params;
    const WaypointPath p = build_path({{0, 0}, {3, 4}, {6, 4}});
    const Vec2 term = path_time_derivative(p, params, 0.4, {0.3, 0.4}).xr_partial_t;
    CHECK(term.x == doctest::Approx(-0.18).epsilon(1e-9));
    CHECK(term.y == doctest::Approx(-0.24).epsilon(1e-9));
}

TEST_CASE("spc_update example") {
    const WaypointPath p = build_path({{0, 0}, {1, 0}, {2, 0}});
    const WaypointPath q = spc_update(p, {0, 0}, 0.5);
    REQUIRE(q.size() == 4);
    CHECK(distance(q.waypoints[0], {0, 0}) == 0.0);
    CHECK(distance(q.waypoints[1], {0.5, 0}) <= 1e-12);
    CHECK(distance(q.waypoints[2], {1, 0}) == 0.0);
    CHECK(q.total_length == doctest::Approx(2.0));
    CHECK(total_turning(q) <= 1e-12);
    CHECK(turn_angle(q, 1) <= 1e-9);
}

TEST_CASE("spc_update rejects bad input") {
    const WaypointPath p = build_path({{0, 0}, {1, 0}});
    CHECK_THROWS_AS(spc_update(p, {0, 0}, 0.0), KappaOutOfRange);
    CHECK_THROWS_AS(spc_update(p, {0, 0}, 1.0), KappaOutOfRange);
    CHECK_THROWS_AS(spc_update(p, {0.5, 0}, 0.5), HeadMismatch);
}

TEST_CASE("spc_update preserves length and turning on random paths") {
    std::mt19937_64 rng(29);
    for (int k = 0; k < 300; ++k) {
        const WaypointPath p = random_path(rng, 2 + static_cast<int>(uniform01(rng) * 5));
        const double kappa = uniform(rng, 0.01, 0.99);
        const WaypointPath q = spc_update(p, p.waypoints.front(), kappa);
        CHECK(std::abs(q.total_length - p.total_length) <= 1e-9 * p.total_length);
        CHECK(std::abs(total_turning(q) - total_turning(p)) <= 1e-9 * (1.0 + total_turning(p)));
        CHECK(std::abs(turn_angle(q, 1)) <= 1e-9);
    }
}

TEST_CASE("text serialization round trip") {
    std::mt19937_64 rng(31);
    const WaypointPath p = random_path(rng, 5);
    const WaypointPath q = path_from_text(path_to_text(p));
    REQUIRE(q.size() == p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        CHECK(distance(p.waypoints[i], q.waypoints[i]) <= 1e-9);
}
