#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "escbf/controller.hpp"

using namespace escbf;

namespace {

ControllerConfig test_config() {
    ControllerConfig config;
    config.region = ChargingRegion::make({0, 0}, 1.0, 0.3);
    return config;
}

double h_e_of(const ControllerState& state, const ControllerConfig& config, double consumed) {
    const double extra = state.unicycle ? slowing_integral(state.profile, state.s) : 0.0;
    return h_energy({consumed, state.budget}, config.model, config.v_r,
                    state.path.total_length, state.s, config.region.effective_radius, extra);
}

}  // namespace

TEST_CASE("config feasibility guard") {
    ControllerConfig config = test_config();
    CHECK_NOTHROW(validate(config));  // 0.1 + 2 * 0.3 / 2 = 0.4 <= 0.5

    config.u_max = 0.35;
    CHECK_THROWS_AS(validate(config), InfeasibleConfig);
    CHECK_THROWS_AS(
        init_state(config, build_path({{10, 0}, {0, 0}}), {10, 0}, 1000.0), InfeasibleConfig);
}

TEST_CASE("init_state snaps the path head to the robot") {
    const ControllerConfig config = test_config();
    const ControllerState state =
        init_state(config, build_path({{10.001, 0}, {0, 0}}), {10, 0}, 1000.0);
    CHECK(distance(state.path.waypoints.front(), {10, 0}) == 0.0);
    CHECK(distance(state.head, {10, 0}) == 0.0);
    CHECK(state.s == 0.0);
    CHECK_FALSE(state.frozen);
}

TEST_CASE("update_head") {
    const ControllerConfig config = test_config();
    ControllerState state = init_state(config, build_path({{1, 0}, {0, 5}}), {1, 0}, 1000.0);

    // Converged tracker.
    Vec2 xi = update_head(state, {1, 0}, 1e-3, config);
    CHECK(xi.norm() == 0.0);

    state.head = {1, 0};
    xi = update_head(state, {0, 0}, 1e-3, config);
    CHECK(xi.x == doctest::Approx(-10.0));
    CHECK(xi.y == doctest::Approx(0.0));
    CHECK(state.head.x == doctest::Approx(0.99));

    state.frozen = true;
    const Vec2 before = state.head;
    xi = update_head(state, {5, 5}, 1e-3, config);
    CHECK(xi.norm() == 0.0);
    CHECK(distance(state.head, before) == 0.0);
}

TEST_CASE("step rejects oversized time steps") {
    const ControllerConfig config = test_config();
    ControllerState state = init_state(config, build_path({{10, 0}, {0, 0}}), {10, 0}, 12000.0);
    CHECK_THROWS_AS(step(state, {10, 0}, 0.0, {0, 0}, 0.02, config), TimestepTooLarge);
    CHECK_THROWS_AS(step(state, {10, 0}, 0.0, {0, 0}, 0.0, config), TimestepTooLarge);
}

TEST_CASE("slack constraints pass the mission command through") {
    const ControllerConfig config = test_config();
    ControllerState state = init_state(config, build_path({{10, 0}, {0, 0}}), {10, 0}, 12000.0);
    const Vec2 mission{0.05, 0.02};
    const ControlOutput out = step(state, {10, 0}, 0.0, mission, 1e-3, config);
    CHECK(out.u.x == doctest::Approx(mission.x).epsilon(1e-9));
    CHECK(out.u.y == doctest::Approx(mission.y).epsilon(1e-9));
    CHECK(std::abs(out.eta) <= 1e-9);
    CHECK_FALSE(out.saturated);
}

TEST_CASE("freeze latches once s passes the threshold") {
    ControllerConfig config = test_config();
    ControllerState state = init_state(config, build_path({{10, 0}, {0, 0}}), {10, 0}, 100.0);
    // Tiny budget forces the return immediately.
    Vec2 x{10, 0};
    double energy = 0.0;
    bool saw_freeze_event = false;
    for (int k = 0; k < 2000 && !state.frozen; ++k) {
        const ControlOutput out = step(state, x, energy, {0.1, 0}, 1e-3, config);
        saw_freeze_event = saw_freeze_event ||
                           std::count(out.events.begin(), out.events.end(), Event::Frozen) > 0;
        x += out.u * 1e-3;
        energy += power_si(config.model, out.u.norm()) * 1e-3;
    }
    REQUIRE(state.frozen);
    CHECK(saw_freeze_event);

    // Frozen head: the path stops changing entirely.
    const double length = state.path.total_length;
    const Vec2 head = state.head;
    for (int k = 0; k < 100; ++k) {
        const ControlOutput out = step(state, x, energy, {0.1, 0}, 1e-3, config);
        x += out.u * 1e-3;
        energy += power_si(config.model, out.u.norm()) * 1e-3;
    }
    CHECK(state.path.total_length == length);
    CHECK(distance(state.head, head) == 0.0);
}

TEST_CASE("steady return speed approaches v_r on a frozen tight-budget path") {
    const ControllerConfig config = test_config();
    const double rate = power_si(config.model, config.v_r) / config.v_r;
    const double L = 10.0;
    const double budget = rate * (L - config.region.effective_radius);

    ControllerState state = init_state(config, build_path({{L, 0}, {0, 0}}), {L, 0}, budget);
    state.s = 2e-3;
    state.frozen = true;

    Vec2 x{L, 0};
    double energy = 0.0;
    double speed = 0.0;
    const double dt = 1e-3;
    for (int k = 0; k < 30000; ++k) {
        const ControlOutput out = step(state, x, energy, {0, 0}, dt, config);
        x += out.u * dt;
        energy += power_si(config.model, out.u.norm()) * dt;
        speed = out.u.norm();
        if (k > 20000) {
            CHECK(speed >= 0.098);
            CHECK(speed <= 0.102);
        }
    }
    CHECK(speed == doctest::Approx(config.v_r).epsilon(0.02));
}

TEST_CASE("arrival event fires inside the charging region") {
    const ControllerConfig config = test_config();
    ControllerState state = init_state(config, build_path({{0.5, 0}, {0, 0}}), {0.5, 0}, 1e6);
    const ControlOutput out = step(state, {0.5, 0}, 0.0, {0, 0}, 1e-3, config);
    CHECK(std::count(out.events.begin(), out.events.end(), Event::Arrived) == 1);
}

TEST_CASE("evaluate_path") {
    const ControllerConfig config = test_config();
    const Vec2 x{10, 0};
    const WaypointPath candidate = build_path({{10, 0}, {0, 0}});

    // Healthy margin: both conditions hold.
    PathEvaluation eval = evaluate_path(candidate, x, 0.0, 12000.0, config, {0.1, 0}, {});
    CHECK(eval.h_e > 0.0);
    CHECK(eval.d_suff_ok);
    CHECK(eval.admissible());
    CHECK(eval.length == doctest::Approx(10.0));

    // Path longer than the remaining budget can cover.
    const double rate = power_si(config.model, config.v_r) / config.v_r;
    const WaypointPath long_path = build_path({{10, 0}, {10, 500}, {0, 0}});
    eval = evaluate_path(long_path, x, 0.0, 12000.0, config, {0.1, 0}, {});
    CHECK(eval.h_e < 0.0);
    CHECK_FALSE(eval.admissible());

    // h_e barely positive: the mission draw alone violates the decrease rate.
    const double budget = rate * (candidate.total_length - config.region.effective_radius) + 1.0;
    eval = evaluate_path(candidate, x, 0.0, budget, config, {0.1, 0}, {});
    CHECK(eval.h_e > 0.0);
    CHECK(eval.h_e < 2.0);
    CHECK_FALSE(eval.d_suff_ok);
}

TEST_CASE("admit_path outcomes") {
    const ControllerConfig config = test_config();
    ControllerState state = init_state(config, build_path({{10, 0}, {0, 0}}), {10, 0}, 12000.0);

    // Admissible candidate replaces the path and resets progress.
    state.s = 5e-4;
    const WaypointPath good = build_path({{10, 0}, {5, 2}, {0, 0}});
    AdmitResult result = admit_path(state, good, {10, 0}, 100.0, config, {0.1, 0});
    CHECK(result.decision == AdmitDecision::Admitted);
    CHECK(state.s == 0.0);
    CHECK(state.path.size() == 3);

    // Frozen (s past sigma): no-op.
    state.s = 0.01;
    const std::size_t n = state.path.size();
    result = admit_path(state, good, {10, 0}, 100.0, config, {0.1, 0});
    CHECK(result.decision == AdmitDecision::NoOp);
    CHECK(state.path.size() == n);
    CHECK(state.s == 0.01);
}

TEST_CASE("SPC fallback keeps h_e continuous") {
    const ControllerConfig config = test_config();
    ControllerState state = init_state(config, build_path({{30, 0}, {0, 0}}), {30, 0}, 12000.0);
    state.s = 5e-4;
    const double consumed = 9000.0;

    // Candidate so long that admission must fail.
    const WaypointPath bad = build_path({{30, 0}, {30, 500}, {0, 0}});
    const double before = h_e_of(state, config, consumed);
    const std::size_t n = state.path.size();
    const AdmitResult result = admit_path(state, bad, {30, 0}, consumed, config, {0.1, 0});
    const double after = h_e_of(state, config, consumed);

    CHECK(result.decision == AdmitDecision::SpcFallback);
    CHECK(state.path.size() == n + 1);
    CHECK(std::abs(after - before) <= 1e-9 * state.budget);
    CHECK(state.s == 5e-4);
}

TEST_CASE("unicycle variant builds a profile and steps") {
    const ControllerConfig config = test_config();
    UnicycleVariant variant;
    ControllerState state = init_state(config, build_path({{10, 0}, {10, 5}, {0, 0}}), {10, 0},
                                       12000.0, variant);
    REQUIRE(state.profile.centers.size() == 1);
    CHECK(state.profile.amplitudes[0] > 0.0);

    const ControlOutput out = step(state, {10, 0}, 0.0, {0.05, 0}, 1e-3, config, 1.5707);
    CHECK(out.u.norm() <= config.u_max + 1e-12);
    CHECK(state.last_power > 0.0);
}
