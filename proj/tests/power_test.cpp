#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "escbf/power.hpp"

using namespace escbf;

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

}  // namespace

TEST_CASE("power_si") {
    const ParabolicPower model;
    CHECK(power_si(model, 0.0) == doctest::Approx(1.234));
    CHECK(power_si(model, 0.2) == doctest::Approx(8.63806));

    ParabolicPower loaded;
    loaded.payload = 20.0;
    CHECK(power_si(loaded, 0.0) == doctest::Approx(21.234));

    CHECK_THROWS_AS(power_si(model, -0.1), NegativeSpeed);
}

TEST_CASE("power_unicycle") {
    const UnicyclePower model;
    CHECK(power_unicycle(model, 0.0, 0.0) == doctest::Approx(1.234));
    CHECK(power_unicycle(model, 0.0, 0.5) == doctest::Approx(64.255375));
    // Outside the fitted omega range the raw polynomial is negative; clamped.
    CHECK(power_unicycle(model, 0.0, 2.0) == 0.0);
    // |v|, |omega| symmetry.
    CHECK(power_unicycle(model, -0.2, -0.5) == power_unicycle(model, 0.2, 0.5));
}

TEST_CASE("power positivity") {
    std::mt19937_64 rng(3);
    UnicyclePower model;
    model.payload = 5.0;
    for (int k = 0; k < 200; ++k) {
        const double v = uniform(rng, -1.0, 1.0);
        const double w = uniform(rng, -4.0, 4.0);
        CHECK(power_unicycle(model, v, w) >= model.payload);
    }
}

TEST_CASE("converged_speed without disturbance") {
    const ParabolicPower model;
    const auto roots = converged_speed(model, 0.1);
    REQUIRE(roots.has_value());
    CHECK(roots->lower == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(roots->upper == doctest::Approx(model.m0 / (model.m2 * 0.1)).epsilon(1e-9));

    const double v_star = max_return_speed(model);
    const auto equal = converged_speed(model, v_star);
    REQUIRE(equal.has_value());
    CHECK(equal->lower == doctest::Approx(equal->upper).epsilon(1e-9));

    CHECK_FALSE(converged_speed(model, 0.1, {1.0}).has_value());
    CHECK_THROWS_AS(converged_speed(model, 0.0), NonPositiveReturnSpeed);
}

TEST_CASE("converged_speed root residual oracle") {
    // Each root lambda must satisfy lambda = P(lambda) v_r / P(v_r).
    std::mt19937_64 rng(5);
    for (int k = 0; k < 200; ++k) {
        ParabolicPower model;
        model.m0 = uniform(rng, 0.5, 5.0);
        model.m1 = uniform(rng, 5.0, 50.0);
        model.m2 = uniform(rng, 5.0, 50.0);
        const double v_r = uniform(rng, 0.2, 0.999) * max_return_speed(model);
        const auto roots = converged_speed(model, v_r);
        REQUIRE(roots.has_value());
        const double p_vr = power_si(model, v_r);
        for (double root : {roots->lower, roots->upper}) {
            const double residual = root - power_si(model, root) * v_r / p_vr;
            CHECK(std::abs(residual) <= 1e-9 * p_vr);
        }
    }
}

TEST_CASE("disturbance shifts the lower root monotonically") {
    std::mt19937_64 rng(9);
    for (int k = 0; k < 100; ++k) {
        ParabolicPower model;
        model.m0 = uniform(rng, 0.5, 5.0);
        model.m1 = uniform(rng, 5.0, 50.0);
        model.m2 = uniform(rng, 5.0, 50.0);
        const double v_r = uniform(rng, 0.2, 0.9) * max_return_speed(model);
        const double margin = stability_margin(model, v_r);
        const double base = converged_speed(model, v_r)->lower;
        CHECK(converged_speed(model, v_r, {-0.5 * margin})->lower < base);
        CHECK(converged_speed(model, v_r, {0.5 * margin})->lower > base);
    }
}

TEST_CASE("max_return_speed") {
    CHECK(max_return_speed({1.0, 1.0, 1.0, 0.0}) == doctest::Approx(1.0));
    CHECK(max_return_speed({4.0, 1.0, 1.0, 0.0}) == doctest::Approx(2.0));
    CHECK(max_return_speed(ParabolicPower{}) == doctest::Approx(0.21064).epsilon(1e-4));
}

TEST_CASE("stability_margin") {
    const ParabolicPower model;
    CHECK(stability_margin(model, max_return_speed(model)) <= 1e-12);
    CHECK(stability_margin(model, 0.1) == doctest::Approx(0.8213).epsilon(1e-3));
    CHECK_THROWS_AS(stability_margin(model, 0.0), NonPositiveReturnSpeed);

    // Margin is exactly the discriminant boundary.
    std::mt19937_64 rng(15);
    for (int k = 0; k < 100; ++k) {
        ParabolicPower m;
        m.m0 = uniform(rng, 0.5, 5.0);
        m.m1 = uniform(rng, 5.0, 50.0);
        m.m2 = uniform(rng, 5.0, 50.0);
        const double v_r = uniform(rng, 0.2, 0.9) * max_return_speed(m);
        const double margin = stability_margin(m, v_r);
        CHECK(converged_speed(m, v_r, {0.99 * margin}).has_value());
        CHECK_FALSE(converged_speed(m, v_r, {1.01 * margin}).has_value());
    }
}

TEST_CASE("payload shifts the margin like m0") {
    ParabolicPower loaded;
    loaded.payload = 20.0;
    ParabolicPower folded;
    folded.m0 += 20.0;
    CHECK(stability_margin(loaded, 0.1) == doctest::Approx(stability_margin(folded, 0.1)));
    CHECK(max_return_speed(loaded) == doctest::Approx(max_return_speed(folded)));
}
