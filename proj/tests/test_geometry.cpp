#include <catch2/catch_amalgamated.hpp>

#include "roughlayer/geometry.hpp"

using namespace roughlayer;

TEST_CASE("profile values match the closed forms") {
    const double g0 = 0.5;
    RoughnessProfile sine(ProfileKind::Sine, g0);
    CHECK(sine.evaluate(0.0) == 1.0);
    CHECK(sine.evaluate(0.05) == 1.0);
    CHECK(sine.evaluate(0.95) == 1.0);
    CHECK(sine.evaluate(1.0) == 1.0);
    // the sine trough sits at the midpoint and reaches gamma0
    CHECK_THAT(sine.evaluate(0.5), Catch::Matchers::WithinAbs(g0, 1e-14));
    CHECK(sine.evaluate(0.3) > g0);
    CHECK(sine.evaluate(0.3) < 1.0);

    RoughnessProfile rect(ProfileKind::Rect, g0);
    CHECK(rect.evaluate(0.05) == 1.0);
    CHECK(rect.evaluate(0.5) == g0);
    CHECK(rect.evaluate(0.2) == g0);
    CHECK(rect.evaluate(0.8) == g0);
    // smoothstep ramp midpoint
    CHECK_THAT(rect.evaluate(0.15), Catch::Matchers::WithinAbs(1.0 - 0.5 * (1.0 - g0), 1e-14));

    RoughnessProfile flat(ProfileKind::Flat, 0.3);
    CHECK(flat.evaluate(0.0) == 0.3);
    CHECK(flat.evaluate(0.7) == 0.3);
}

TEST_CASE("profile derivative matches finite differences away from breakpoints") {
    const double d = 1e-6;
    for (ProfileKind kind : {ProfileKind::Sine, ProfileKind::Rect, ProfileKind::Flat}) {
        RoughnessProfile p(kind, 0.4);
        for (double x : {0.15, 0.33, 0.5, 0.77, 0.85}) {
            const double fd = (p.evaluate(x + d) - p.evaluate(x - d)) / (2.0 * d);
            CHECK_THAT(p.derivative(x), Catch::Matchers::WithinAbs(fd, 1e-6));
        }
    }
}

TEST_CASE("profile rejects invalid inputs") {
    CHECK_THROWS_AS(RoughnessProfile(ProfileKind::Sine, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(RoughnessProfile(ProfileKind::Sine, -0.2), std::invalid_argument);
    CHECK_THROWS_AS(RoughnessProfile(ProfileKind::Sine, 1.5), std::invalid_argument);
    RoughnessProfile p(ProfileKind::Sine, 0.5);
    CHECK_THROWS_AS(p.evaluate(-0.1), std::domain_error);
    CHECK_THROWS_AS(p.evaluate(1.1), std::domain_error);
}

TEST_CASE("breakpoints delimit the smooth pieces") {
    CHECK(RoughnessProfile(ProfileKind::Flat, 0.5).breakpoints() == std::vector<double>{0.0, 1.0});
    CHECK(RoughnessProfile(ProfileKind::Sine, 0.5).breakpoints() ==
          std::vector<double>{0.0, 0.1, 0.9, 1.0});
    CHECK(RoughnessProfile(ProfileKind::Rect, 0.5).breakpoints() ==
          std::vector<double>{0.0, 0.1, 0.2, 0.8, 0.9, 1.0});
}

TEST_CASE("cell areas match the analytic integrals of the profiles") {
    for (double g0 : {0.1, 0.5, 0.9}) {
        const auto sine = build_cell_geometry(RoughnessProfile(ProfileKind::Sine, g0));
        CHECK_THAT(sine.fluid_area, Catch::Matchers::WithinAbs(0.6 + 0.4 * g0, 1e-12));
        const auto rect = build_cell_geometry(RoughnessProfile(ProfileKind::Rect, g0));
        CHECK_THAT(rect.fluid_area, Catch::Matchers::WithinAbs(0.3 + 0.7 * g0, 1e-12));
        const auto flat = build_cell_geometry(RoughnessProfile(ProfileKind::Flat, g0));
        CHECK_THAT(flat.fluid_area, Catch::Matchers::WithinAbs(g0, 1e-14));
        CHECK_THAT(flat.interface_length, Catch::Matchers::WithinAbs(1.0, 1e-14));
        CHECK(sine.interface_length > 1.0);
        CHECK(rect.interface_length > 1.0);
    }
}

TEST_CASE("cell geometry rejects too-coarse quadrature") {
    CHECK_THROWS_AS(build_cell_geometry(RoughnessProfile(ProfileKind::Sine, 0.5), 8),
                    std::invalid_argument);
}

TEST_CASE("layer domain needs an integer cell count") {
    RoughnessProfile p(ProfileKind::Sine, 0.5);
    CHECK_THROWS_AS(build_layer_domain(p, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(build_layer_domain(p, 0.7), std::invalid_argument);
    const LayerDomain d = build_layer_domain(p, 0.125);
    CHECK(d.cell_count == 8);
    CHECK(d.epsilon == 0.125);
}

TEST_CASE("layer interface height repeats the scaled profile per cell") {
    RoughnessProfile p(ProfileKind::Sine, 0.5);
    const LayerDomain d = build_layer_domain(p, 0.2);
    for (int k = 0; k < d.cell_count; ++k) {
        const double x = (k + 0.5) * d.epsilon;
        CHECK_THAT(d.interface_height(x),
                   Catch::Matchers::WithinAbs(d.epsilon * p.evaluate(0.5), 1e-13));
    }
    CHECK_THAT(d.interface_height(0.0), Catch::Matchers::WithinAbs(d.epsilon, 1e-13));
}
