#include <catch2/catch_amalgamated.hpp>

#include "roughlayer/viscosity.hpp"

using namespace roughlayer;

TEST_CASE("constant law returns mu everywhere") {
    const ViscosityLaw law = ViscosityLaw::constant(0.37);
    law.validate();
    CHECK(law.evaluate(-5.0) == 0.37);
    CHECK(law.evaluate(0.25) == 0.37);
    CHECK(law.evaluate(100.0) == 0.37);
    CHECK(law.lipschitz_constant() == 0.0);
}

TEST_CASE("evaluation clamps the temperature") {
    ViscosityLaw law;  // mu0 exp(a/(t - T0)) on [0, 0.5]
    CHECK(law.evaluate(-3.0) == law.evaluate(0.0));
    CHECK(law.evaluate(2.0) == law.evaluate(0.5));
    CHECK_THAT(law.evaluate(0.0),
               Catch::Matchers::WithinRel(0.2 * std::exp(3.0 / (0.0 - 0.6)), 1e-14));
    CHECK_THAT(law.evaluate(0.5),
               Catch::Matchers::WithinRel(0.2 * std::exp(3.0 / (0.5 - 0.6)), 1e-14));
}

TEST_CASE("hotter fluid is thinner below the singularity") {
    ViscosityLaw law;
    double prev = law.evaluate(0.0);
    for (double t = 0.05; t <= 0.5; t += 0.05) {
        const double cur = law.evaluate(t);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("validation rejects degenerate laws") {
    ViscosityLaw law;
    law.mu0 = 0.0;
    CHECK_THROWS_AS(law.validate(), std::invalid_argument);
    law = ViscosityLaw{};
    law.clamp_lo = 0.5;
    law.clamp_hi = 0.5;
    CHECK_THROWS_AS(law.validate(), std::invalid_argument);
    law = ViscosityLaw{};
    law.clamp_hi = 0.7;  // clamp interval now contains T0 = 0.6
    CHECK_THROWS_AS(law.validate(), std::invalid_argument);
    law.a = 0.0;  // constant law: the singularity is gone
    CHECK_NOTHROW(law.validate());
}

TEST_CASE("bounds enclose all evaluations") {
    ViscosityLaw law;
    const double lo = law.lower_bound(), hi = law.upper_bound();
    CHECK(lo > 0.0);
    CHECK(lo < hi);
    for (double t = -0.5; t <= 1.0; t += 0.01) {
        const double m = law.evaluate(t);
        CHECK(m >= lo);
        CHECK(m <= hi);
    }
}

TEST_CASE("finite differences respect the Lipschitz constant") {
    ViscosityLaw law;
    const double L = law.lipschitz_constant();
    CHECK(L > 0.0);
    for (double a = -0.2; a <= 0.7; a += 0.013) {
        for (double b = a + 0.001; b <= 0.7; b += 0.037) {
            const double rate = std::abs(law.evaluate(a) - law.evaluate(b)) / (b - a);
            CHECK(rate <= L * (1.0 + 1e-6));
        }
    }
}
