#include <catch2/catch_amalgamated.hpp>

#include "roughlayer/config.hpp"

using namespace roughlayer;
using nlohmann::json;

TEST_CASE("empty config yields the reference scenario") {
    const RunConfig rc = parse_config_json(json::object());
    const ScenarioConfig& c = rc.scenario;
    CHECK(c.kappa_s == 0.5);
    CHECK(c.kappa_f == 0.1);
    CHECK(c.alpha == 1.0);
    CHECK(c.profile.kind == ProfileKind::Sine);
    CHECK(c.profile.gamma0 == 0.5);
    CHECK(c.epsilon == 0.2);
    CHECK(c.inflow == InflowFamily::Lin);
    CHECK(c.u_motion.x == 1.0);
    CHECK(c.u_motion.y == 0.0);
    CHECK(c.t_end == 5.0);
    CHECK(c.dt == 0.05);
    CHECK(c.h_bulk == 0.03);
    CHECK(c.theta_init == 0.0);
    CHECK(c.viscosity.mu0 == 0.2);
    CHECK(c.viscosity.a == 3.0);
    CHECK(c.viscosity.T0 == 0.6);
    CHECK(rc.eps_list == std::vector<double>{0.2, 0.1, 0.05});
    CHECK(rc.f_s_expr == "(1 - x2/eps)/(1 - gamma0)");
    REQUIRE(c.f_s);
    // bound source matches the expression at a sample point
    CHECK_THAT(c.f_s({0.5, 0.1}), Catch::Matchers::WithinRel(2.0 * (1.0 - 0.1 / 0.2), 1e-14));
    CHECK_FALSE(c.f_f);
    CHECK(rc.warnings.empty());
}

TEST_CASE("unknown keys are rejected by name") {
    CHECK_THROWS_WITH(parse_config_json(json{{"kappa_x", 1.0}}),
                      Catch::Matchers::ContainsSubstring("kappa_x"));
    CHECK_THROWS_WITH(parse_config_json(json{{"viscosity", json{{"typ", "vft"}}}}),
                      Catch::Matchers::ContainsSubstring("typ"));
}

TEST_CASE("positivity of the exchange and conductivities is enforced") {
    CHECK_THROWS_WITH(parse_config_json(json{{"kappa_f", -1.0}}),
                      Catch::Matchers::ContainsSubstring("A1"));
    CHECK_THROWS_WITH(parse_config_json(json{{"alpha", 0.0}}),
                      Catch::Matchers::ContainsSubstring("A1"));
}

TEST_CASE("viscosity clamp must exclude the singular temperature") {
    const json j{{"viscosity", json{{"type", "vft"}, {"clamp", {0.5, 0.7}}}}};
    CHECK_THROWS_WITH(parse_config_json(j), Catch::Matchers::ContainsSubstring("A2"));
}

TEST_CASE("constant viscosity shortcut") {
    const RunConfig rc =
        parse_config_json(json{{"viscosity", json{{"type", "constant"}, {"mu", 0.3}}}});
    CHECK(rc.scenario.viscosity.a == 0.0);
    CHECK(rc.scenario.viscosity.evaluate(0.1) == 0.3);
    CHECK(rc.scenario.viscosity.evaluate(0.9) == 0.3);
    CHECK_THROWS_WITH(
        parse_config_json(json{{"viscosity", json{{"type", "constant"}, {"mu", -1.0}}}}),
        Catch::Matchers::ContainsSubstring("A2"));
}

TEST_CASE("inflow families parse and lin2 records a compatibility warning") {
    CHECK(parse_config_json(json{{"inflow", "quad"}}).scenario.inflow == InflowFamily::Quad);
    const RunConfig rc = parse_config_json(json{{"inflow", "lin2"}});
    CHECK(rc.scenario.inflow == InflowFamily::Lin2);
    REQUIRE_FALSE(rc.warnings.empty());
    CHECK_THAT(rc.warnings.front(), Catch::Matchers::ContainsSubstring("A5"));
    CHECK_THROWS_AS(parse_config_json(json{{"inflow", "cubic"}}), ConfigError);
}

TEST_CASE("vertical wall motion violates the model assumptions") {
    CHECK_THROWS_WITH(parse_config_json(json{{"u_motion", {1.0, 1.0}}}),
                      Catch::Matchers::ContainsSubstring("A5"));
    const RunConfig rc = parse_config_json(json{{"u_motion", 2.0}});
    CHECK(rc.scenario.u_motion.x == 2.0);
    CHECK(rc.scenario.u_motion.y == 0.0);
}

TEST_CASE("profiles parse and bad ones are rejected") {
    const RunConfig rc = parse_config_json(json{{"profile", "rect"}, {"gamma0", 0.7}});
    CHECK(rc.scenario.profile.kind == ProfileKind::Rect);
    CHECK(rc.scenario.profile.gamma0 == 0.7);
    CHECK_THROWS_AS(parse_config_json(json{{"profile", "sawtooth"}}), ConfigError);
    CHECK_THROWS_AS(parse_config_json(json{{"gamma0", 1.5}}), ConfigError);
}

TEST_CASE("source expressions are validated at parse time") {
    CHECK_THROWS_WITH(parse_config_json(json{{"f_s", "1 + unknown_var"}}),
                      Catch::Matchers::ContainsSubstring("f_s"));
    CHECK_THROWS_WITH(parse_config_json(json{{"f_f", "1/(x2 - x2)"}}),
                      Catch::Matchers::ContainsSubstring("A4"));
    // an explicitly empty string disables the default source
    const RunConfig rc = parse_config_json(json{{"f_s", ""}});
    CHECK(rc.f_s_expr.empty());
    CHECK_FALSE(rc.scenario.f_s);
}

TEST_CASE("driver options are validated") {
    CHECK_THROWS_AS(parse_config_json(json{{"eps_list", json::array()}}), ConfigError);
    CHECK_THROWS_AS(parse_config_json(json{{"eps_list", {0.2, -0.1}}}), ConfigError);
    CHECK_THROWS_AS(parse_config_json(json{{"cell_h", 0.0}}), ConfigError);
    CHECK_THROWS_AS(parse_config_json(json{{"dump_mesh", "yes"}}), ConfigError);
    CHECK_THROWS_AS(parse_config_json(json{{"dt", -0.1}}), ConfigError);
    const RunConfig rc = parse_config_json(json{{"eps_list", {0.25, 0.125}}});
    CHECK(rc.eps_list == std::vector<double>{0.25, 0.125});
}

TEST_CASE("snapshot of a parsed config parses back to the same scenario") {
    const json in{{"kappa_s", 0.7},     {"profile", "rect"}, {"gamma0", 0.3},
                  {"inflow", "quad"},   {"epsilon", 0.1},    {"dt", 0.025},
                  {"f_f", "x1*eps"},    {"cell_h", 0.02},    {"dump_mesh", true}};
    const RunConfig rc = parse_config_json(in);
    json snap = config_snapshot(rc);
    snap.erase("warnings");  // run records, not configuration
    const RunConfig rc2 = parse_config_json(snap);
    CHECK(rc2.scenario.kappa_s == rc.scenario.kappa_s);
    CHECK(rc2.scenario.profile.kind == rc.scenario.profile.kind);
    CHECK(rc2.scenario.profile.gamma0 == rc.scenario.profile.gamma0);
    CHECK(rc2.scenario.inflow == rc.scenario.inflow);
    CHECK(rc2.scenario.epsilon == rc.scenario.epsilon);
    CHECK(rc2.scenario.dt == rc.scenario.dt);
    CHECK(rc2.f_f_expr == rc.f_f_expr);
    CHECK(rc2.cell_h == rc.cell_h);
    CHECK(rc2.dump_mesh == rc.dump_mesh);
}

TEST_CASE("missing and malformed files are reported") {
    CHECK_THROWS_AS(parse_config("/nonexistent/config.json"), ConfigError);
}
