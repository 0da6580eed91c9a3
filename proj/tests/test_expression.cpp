#include <catch2/catch_amalgamated.hpp>

#include "roughlayer/expression.hpp"

using namespace roughlayer;

TEST_CASE("operator precedence and associativity") {
    CHECK(evaluate_expression("2+3*4", {}) == 14.0);
    CHECK(evaluate_expression("(2+3)*4", {}) == 20.0);
    CHECK(evaluate_expression("2*3^2", {}) == 18.0);
    CHECK(evaluate_expression("-2^2", {}) == -4.0);
    CHECK(evaluate_expression("1/2", {}) == 0.5);
    CHECK(evaluate_expression("8-4-2", {}) == 2.0);
    CHECK(evaluate_expression("2^3^2", {}) == 512.0);  // right-associative power
}

TEST_CASE("functions and constants") {
    CHECK_THAT(evaluate_expression("sin(pi)", {}), Catch::Matchers::WithinAbs(0.0, 1e-15));
    CHECK_THAT(evaluate_expression("cos(0)", {}), Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK(evaluate_expression("sqrt(4)", {}) == 2.0);
    CHECK(evaluate_expression("abs(-3)", {}) == 3.0);
    CHECK(evaluate_expression("exp(0)", {}) == 1.0);
}

TEST_CASE("variables come from the environment") {
    const ExprEnv env{0.25, 0.1, 0.05, 0.5};
    CHECK(evaluate_expression("x1", env) == 0.25);
    CHECK(evaluate_expression("x2", env) == 0.1);
    CHECK(evaluate_expression("eps", env) == 0.05);
    CHECK(evaluate_expression("gamma0", env) == 0.5);
    CHECK_THAT(evaluate_expression("x1 + x2*eps", env),
               Catch::Matchers::WithinRel(0.25 + 0.1 * 0.05, 1e-15));
}

TEST_CASE("reference solid source expression") {
    const std::string src = "(1 - x2/eps)/(1 - gamma0)";
    ExprEnv env{0.5, 0.0, 0.1, 0.5};
    CHECK_THAT(evaluate_expression(src, env), Catch::Matchers::WithinRel(2.0, 1e-14));
    env.x2 = env.eps;  // at the crest the source vanishes
    CHECK_THAT(evaluate_expression(src, env), Catch::Matchers::WithinAbs(0.0, 1e-14));
}

TEST_CASE("malformed expressions report the position") {
    CHECK_THROWS_WITH(Expression("x3"), Catch::Matchers::ContainsSubstring("x3"));
    CHECK_THROWS_WITH(Expression("2+"), Catch::Matchers::ContainsSubstring("position"));
    CHECK_THROWS_AS(Expression("sin 3"), std::invalid_argument);
    CHECK_THROWS_AS(Expression("(1+2"), std::invalid_argument);
    CHECK_THROWS_AS(Expression("1+2)"), std::invalid_argument);
    CHECK_THROWS_AS(Expression(""), std::invalid_argument);
}

TEST_CASE("empty expression object cannot be evaluated") {
    Expression e;
    CHECK_FALSE(e.valid());
    CHECK_THROWS_AS(e({}), std::logic_error);
}
