#include <catch2/catch_amalgamated.hpp>

#include "roughlayer/cell.hpp"

using namespace roughlayer;

TEST_CASE("flat channel coefficients match the closed forms") {
    const double g0 = 0.5, kf = 0.1;
    const CellGeometry geom = build_cell_geometry(RoughnessProfile{ProfileKind::Flat, g0});
    // all three cell solutions are polynomial on a rectangle, so even a
    // coarse mesh reproduces them to solver accuracy
    const CellSolutions s = solve_cell_problems(geom, 0.05, kf);
    CHECK_THAT(s.coefficients.kappa_tilde, Catch::Matchers::WithinRel(kf * g0, 1e-8));
    CHECK_THAT(s.coefficients.K, Catch::Matchers::WithinRel(g0 * g0 * g0 / 12.0, 1e-8));
    CHECK_THAT(s.coefficients.xi0_bar, Catch::Matchers::WithinRel(g0 / 2.0, 1e-8));
    CHECK_THAT(s.coefficients.z_volume, Catch::Matchers::WithinRel(g0, 1e-12));
    CHECK_THAT(s.coefficients.gamma_measure, Catch::Matchers::WithinRel(1.0, 1e-12));
}

TEST_CASE("cell flows have no net vertical transport") {
    const CellGeometry geom = build_cell_geometry(RoughnessProfile{ProfileKind::Sine, 0.5});
    const CellSolutions s = solve_cell_problems(geom, 0.04, 0.1);
    CHECK_THAT(s.coefficients.xi_vertical_mean, Catch::Matchers::WithinAbs(0.0, 1e-8));
    CHECK_THAT(s.coefficients.xi0_vertical_mean, Catch::Matchers::WithinAbs(0.0, 1e-8));
}

TEST_CASE("sine cell coefficients land near their reference values") {
    const CellGeometry geom = build_cell_geometry(RoughnessProfile{ProfileKind::Sine, 0.5});
    const CellSolutions s = solve_cell_problems(geom, 0.03, 0.1);
    CHECK_THAT(s.coefficients.kappa_tilde / 0.1, Catch::Matchers::WithinRel(0.630, 0.03));
    CHECK_THAT(s.coefficients.K, Catch::Matchers::WithinRel(0.01704, 0.08));
    CHECK_THAT(s.coefficients.xi0_bar, Catch::Matchers::WithinRel(0.2871, 0.05));
}

TEST_CASE("refining the cell mesh leaves the coefficients nearly unchanged") {
    const CellGeometry geom = build_cell_geometry(RoughnessProfile{ProfileKind::Rect, 0.5});
    const CellSolutions coarse = solve_cell_problems(geom, 0.05, 0.1);
    const CellSolutions fine = solve_cell_problems(geom, 0.025, 0.1);
    CHECK_THAT(coarse.coefficients.kappa_tilde,
               Catch::Matchers::WithinRel(fine.coefficients.kappa_tilde, 0.02));
    CHECK_THAT(coarse.coefficients.K, Catch::Matchers::WithinRel(fine.coefficients.K, 0.06));
    CHECK_THAT(coarse.coefficients.xi0_bar,
               Catch::Matchers::WithinRel(fine.coefficients.xi0_bar, 0.03));
}

TEST_CASE("interface averaging weights by arclength") {
    const CellGeometry flat = build_cell_geometry(RoughnessProfile{ProfileKind::Flat, 0.5});
    // flat interface: plain average of f along y2 = gamma0
    CHECK_THAT(effective_interface_source(flat, [](const Vec2&) { return 3.0; }),
               Catch::Matchers::WithinRel(3.0, 1e-12));
    CHECK_THAT(effective_interface_source(flat, [](const Vec2& p) { return p.y; }),
               Catch::Matchers::WithinRel(0.5, 1e-12));
    const CellGeometry sine = build_cell_geometry(RoughnessProfile{ProfileKind::Sine, 0.5});
    const double len = effective_interface_source(sine, [](const Vec2&) { return 1.0; });
    CHECK(len > 1.0);  // raw arclength integral of 1 exceeds the base length
}

TEST_CASE("degenerate cell requests are rejected") {
    CHECK_THROWS_AS(solve_cell_problems(
                        build_cell_geometry(RoughnessProfile{ProfileKind::Flat, 1.0}), 0.05, 0.1),
                    std::invalid_argument);
    const CellGeometry geom = build_cell_geometry(RoughnessProfile{ProfileKind::Sine, 0.5});
    const Mesh mesh = triangulate_cell(geom, 0.05);
    CHECK_THROWS_AS(solve_motion_cell(mesh, {1.0, 0.5}), std::invalid_argument);
}
