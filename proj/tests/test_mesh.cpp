#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "roughlayer/mesh.hpp"

using namespace roughlayer;

TEST_CASE("cell mesh covers the fluid cell with positive well-shaped triangles") {
    const RoughnessProfile prof{ProfileKind::Sine, 0.5};
    const CellGeometry geom = build_cell_geometry(prof);
    const Mesh mesh = triangulate_cell(geom, 0.05);

    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
        REQUIRE(mesh.triangle_area(t) > 0.0);
    // area under the sine profile: 0.6 + 0.4 gamma0, boundary faceting is O(h^2)
    CHECK_THAT(mesh.total_area(), Catch::Matchers::WithinAbs(0.8, 5e-3));
    CHECK(mesh.min_angle_deg() > 18.0);
    CHECK(mesh.boundary_length(BoundaryTag::CellBottom) == 1.0);
}

TEST_CASE("cell mesh lateral boundaries pair up periodically") {
    const RoughnessProfile prof{ProfileKind::Rect, 0.4};
    const CellGeometry geom = build_cell_geometry(prof);
    const Mesh mesh = triangulate_cell(geom, 0.04);
    REQUIRE_FALSE(mesh.periodic_pairs.empty());
    for (const auto& [l, r] : mesh.periodic_pairs) {
        CHECK(mesh.vertices[l].x == 0.0);
        CHECK(mesh.vertices[r].x == 1.0);
        CHECK(mesh.vertices[l].y == mesh.vertices[r].y);
    }
}

TEST_CASE("cell mesh rejects out-of-range target sizes") {
    const CellGeometry geom = build_cell_geometry(RoughnessProfile{ProfileKind::Sine, 0.5});
    CHECK_THROWS_AS(triangulate_cell(geom, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(triangulate_cell(geom, 0.3), std::invalid_argument);  // >= gamma0/2
}

TEST_CASE("micro mesh partitions the unit square into fluid and solid") {
    const LayerDomain domain =
        build_layer_domain(RoughnessProfile{ProfileKind::Sine, 0.5}, 0.2);
    const Mesh mesh = triangulate_micro(domain, 0.1, 0.02);

    const double fluid = mesh.subdomain_area(SubdomainTag::Fluid);
    const double solid = mesh.subdomain_area(SubdomainTag::Solid);
    CHECK_THAT(fluid + solid, Catch::Matchers::WithinAbs(1.0, 1e-10));
    // fluid layer area = eps * cell area
    CHECK_THAT(fluid, Catch::Matchers::WithinAbs(0.2 * 0.8, 2e-3));

    CHECK_THAT(mesh.boundary_length(BoundaryTag::Bottom),
               Catch::Matchers::WithinAbs(1.0, 1e-12));
    // lateral fluid edges reach up to eps * gamma(0) = eps (flat collar)
    CHECK_THAT(mesh.boundary_length(BoundaryTag::Inflow),
               Catch::Matchers::WithinAbs(0.2, 1e-12));
    CHECK_THAT(mesh.boundary_length(BoundaryTag::Outflow),
               Catch::Matchers::WithinAbs(0.2, 1e-12));
    // the rough interface is a graph over (0,1): at least as long as its base
    CHECK(mesh.boundary_length(BoundaryTag::RoughInterface) > 1.0);
    CHECK(mesh.min_angle_deg() > 15.0);
}

TEST_CASE("micro mesh validates its resolution parameters") {
    const LayerDomain domain =
        build_layer_domain(RoughnessProfile{ProfileKind::Sine, 0.5}, 0.2);
    CHECK_THROWS_AS(triangulate_micro(domain, 0.1, 0.06), std::invalid_argument);
    CHECK_THROWS_AS(triangulate_micro(domain, 0.3, 0.02), std::invalid_argument);
}

TEST_CASE("macro mesh is a unit square plus a shared interface line") {
    const auto [mesh, line] = triangulate_macro(0.1);
    CHECK_THAT(mesh.total_area(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK(mesh.min_angle_deg() > 40.0);  // structured grid

    REQUIRE(line.vertices.size() >= 2);
    CHECK(line.vertices.front() == 0.0);
    CHECK(line.vertices.back() == 1.0);
    for (std::size_t i = 1; i < line.vertices.size(); ++i)
        CHECK(line.vertices[i] > line.vertices[i - 1]);
    REQUIRE(line.segments.size() == line.vertices.size() - 1);
    REQUIRE(line.trace_to_bulk.size() == line.vertices.size());
    for (std::size_t i = 0; i < line.vertices.size(); ++i) {
        const Vec2 v = mesh.vertices[line.trace_to_bulk[i]];
        CHECK(v.y == 0.0);
        CHECK(v.x == line.vertices[i]);
    }
    CHECK_THROWS_AS(triangulate_macro(0.2), std::invalid_argument);
}

TEST_CASE("mesh dump is a parsable vertex and triangle listing") {
    const auto [mesh, line] = triangulate_macro(0.1);
    std::istringstream in(dump_mesh(mesh));
    int nv = 0, nt = 0;
    REQUIRE(in >> nv >> nt);
    REQUIRE(nv == static_cast<int>(mesh.vertices.size()));
    REQUIRE(nt == static_cast<int>(mesh.triangles.size()));
    for (int i = 0; i < nv; ++i) {
        double x, y;
        REQUIRE(in >> x >> y);
        CHECK(x == mesh.vertices[i].x);  // %.17g round-trips doubles exactly
        CHECK(y == mesh.vertices[i].y);
    }
    for (int i = 0; i < nt; ++i) {
        int a, b, c, tag;
        REQUIRE(in >> a >> b >> c >> tag);
        CHECK(a == mesh.triangles[i].v[0]);
        CHECK(tag == static_cast<int>(mesh.triangles[i].tag));
    }
}
