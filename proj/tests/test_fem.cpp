#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "roughlayer/fem.hpp"

using namespace roughlayer;

namespace {

std::pair<Mesh, InterfaceMesh1D> macro10() { return triangulate_macro(0.1); }

}  // namespace

TEST_CASE("integral weights sum to the mesh area") {
    const auto [mesh, line] = macro10();
    const FunctionSpace p1(mesh, ElementOrder::P1, 1);
    const FunctionSpace p2(mesh, ElementOrder::P2, 1);
    for (const auto* s : {&p1, &p2}) {
        const auto w = integral_weights(*s);
        double sum = 0.0;
        for (double v : w) sum += v;
        CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("field evaluation reproduces an interpolated linear function") {
    const auto [mesh, line] = macro10();
    const FunctionSpace space(mesh, ElementOrder::P2, 1);
    DiscreteField f(space);
    for (int n = 0; n < space.n_nodes(); ++n) {
        const Vec2 p = space.node_position(n);
        f.coef[space.dof(n)] = 2.0 * p.x + 3.0 * p.y - 1.0;
    }
    for (int t : space.elements()) {
        const double v = field_value(f, t, 0.3, 0.2);
        const detail::ElementGeometry g(mesh, t);
        const Vec2 x = g.point(0.5, 0.3, 0.2);
        CHECK_THAT(v, Catch::Matchers::WithinAbs(2.0 * x.x + 3.0 * x.y - 1.0, 1e-13));
        const Vec2 grad = field_gradient(f, t, 0.3, 0.2);
        CHECK_THAT(grad.x, Catch::Matchers::WithinAbs(2.0, 1e-11));
        CHECK_THAT(grad.y, Catch::Matchers::WithinAbs(3.0, 1e-11));
    }
}

TEST_CASE("stiffness annihilates constants and mass integrates to the area") {
    const auto [mesh, line] = macro10();
    const FunctionSpace space(mesh, ElementOrder::P1, 1);
    const SparseMatrix K = assemble_matrix(space, OperatorKind::Stiffness);
    const std::vector<double> ones(space.n_dofs(), 1.0);
    for (double v : K.multiply(ones)) CHECK_THAT(v, Catch::Matchers::WithinAbs(0.0, 1e-12));
    const SparseMatrix M = assemble_matrix(space, OperatorKind::Mass);
    const auto r = M.multiply(ones);
    double total = 0.0;
    for (double v : r) total += v;
    CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("Laplace problem with a linear exact solution is solved exactly") {
    const auto [mesh, line] = macro10();
    FunctionSpace space(mesh, ElementOrder::P1, 1);
    const auto exact = [](const Vec2& p) { return 2.0 * p.x + 3.0 * p.y - 1.0; };
    space.set_dirichlet(BoundaryTag::Bottom, [&](const Vec2& p, int) { return exact(p); });
    space.set_dirichlet(BoundaryTag::SolidOuter, [&](const Vec2& p, int) { return exact(p); });

    LinearSystem sys;
    sys.add_space(space);
    assemble_operator(space, OperatorKind::Stiffness, {},
                      [&](int i, int j, double v) { sys.add(i, j, v); });
    const auto x = sys.solve();
    for (int n = 0; n < space.n_nodes(); ++n)
        CHECK_THAT(x[space.dof(n)],
                   Catch::Matchers::WithinAbs(exact(space.node_position(n)), 1e-10));
}

TEST_CASE("zero-mean gauge pins the Neumann problem") {
    const auto [mesh, line] = macro10();
    const FunctionSpace space(mesh, ElementOrder::P1, 1);
    LinearSystem sys;
    sys.add_space(space);
    assemble_operator(space, OperatorKind::Stiffness, {},
                      [&](int i, int j, double v) { sys.add(i, j, v); });
    // compatible load: zero mean over the square
    assemble_load(space, [](const Vec2& p) { return p.x - 0.5; },
                  [&](int i, double v) { sys.add_rhs(i, v); });
    const auto w = integral_weights(space);
    sys.add_zero_mean(0, w);
    const auto x = sys.solve();
    double mean = 0.0;
    for (int i = 0; i < space.n_dofs(); ++i) mean += w[i] * x[i];
    CHECK_THAT(mean, Catch::Matchers::WithinAbs(0.0, 1e-10));
    // the solution is nontrivial
    double norm = 0.0;
    for (double v : x) norm += v * v;
    CHECK(norm > 1e-6);
}

TEST_CASE("point locator returns barycentric coordinates of the query") {
    const auto [mesh, line] = macro10();
    const FunctionSpace space(mesh, ElementOrder::P1, 1);
    const PointLocator loc(mesh, space.elements());
    for (const Vec2 p : {Vec2{0.33, 0.77}, Vec2{0.011, 0.5}, Vec2{1.0, 1.0}}) {
        const auto hit = loc.locate(p);
        const detail::ElementGeometry g(mesh, hit.tri);
        const Vec2 q = g.point(1.0 - hit.l1 - hit.l2, hit.l1, hit.l2);
        CHECK_THAT((q - p).norm(), Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
    CHECK_THROWS_AS(loc.locate({5.0, 5.0}), std::runtime_error);
}

TEST_CASE("interface exchange block is symmetric PSD and vanishes on equal traces") {
    const LayerDomain domain =
        build_layer_domain(RoughnessProfile{ProfileKind::Sine, 0.5}, 0.2);
    const Mesh mesh = triangulate_micro(domain, 0.1, 0.02);
    const FunctionSpace fluid(mesh, ElementOrder::P1, 1, SubdomainTag::Fluid);
    const FunctionSpace solid(mesh, ElementOrder::P1, 1, SubdomainTag::Solid);
    const int off_s = fluid.n_dofs();
    const int n = fluid.n_dofs() + solid.n_dofs();

    std::vector<TripletEntry> trips;
    assemble_robin_coupling(fluid, solid, BoundaryTag::RoughInterface, 1.0, 0, off_s,
                            [&](int i, int j, double v) { trips.push_back({i, j, v}); });
    const SparseMatrix C = SparseMatrix::from_triplets(n, n, trips);

    // symmetry via random vectors
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = uni(rng);
            y[i] = uni(rng);
        }
        const auto Cx = C.multiply(x);
        const auto Cy = C.multiply(y);
        double yCx = 0.0, xCy = 0.0, xCx = 0.0;
        for (int i = 0; i < n; ++i) {
            yCx += y[i] * Cx[i];
            xCy += x[i] * Cy[i];
            xCx += x[i] * Cx[i];
        }
        CHECK_THAT(yCx, Catch::Matchers::WithinAbs(xCy, 1e-10));
        CHECK(xCx >= -1e-12);  // positive semidefinite
    }

    // kernel: equal traces on both sides of the interface
    std::vector<double> eq(n, 0.0);
    for (const auto& e : mesh.boundary_edges) {
        if (e.tag != BoundaryTag::RoughInterface) continue;
        for (int v : {e.a, e.b}) {
            const double g = std::sin(3.0 * mesh.vertices[v].x);
            eq[fluid.dof(fluid.vertex_node(v))] = g;
            eq[off_s + solid.dof(solid.vertex_node(v))] = g;
        }
    }
    for (double v : C.multiply(eq)) CHECK_THAT(v, Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("plane Couette flow is reproduced exactly") {
    const auto [mesh, line] = macro10();
    FunctionSpace vel(mesh, ElementOrder::P2, 2);
    const FunctionSpace pres(mesh, ElementOrder::P1, 1);
    const auto exact = [](const Vec2& p, int c) { return c == 0 ? p.y : 0.0; };
    vel.set_dirichlet(BoundaryTag::Bottom, exact);
    vel.set_dirichlet(BoundaryTag::SolidOuter, exact);

    LinearSystem sys;
    const int off_v = sys.add_space(vel);
    const int off_p = sys.add_space(pres);
    assemble_stokes(vel, pres, [](int, const Vec2&) { return 0.7; }, off_v, off_p,
                    [&](int i, int j, double v) { sys.add(i, j, v); });
    sys.add_zero_mean(off_p, integral_weights(pres));
    const auto x = sys.solve();
    for (int nd = 0; nd < vel.n_nodes(); ++nd) {
        const Vec2 p = vel.node_position(nd);
        CHECK_THAT(x[off_v + vel.dof(nd, 0)], Catch::Matchers::WithinAbs(p.y, 1e-10));
        CHECK_THAT(x[off_v + vel.dof(nd, 1)], Catch::Matchers::WithinAbs(0.0, 1e-10));
    }
    for (int nd = 0; nd < pres.n_nodes(); ++nd)
        CHECK_THAT(x[off_p + pres.dof(nd)], Catch::Matchers::WithinAbs(0.0, 1e-9));
}

TEST_CASE("plane Poiseuille flow recovers the linear pressure") {
    const auto [mesh, line] = macro10();
    FunctionSpace vel(mesh, ElementOrder::P2, 2);
    const FunctionSpace pres(mesh, ElementOrder::P1, 1);
    const double mu = 0.3, c = 2.0;
    const auto exact = [&](const Vec2& p, int comp) {
        return comp == 0 ? c * p.y * (1.0 - p.y) : 0.0;
    };
    vel.set_dirichlet(BoundaryTag::Bottom, exact);
    vel.set_dirichlet(BoundaryTag::SolidOuter, exact);

    LinearSystem sys;
    const int off_v = sys.add_space(vel);
    const int off_p = sys.add_space(pres);
    assemble_stokes(vel, pres, [&](int, const Vec2&) { return mu; }, off_v, off_p,
                    [&](int i, int j, double v) { sys.add(i, j, v); });
    sys.add_zero_mean(off_p, integral_weights(pres));
    const auto x = sys.solve();
    // -mu u'' + p' = 0 with u = c y(1-y) gives p = -2 mu c (x - 1/2)
    for (int nd = 0; nd < pres.n_nodes(); ++nd) {
        const Vec2 p = pres.node_position(nd);
        CHECK_THAT(x[off_p + pres.dof(nd)],
                   Catch::Matchers::WithinAbs(-2.0 * mu * c * (p.x - 0.5), 1e-9));
    }
    for (int nd = 0; nd < vel.n_nodes(); ++nd) {
        const Vec2 p = vel.node_position(nd);
        CHECK_THAT(x[off_v + vel.dof(nd, 0)],
                   Catch::Matchers::WithinAbs(exact(p, 0), 1e-9));
        CHECK_THAT(x[off_v + vel.dof(nd, 1)], Catch::Matchers::WithinAbs(0.0, 1e-9));
    }
}

TEST_CASE("streamline stabilization time scale has the classical limits") {
    CHECK(supg_tau(0.0, 0.1, 1.0) == 0.0);
    // diffusion dominated: tau -> h^2/(12 kappa)
    CHECK_THAT(supg_tau(1e-4, 0.1, 1.0),
               Catch::Matchers::WithinRel(0.1 * 0.1 / 12.0, 1e-3));
    // advection dominated: tau -> h/(2|v|)
    CHECK_THAT(supg_tau(1000.0, 0.1, 1.0),
               Catch::Matchers::WithinRel(0.1 / 2000.0, 3e-2));
    // scalar advection needs a velocity field
    const auto [mesh, line] = macro10();
    const FunctionSpace space(mesh, ElementOrder::P1, 1);
    CHECK_THROWS_AS(assemble_matrix(space, OperatorKind::Advection), std::invalid_argument);
}
