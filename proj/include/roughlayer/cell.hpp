#pragma once

#include <functional>
#include <memory>
#include <stdexcept>

#include "roughlayer/fem.hpp"
#include "roughlayer/geometry.hpp"
#include "roughlayer/mesh.hpp"

namespace roughlayer {

/// Effective coefficients of the homogenized model extracted from the three
/// periodic cell problems on Z.
struct EffectiveCoefficients {
    double kappa_tilde = 0.0;   // effective conductivity
    double K = 0.0;             // effective permeability
    double xi0_bar = 0.0;       // motion-induced mean flow
    double z_volume = 0.0;      // |Z|
    double gamma_measure = 0.0; // |Gamma|
    double f_bar_s = 0.0;       // effective solid interface source
    double f_bar_f = 0.0;       // effective fluid interface source
    // diagnostics: vertical means, zero by symmetry of the cell problems
    double xi_vertical_mean = 0.0;
    double xi0_vertical_mean = 0.0;
};

struct ConductionCellResult {
    std::shared_ptr<FunctionSpace> space;
    DiscreteField omega;
    double kappa_tilde = 0.0;
};

struct StokesCellResult {
    std::shared_ptr<FunctionSpace> vel_space;
    std::shared_ptr<FunctionSpace> pres_space;
    DiscreteField xi;   // 2-vector velocity corrector
    DiscreteField eta;  // zero-mean pressure corrector
    double mean_x = 0.0;  // integral of xi . e1 over Z
    double mean_y = 0.0;  // integral of xi . e2 over Z (should vanish)
};

namespace detail {

inline double integrate_component(const DiscreteField& f, int comp) {
    const FunctionSpace& s = *f.space;
    double total = 0.0;
    for (int t : s.elements()) {
        const ElementGeometry g(s.mesh(), t);
        for (const auto& qp : tri_quad_deg4)
            total += qp.w * 2.0 * g.area * field_value(f, t, qp.a, qp.b, comp);
    }
    return total;
}

}  // namespace detail

/// Periodic Neumann cell problem: find omega with zero mean over Z such
/// that (grad omega + e1, grad phi)_Z = 0; the effective conductivity is
/// kappa_tilde = kappa_f * integral of (1 + d_{y1} omega).
inline ConductionCellResult solve_conduction_cell(const Mesh& cell_mesh, double kappa_f) {
    ConductionCellResult r;
    r.space = std::make_shared<FunctionSpace>(cell_mesh, ElementOrder::P1, 1);
    r.space->set_periodic();

    LinearSystem sys;
    sys.add_space(*r.space);
    assemble_operator(*r.space, OperatorKind::Stiffness, {},
                      [&](int i, int j, double v) { sys.add(i, j, v); });
    // rhs -(e1, grad phi)
    for (int t : r.space->elements()) {
        const detail::ElementGeometry g(cell_mesh, t);
        const auto nodes = r.space->element_nodes(t);
        for (int i = 0; i < 3; ++i)
            sys.add_rhs(r.space->dof(nodes[i]), -g.area * g.grad_lambda[i].x);
    }
    sys.add_zero_mean(0, integral_weights(*r.space));

    const auto x = sys.solve();
    r.omega = DiscreteField(*r.space);
    for (int d = 0; d < r.space->n_dofs(); ++d) r.omega.coef[d] = x[d];

    double integral = 0.0;
    for (int t : r.space->elements()) {
        const detail::ElementGeometry g(cell_mesh, t);
        const Vec2 grad = field_gradient(r.omega, t, 1.0 / 3.0, 1.0 / 3.0);
        integral += g.area * (1.0 + grad.x);
    }
    r.kappa_tilde = kappa_f * integral;
    return r;
}

namespace detail {

/// Shared Taylor-Hood cell Stokes solve with unit viscosity, periodic
/// laterals, Dirichlet bottom/graph data and an optional constant body
/// force; pressure gauge is zero mean.
inline StokesCellResult solve_cell_stokes(const Mesh& cell_mesh, const Vec2& bottom_velocity,
                                          const Vec2& body_force) {
    StokesCellResult r;
    r.vel_space = std::make_shared<FunctionSpace>(cell_mesh, ElementOrder::P2, 2);
    r.pres_space = std::make_shared<FunctionSpace>(cell_mesh, ElementOrder::P1, 1);
    r.vel_space->set_dirichlet(BoundaryTag::RoughInterface, 0.0);
    r.vel_space->set_dirichlet(BoundaryTag::CellBottom, [&](const Vec2&, int c) {
        return c == 0 ? bottom_velocity.x : bottom_velocity.y;
    });
    r.vel_space->set_periodic();
    r.pres_space->set_periodic();

    LinearSystem sys;
    const int ov = sys.add_space(*r.vel_space);
    const int op = sys.add_space(*r.pres_space);
    assemble_stokes(*r.vel_space, *r.pres_space, [](int, const Vec2&) { return 1.0; }, ov, op,
                    [&](int i, int j, double v) { sys.add(i, j, v); });
    if (body_force.x != 0.0 || body_force.y != 0.0)
        assemble_vector_load(*r.vel_space, [&](const Vec2&) { return body_force; }, ov,
                             [&](int i, double v) { sys.add_rhs(i, v); });
    sys.add_zero_mean(op, integral_weights(*r.pres_space));

    const auto x = sys.solve();
    r.xi = DiscreteField(*r.vel_space);
    for (int d = 0; d < r.vel_space->n_dofs(); ++d) r.xi.coef[d] = x[ov + d];
    r.eta = DiscreteField(*r.pres_space);
    for (int d = 0; d < r.pres_space->n_dofs(); ++d) r.eta.coef[d] = x[op + d];
    r.mean_x = integrate_component(r.xi, 0);
    r.mean_y = integrate_component(r.xi, 1);
    return r;
}

}  // namespace detail

/// -Delta xi - grad eta = e1, div xi = 0, no-slip on Gamma_d, periodic
/// laterals; K = integral of xi . e1 over Z.
inline StokesCellResult solve_permeability_cell(const Mesh& cell_mesh) {
    return detail::solve_cell_stokes(cell_mesh, {0.0, 0.0}, {1.0, 0.0});
}

/// Homogeneous Stokes with xi0 = u_motion on the cell bottom and 0 on the
/// graph; xi0_bar = integral of xi0 . e1 over Z.
inline StokesCellResult solve_motion_cell(const Mesh& cell_mesh, const Vec2& u_motion) {
    if (u_motion.y != 0.0)
        throw std::invalid_argument(
            "solve_motion_cell: u_motion must be horizontal (incompatible with "
            "incompressibility otherwise)");
    return detail::solve_cell_stokes(cell_mesh, u_motion, {0.0, 0.0});
}

/// Arclength integral of f(y) over the graph of gamma.
inline double effective_interface_source(const CellGeometry& geom,
                                         const std::function<double(const Vec2&)>& f,
                                         int quadrature_n = 64) {
    return quadrature_over_profile(geom.profile, quadrature_n, [&](double x) {
        const double y2 = geom.profile.evaluate(x);
        const double d = geom.profile.derivative(x);
        return f({x, y2}) * std::sqrt(1.0 + d * d);
    });
}

/// All three cell solutions plus the extracted coefficients, sharing one
/// cell mesh.
struct CellSolutions {
    std::shared_ptr<Mesh> mesh;
    ConductionCellResult conduction;
    StokesCellResult permeability;
    StokesCellResult motion;
    EffectiveCoefficients coefficients;
};

inline CellSolutions solve_cell_problems(const CellGeometry& geom, double h, double kappa_f,
                                         const Vec2& u_motion = {1.0, 0.0}) {
    if (!(geom.profile.gamma0 < 1.0))
        throw std::invalid_argument("solve_cell_problems: gamma0 < 1 required");
    CellSolutions s;
    s.mesh = std::make_shared<Mesh>(triangulate_cell(geom, h));
    s.conduction = solve_conduction_cell(*s.mesh, kappa_f);
    s.permeability = solve_permeability_cell(*s.mesh);
    s.motion = solve_motion_cell(*s.mesh, u_motion);

    s.coefficients.kappa_tilde = s.conduction.kappa_tilde;
    s.coefficients.K = s.permeability.mean_x;
    s.coefficients.xi0_bar = s.motion.mean_x;
    s.coefficients.z_volume = geom.fluid_area;
    s.coefficients.gamma_measure = geom.interface_length;
    s.coefficients.xi_vertical_mean = s.permeability.mean_y;
    s.coefficients.xi0_vertical_mean = s.motion.mean_y;
    return s;
}

}  // namespace roughlayer
