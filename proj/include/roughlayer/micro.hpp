#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "roughlayer/fem.hpp"
#include "roughlayer/geometry.hpp"
#include "roughlayer/mesh.hpp"
#include "roughlayer/viscosity.hpp"

namespace roughlayer {

enum class InflowFamily { Lin, Quad, Lin2 };

inline std::string to_string(InflowFamily f) {
    switch (f) {
        case InflowFamily::Lin: return "lin";
        case InflowFamily::Quad: return "quad";
        case InflowFamily::Lin2: return "lin2";
    }
    return "?";
}

/// Lateral inflow/outflow velocity profile as a function of the scaled
/// height x2/eps in [0,1].
inline Vec2 inflow_profile(InflowFamily family, double x2_scaled, double gamma0,
                           const Vec2& u_motion) {
    if (x2_scaled < -1e-12 || x2_scaled > 1.0 + 1e-12)
        throw std::domain_error("inflow_profile: x2/eps outside [0,1]");
    const double s = std::clamp(x2_scaled, 0.0, 1.0);
    double factor = 0.0;
    switch (family) {
        case InflowFamily::Lin:
            factor = s <= gamma0 ? 1.0 - s / gamma0 : 0.0;
            break;
        case InflowFamily::Quad:
            factor = s <= gamma0 ? 1.0 - (s / gamma0) * (s / gamma0) : 0.0;
            break;
        case InflowFamily::Lin2:
            factor = 1.0 - s;
            break;
    }
    return u_motion * factor;
}

/// Mean of the inflow profile over the scaled height (the effective
/// boundary flux of the homogenized model).
inline double effective_inflow(InflowFamily family, double gamma0) {
    if (!(gamma0 > 0.0 && gamma0 <= 1.0))
        throw std::invalid_argument("effective_inflow: gamma0 must be in (0,1]");
    switch (family) {
        case InflowFamily::Lin: return gamma0 / 2.0;
        case InflowFamily::Quad: return 2.0 * gamma0 / 3.0;
        case InflowFamily::Lin2: return 0.5;
    }
    return 0.0;
}

/// Full parameter set of one resolved or homogenized run.
struct ScenarioConfig {
    double kappa_s = 0.5;
    double kappa_f = 0.1;
    double alpha = 1.0;
    ViscosityLaw viscosity;
    RoughnessProfile profile{ProfileKind::Sine, 0.5};
    double epsilon = 0.2;
    InflowFamily inflow = InflowFamily::Lin;
    Vec2 u_motion{1.0, 0.0};
    // interface heat sources as functions of the physical point
    std::function<double(const Vec2&)> f_s;
    std::function<double(const Vec2&)> f_f;
    double t_end = 5.0;
    double dt = 0.05;
    double h_bulk = 0.03;
    double h_layer = 0.0;  // 0: defaults to h_bulk * epsilon
    double theta_init = 0.0;
    bool skip_stokes_if_constant_mu = true;

    double layer_resolution() const { return h_layer > 0.0 ? h_layer : h_bulk * epsilon; }

    /// Default solid interface source (1 - x2/eps)/(1 - gamma0): more heat
    /// produced at the tip of the roughness.
    static std::function<double(const Vec2&)> default_solid_source(double epsilon,
                                                                   double gamma0) {
        return [epsilon, gamma0](const Vec2& x) {
            return (1.0 - x.y / epsilon) / (1.0 - gamma0);
        };
    }

    void validate() const {
        if (!(kappa_s > 0.0 && kappa_f > 0.0 && alpha > 0.0))
            throw std::invalid_argument("ScenarioConfig: kappa_s, kappa_f, alpha must be positive");
        if (u_motion.y != 0.0)
            throw std::invalid_argument("ScenarioConfig: u_motion must be horizontal");
        if (!(dt > 0.0 && t_end >= 0.0 && h_bulk > 0.0))
            throw std::invalid_argument("ScenarioConfig: invalid time/space resolution");
        viscosity.validate();
    }
};

struct MicroState {
    DiscreteField theta_s;  // P1 on solid subdomain
    DiscreteField theta_f;  // P1 on fluid subdomain (duplicated interface DOFs)
    DiscreteField u;        // P2 2-vector on fluid
    DiscreteField p;        // P1 on fluid, zero mean
    double time = 0.0;
};

/// Resolved eps-scale solver: quasi-stationary Stokes with temperature
/// dependent viscosity alternating with an implicit Euler step of the
/// two-domain heat problem with Robin exchange across Gamma_eps.
class MicroSolver {
  public:
    explicit MicroSolver(const ScenarioConfig& config)
        : cfg_(config), domain_(build_layer_domain(config.profile, config.epsilon)) {
        cfg_.validate();
        mesh_ = std::make_shared<Mesh>(
            triangulate_micro(domain_, cfg_.h_bulk, cfg_.layer_resolution()));

        vel_ = std::make_shared<FunctionSpace>(*mesh_, ElementOrder::P2, 2, SubdomainTag::Fluid);
        pres_ = std::make_shared<FunctionSpace>(*mesh_, ElementOrder::P1, 1, SubdomainTag::Fluid);
        tf_space_ =
            std::make_shared<FunctionSpace>(*mesh_, ElementOrder::P1, 1, SubdomainTag::Fluid);
        ts_space_ =
            std::make_shared<FunctionSpace>(*mesh_, ElementOrder::P1, 1, SubdomainTag::Solid);

        const double eps = cfg_.epsilon;
        const double g0 = cfg_.profile.gamma0;
        auto lateral = [this, eps, g0](const Vec2& x, int c) {
            const Vec2 v = inflow_profile(cfg_.inflow, x.y / eps, g0, cfg_.u_motion);
            return c == 0 ? v.x : v.y;
        };
        vel_->set_dirichlet(BoundaryTag::Inflow, lateral);
        vel_->set_dirichlet(BoundaryTag::Outflow, lateral);
        vel_->set_dirichlet(BoundaryTag::RoughInterface, 0.0);
        vel_->set_dirichlet(BoundaryTag::Bottom, [this](const Vec2&, int c) {
            return c == 0 ? cfg_.u_motion.x : cfg_.u_motion.y;
        });
        tf_space_->set_dirichlet(BoundaryTag::Inflow, 0.0);

        state_.theta_s = DiscreteField(*ts_space_);
        state_.theta_f = DiscreteField(*tf_space_);
        state_.u = DiscreteField(*vel_);
        state_.p = DiscreteField(*pres_);
        for (auto& v : state_.theta_s.coef) v = cfg_.theta_init;
        for (auto& v : state_.theta_f.coef) v = cfg_.theta_init;
        // inflow Dirichlet also holds at t=0
        for (int d = 0; d < tf_space_->n_dofs(); ++d)
            if (tf_space_->constraints()[d].kind == FunctionSpace::Constraint::Fixed)
                state_.theta_f.coef[d] = tf_space_->constraints()[d].value;
    }

    const Mesh& mesh() const { return *mesh_; }
    const MicroState& state() const { return state_; }
    const FunctionSpace& velocity_space() const { return *vel_; }
    const FunctionSpace& pressure_space() const { return *pres_; }
    const FunctionSpace& fluid_space() const { return *tf_space_; }
    const FunctionSpace& solid_space() const { return *ts_space_; }
    const ScenarioConfig& config() const { return cfg_; }

    void stokes_step() {
        if (stokes_done_ && cfg_.skip_stokes_if_constant_mu && cfg_.viscosity.a == 0.0) return;
        LinearSystem sys;
        const int ov = sys.add_space(*vel_);
        const int op = sys.add_space(*pres_);
        auto mu = [this](int t, const Vec2& x) {
            const detail::ElementGeometry g(*mesh_, t);
            auto [l1, l2] = detail::barycentric(g, x);
            return cfg_.viscosity.evaluate(field_value(state_.theta_f, t, l1, l2));
        };
        assemble_stokes(*vel_, *pres_, mu, ov, op,
                        [&](int i, int j, double v) { sys.add(i, j, v); });
        sys.add_zero_mean(op, integral_weights(*pres_));
        const auto x = sys.solve();
        for (int d = 0; d < vel_->n_dofs(); ++d) state_.u.coef[d] = x[ov + d];
        for (int d = 0; d < pres_->n_dofs(); ++d) state_.p.coef[d] = x[op + d];
        stokes_done_ = true;
    }

    void heat_step() {
        const double eps = cfg_.epsilon;
        const double dt = cfg_.dt;
        LinearSystem sys;
        const int os = sys.add_space(*ts_space_);
        const int of = sys.add_space(*tf_space_);
        auto sink_s = [&](int i, int j, double v) { sys.add(os + i, os + j, v); };
        auto sink_f = [&](int i, int j, double v) { sys.add(of + i, of + j, v); };

        OperatorOptions o;
        o.coefficient = [dt](const Vec2&) { return 1.0 / dt; };
        assemble_operator(*ts_space_, OperatorKind::Mass, o, sink_s);
        o.coefficient = [this](const Vec2&) { return cfg_.kappa_s; };
        assemble_operator(*ts_space_, OperatorKind::Stiffness, o, sink_s);

        o.coefficient = [eps, dt](const Vec2&) { return 1.0 / (eps * dt); };
        assemble_operator(*tf_space_, OperatorKind::Mass, o, sink_f);
        o.coefficient = [this, eps](const Vec2&) { return cfg_.kappa_f / eps; };
        assemble_operator(*tf_space_, OperatorKind::Stiffness, o, sink_f);
        o.coefficient = [eps](const Vec2&) { return 1.0 / eps; };
        o.velocity = &state_.u;
        o.supg_kappa = cfg_.kappa_f;
        assemble_operator(*tf_space_, OperatorKind::Advection, o, sink_f);
        assemble_operator(*tf_space_, OperatorKind::Supg, o, sink_f);

        assemble_robin_coupling(*ts_space_, *tf_space_, BoundaryTag::RoughInterface, cfg_.alpha,
                                os, of, [&](int i, int j, double v) { sys.add(i, j, v); });

        // rhs: previous-step mass terms and interface sources
        {
            const auto ms = assemble_matrix(*ts_space_, OperatorKind::Mass);
            const auto prev = ms.multiply(state_.theta_s.coef);
            for (int d = 0; d < ts_space_->n_dofs(); ++d) sys.add_rhs(os + d, prev[d] / dt);
        }
        {
            const auto mf = assemble_matrix(*tf_space_, OperatorKind::Mass);
            const auto prev = mf.multiply(state_.theta_f.coef);
            for (int d = 0; d < tf_space_->n_dofs(); ++d)
                sys.add_rhs(of + d, prev[d] / (eps * dt));
        }
        if (cfg_.f_s)
            assemble_boundary_load(*ts_space_, BoundaryTag::RoughInterface, cfg_.f_s,
                                   [&](int i, double v) { sys.add_rhs(os + i, v); });
        if (cfg_.f_f)
            assemble_boundary_load(*tf_space_, BoundaryTag::RoughInterface, cfg_.f_f,
                                   [&](int i, double v) { sys.add_rhs(of + i, v); });

        const auto x = sys.solve();
        for (int d = 0; d < ts_space_->n_dofs(); ++d) state_.theta_s.coef[d] = x[os + d];
        for (int d = 0; d < tf_space_->n_dofs(); ++d) state_.theta_f.coef[d] = x[of + d];
    }

    void advance() {
        stokes_step();
        heat_step();
        state_.time += cfg_.dt;
        state_.theta_s.time = state_.theta_f.time = state_.u.time = state_.p.time = state_.time;
    }

    /// Boundary flux of the discrete velocity over the whole fluid boundary
    /// (mass balance diagnostic; should vanish).
    double boundary_flux() const {
        // directed edges of fluid triangles (CCW): edge (a,b) present means
        // the fluid lies left of a->b, so the outward normal is the
        // right-rotated tangent
        std::unordered_set<std::int64_t> directed;
        for (int t : vel_->elements()) {
            const auto& v = mesh_->triangles[t].v;
            for (int i = 0; i < 3; ++i)
                directed.insert(dkey(v[(i + 1) % 3], v[(i + 2) % 3]));
        }
        double flux = 0.0;
        for (const auto& e : mesh_->boundary_edges) {
            if (vel_->vertex_node(e.a) < 0 || vel_->vertex_node(e.b) < 0) continue;
            if (e.tag == BoundaryTag::SolidOuter) continue;
            double sign;
            if (directed.count(dkey(e.a, e.b)))
                sign = 1.0;
            else if (directed.count(dkey(e.b, e.a)))
                sign = -1.0;
            else
                continue;  // edge not on the fluid region
            const Vec2& a = mesh_->vertices[e.a];
            const Vec2& b = mesh_->vertices[e.b];
            const Vec2 tangent = b - a;
            const Vec2 n{tangent.y, -tangent.x};  // length = edge length
            const int nm = vel_->edge_node(e.a, e.b);
            double local = 0.0;
            for (const auto& gp : gauss3_unit) {
                const double s = gp.x;
                Vec2 u{0.0, 0.0};
                for (int c = 0; c < 2; ++c) {
                    const double v =
                        state_.u.coef[vel_->dof(vel_->vertex_node(e.a), c)] * (1.0 - s) *
                            (1.0 - 2.0 * s) +
                        state_.u.coef[vel_->dof(vel_->vertex_node(e.b), c)] * s * (2.0 * s - 1.0) +
                        state_.u.coef[vel_->dof(nm, c)] * 4.0 * s * (1.0 - s);
                    (c == 0 ? u.x : u.y) = v;
                }
                local += gp.w * u.dot(n);
            }
            flux += sign * local;
        }
        return flux;
    }

  private:
    ScenarioConfig cfg_;
    LayerDomain domain_;
    std::shared_ptr<Mesh> mesh_;
    std::shared_ptr<FunctionSpace> vel_, pres_, tf_space_, ts_space_;
    MicroState state_;
    bool stokes_done_ = false;

    static std::int64_t dkey(int a, int b) {
        return (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    }
};

/// Observer invoked once per completed time level (including t=0).
using MicroObserver = std::function<void(const MicroSolver&, const MicroState&)>;

inline void run_micro(MicroSolver& solver, const MicroObserver& observe) {
    const auto& cfg = solver.config();
    if (observe) observe(solver, solver.state());
    const int n_steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
    for (int n = 0; n < n_steps; ++n) {
        solver.advance();
        if (observe) observe(solver, solver.state());
    }
}

}  // namespace roughlayer
