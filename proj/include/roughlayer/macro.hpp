#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "roughlayer/cell.hpp"
#include "roughlayer/fem.hpp"
#include "roughlayer/mesh.hpp"
#include "roughlayer/micro.hpp"

namespace roughlayer {

/// Inputs of a homogenized run: effective coefficients plus the shared
/// scenario parameters; interface sources are functions of x1.
struct EffectiveScenario {
    EffectiveCoefficients coefficients;
    ScenarioConfig config;
    std::function<double(double)> f_bar_s;  // effective solid interface source
    std::function<double(double)> f_bar_f;  // effective fluid interface source

    double u_bar_bc() const {
        return effective_inflow(config.inflow, config.profile.gamma0) * config.u_motion.x;
    }

    void validate() const {
        config.validate();
        if (!(coefficients.K > 0.0))
            throw std::invalid_argument("EffectiveScenario: permeability K must be positive");
        if (!(coefficients.kappa_tilde > 0.0 && coefficients.z_volume > 0.0 &&
              coefficients.gamma_measure > 0.0))
            throw std::invalid_argument("EffectiveScenario: invalid effective coefficients");
    }
};

struct MacroState {
    DiscreteField theta_s;        // P1 on the bulk
    std::vector<double> theta_f;  // P1 nodal values on the interface
    std::vector<double> p;        // interface pressure, zero mean
    double u_bar = 0.0;           // constant effective velocity
    double time = 0.0;
};

/// Homogenized solver: 2D bulk heat coupled to a 1D interface
/// advection-diffusion equation with Robin-type exchange, plus the
/// Darcy-type pressure recovery along the interface.
class MacroSolver {
  public:
    explicit MacroSolver(const EffectiveScenario& scenario) : scn_(scenario) {
        scn_.validate();
        auto [bulk, iface] = triangulate_macro(scn_.config.h_bulk);
        bulk_ = std::make_shared<Mesh>(std::move(bulk));
        iface_ = std::move(iface);
        ts_space_ = std::make_shared<FunctionSpace>(*bulk_, ElementOrder::P1, 1);

        state_.theta_s = DiscreteField(*ts_space_);
        for (auto& v : state_.theta_s.coef) v = scn_.config.theta_init;
        state_.theta_f.assign(iface_.vertices.size(), scn_.config.theta_init);
        state_.theta_f[inflow_node()] = 0.0;
        state_.p.assign(iface_.vertices.size(), 0.0);
        darcy_update();  // initial pressure/velocity consistent with theta at t=0
    }

    const Mesh& bulk_mesh() const { return *bulk_; }
    const InterfaceMesh1D& interface_mesh() const { return iface_; }
    const FunctionSpace& bulk_space() const { return *ts_space_; }
    const MacroState& state() const { return state_; }
    const EffectiveScenario& scenario() const { return scn_; }

    int inflow_node() const { return 0; }  // interface vertices ascend from x1 = 0

    /// Constant effective velocity from the boundary flux and the pressure
    /// integral p' = mu(theta_f) (xi0_bar - u_bar) / K, gauged to zero mean.
    void darcy_update() {
        const auto& c = scn_.coefficients;
        state_.u_bar = scn_.u_bar_bc();
        const int n = static_cast<int>(iface_.vertices.size());
        state_.p.assign(n, 0.0);
        for (int i = 0; i + 1 < n; ++i) {
            const double a = iface_.vertices[i], b = iface_.vertices[i + 1];
            double inc = 0.0;
            for (const auto& gp : gauss3_unit) {
                const double tf = state_.theta_f[i] * (1.0 - gp.x) + state_.theta_f[i + 1] * gp.x;
                inc += gp.w * (b - a) * scn_.config.viscosity.evaluate(tf) *
                       (c.xi0_bar - state_.u_bar) / c.K;
            }
            state_.p[i + 1] = state_.p[i] + inc;
        }
        // subtract the trapezoidal mean (p is piecewise linear)
        double mean = 0.0, len = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            const double l = iface_.vertices[i + 1] - iface_.vertices[i];
            mean += l * 0.5 * (state_.p[i] + state_.p[i + 1]);
            len += l;
        }
        mean /= len;
        for (auto& v : state_.p) v -= mean;
    }

    void heat_step() {
        const auto& c = scn_.coefficients;
        const double dt = scn_.config.dt;
        const int n1 = static_cast<int>(iface_.vertices.size());

        LinearSystem sys;
        const int os = sys.add_space(*ts_space_);
        const int of = sys.add_block(n1);
        sys.fix(of + inflow_node(), 0.0);

        OperatorOptions o;
        o.coefficient = [dt](const Vec2&) { return 1.0 / dt; };
        assemble_operator(*ts_space_, OperatorKind::Mass, o,
                          [&](int i, int j, double v) { sys.add(os + i, os + j, v); });
        o.coefficient = [this](const Vec2&) { return scn_.config.kappa_s; };
        assemble_operator(*ts_space_, OperatorKind::Stiffness, o,
                          [&](int i, int j, double v) { sys.add(os + i, os + j, v); });
        {
            const auto ms = assemble_matrix(*ts_space_, OperatorKind::Mass);
            const auto prev = ms.multiply(state_.theta_s.coef);
            for (int d = 0; d < ts_space_->n_dofs(); ++d) sys.add_rhs(os + d, prev[d] / dt);
        }

        // 1D interface operators per segment
        for (const auto& seg : iface_.segments) {
            const int a = seg[0], b = seg[1];
            const double l = iface_.vertices[b] - iface_.vertices[a];
            const double zm = c.z_volume / dt;
            const double m11 = zm * l / 3.0, m12 = zm * l / 6.0;
            sys.add(of + a, of + a, m11);
            sys.add(of + a, of + b, m12);
            sys.add(of + b, of + a, m12);
            sys.add(of + b, of + b, m11);
            sys.add_rhs(of + a, m11 * state_.theta_f[a] + m12 * state_.theta_f[b]);
            sys.add_rhs(of + b, m12 * state_.theta_f[a] + m11 * state_.theta_f[b]);

            const double k = c.kappa_tilde / l;
            sys.add(of + a, of + a, k);
            sys.add(of + a, of + b, -k);
            sys.add(of + b, of + a, -k);
            sys.add(of + b, of + b, k);

            const double u = state_.u_bar;
            // (u d1 theta, psi): d1 theta = (tb - ta)/l, integral of psi = l/2
            sys.add(of + a, of + a, -u / 2.0);
            sys.add(of + a, of + b, u / 2.0);
            sys.add(of + b, of + a, -u / 2.0);
            sys.add(of + b, of + b, u / 2.0);

            const double tau = supg_tau(std::abs(u), l, c.kappa_tilde);
            const double s = tau * u * u / l;
            sys.add(of + a, of + a, s);
            sys.add(of + a, of + b, -s);
            sys.add(of + b, of + a, -s);
            sys.add(of + b, of + b, s);

            // sources (f_bar_s, phi) + (f_bar_f, psi) over the segment
            for (const auto& gp : gauss3_unit) {
                const double x1 = iface_.vertices[a] + gp.x * l;
                const double w = gp.w * l;
                if (scn_.f_bar_f) {
                    sys.add_rhs(of + a, w * scn_.f_bar_f(x1) * (1.0 - gp.x));
                    sys.add_rhs(of + b, w * scn_.f_bar_f(x1) * gp.x);
                }
                if (scn_.f_bar_s) {
                    const int ba = os + ts_space_->vertex_node(iface_.trace_to_bulk[a]);
                    const int bb = os + ts_space_->vertex_node(iface_.trace_to_bulk[b]);
                    sys.add_rhs(ba, w * scn_.f_bar_s(x1) * (1.0 - gp.x));
                    sys.add_rhs(bb, w * scn_.f_bar_s(x1) * gp.x);
                }
            }

            // exchange alpha |Gamma| (theta_s - theta_f, phi - psi) over Sigma
            const double ag = scn_.config.alpha * c.gamma_measure;
            const double e11 = ag * l / 3.0, e12 = ag * l / 6.0;
            const int ba = os + ts_space_->vertex_node(iface_.trace_to_bulk[a]);
            const int bb = os + ts_space_->vertex_node(iface_.trace_to_bulk[b]);
            const int fa = of + a, fb = of + b;
            const int S[2] = {ba, bb};
            const int F[2] = {fa, fb};
            const double E[2][2] = {{e11, e12}, {e12, e11}};
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    sys.add(S[i], S[j], E[i][j]);
                    sys.add(F[i], F[j], E[i][j]);
                    sys.add(S[i], F[j], -E[i][j]);
                    sys.add(F[i], S[j], -E[i][j]);
                }
        }

        const auto x = sys.solve();
        for (int d = 0; d < ts_space_->n_dofs(); ++d) state_.theta_s.coef[d] = x[os + d];
        for (int i = 0; i < n1; ++i) state_.theta_f[i] = x[of + i];
    }

    void advance() {
        darcy_update();
        heat_step();
        state_.time += scn_.config.dt;
        state_.theta_s.time = state_.time;
    }

  private:
    EffectiveScenario scn_;
    std::shared_ptr<Mesh> bulk_;
    InterfaceMesh1D iface_;
    std::shared_ptr<FunctionSpace> ts_space_;
    MacroState state_;
};

using MacroObserver = std::function<void(const MacroSolver&, const MacroState&)>;

inline void run_macro(MacroSolver& solver, const MacroObserver& observe) {
    const auto& cfg = solver.scenario().config;
    if (observe) observe(solver, solver.state());
    const int n_steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
    for (int n = 0; n < n_steps; ++n) {
        solver.advance();
        if (observe) observe(solver, solver.state());
    }
}

}  // namespace roughlayer
