#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "roughlayer/cell.hpp"
#include "roughlayer/macro.hpp"
#include "roughlayer/micro.hpp"

namespace roughlayer {

/// Value and first derivative of a piecewise linear interface field at x1.
struct InterfaceTrace {
    double value = 0.0;
    double slope = 0.0;
};

inline InterfaceTrace interface_interp(const InterfaceMesh1D& iface,
                                       const std::vector<double>& nodal, double x1) {
    const auto& xs = iface.vertices;
    if (xs.size() < 2 || nodal.size() != xs.size())
        throw std::invalid_argument("interface_interp: inconsistent interface data");
    auto it = std::upper_bound(xs.begin(), xs.end(), x1);
    int i = static_cast<int>(it - xs.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(xs.size()) - 2);
    const double l = xs[i + 1] - xs[i];
    const double s = (x1 - xs[i]) / l;
    InterfaceTrace tr;
    tr.slope = (nodal[i + 1] - nodal[i]) / l;
    tr.value = nodal[i] * (1.0 - s) + nodal[i + 1] * s;
    return tr;
}

/// First-order cell-scale temperature correction omega(y) * d1 theta_f.
inline double corrector_theta1(double d1_theta_f, double omega_at_y) {
    return omega_at_y * d1_theta_f;
}

/// Pointwise evaluation of the periodic cell solutions at scaled
/// coordinates y = (x1/eps mod 1, x2/eps), combined with macro interface
/// traces into resolved-scale reconstructions of temperature, pressure
/// and velocity in the fluid layer.
class Reconstruction {
  public:
    Reconstruction(const CellSolutions& cells, const ViscosityLaw& law, double epsilon,
                   double u_bar)
        : cells_(&cells), law_(law), eps_(epsilon),
          darcy_ratio_((cells.coefficients.xi0_bar - u_bar) / cells.coefficients.K),
          locator_(*cells.mesh, cells.conduction.space->elements()) {
        if (!(epsilon > 0.0)) throw std::invalid_argument("Reconstruction: epsilon must be > 0");
    }

    double epsilon() const { return eps_; }

    /// Scaled cell coordinates of a physical point; the lateral coordinate
    /// wraps periodically into [0,1).
    Vec2 scale(const Vec2& x) const {
        double y1 = x.x / eps_;
        y1 -= std::floor(y1);
        return {y1, x.y / eps_};
    }

    PointLocator::Hit locate_cell(const Vec2& y) const { return locator_.locate(y); }

    /// All time-independent cell values needed at one point.
    struct CellValues {
        double omega = 0.0;  // conduction corrector
        Vec2 xi{0.0, 0.0};   // permeability velocity corrector
        double eta = 0.0;    // permeability pressure corrector
        Vec2 xi0{0.0, 0.0};  // motion-induced velocity
        double eta0 = 0.0;   // motion-induced pressure
    };

    CellValues cell_values(const Vec2& y) const {
        const auto hit = locator_.locate(y);
        CellValues v;
        v.omega = field_value(cells_->conduction.omega, hit.tri, hit.l1, hit.l2);
        v.xi = field_vector(cells_->permeability.xi, hit.tri, hit.l1, hit.l2);
        v.eta = field_value(cells_->permeability.eta, hit.tri, hit.l1, hit.l2);
        v.xi0 = field_vector(cells_->motion.xi, hit.tri, hit.l1, hit.l2);
        v.eta0 = field_value(cells_->motion.eta, hit.tri, hit.l1, hit.l2);
        return v;
    }

    /// theta_f + eps * omega(y) * d1 theta_f
    double theta_f_rec(const CellValues& cv, const InterfaceTrace& theta_f) const {
        return theta_f.value + eps_ * corrector_theta1(theta_f.slope, cv.omega);
    }

    /// p + eps * mu(theta_f) * (eta0(y) - eta(y) * (xi0_bar - u_bar)/K),
    /// comparable to eps^2 p_eps. The mu factor comes from inserting the
    /// velocity representation into the two-pressure Stokes momentum
    /// balance: with unit-viscosity cell pressures the first-order pressure
    /// is mu (eta0 - eta d1 p / mu) and d1 p / mu equals (xi0_bar - u_bar)/K
    /// exactly by the interface Darcy law, so that ratio is evaluated in
    /// closed form (dividing a segment-averaged discrete slope by a
    /// pointwise mu is numerically unstable when mu varies steeply).
    double p_rec(const CellValues& cv, const InterfaceTrace& p,
                 const InterfaceTrace& theta_f) const {
        const double mu = law_.evaluate(theta_f.value);
        return p.value + eps_ * mu * (cv.eta0 - cv.eta * darcy_ratio_);
    }

    /// xi0(y) - xi(y)/mu * d1 p, comparable to the resolved velocity; the
    /// same closed-form Darcy ratio applies.
    Vec2 u_rec(const CellValues& cv) const { return cv.xi0 - cv.xi * darcy_ratio_; }

  private:
    const CellSolutions* cells_;
    ViscosityLaw law_;
    double eps_;
    double darcy_ratio_;
    PointLocator locator_;
};

/// Space-time L2 errors of one resolved run against its reconstruction:
/// fluid quantities over the fluid layer, solid temperature over the
/// resolved solid region.
struct ScenarioErrors {
    double theta_f = 0.0;
    double p = 0.0;
    double u = 0.0;
    double theta_s = 0.0;
};

/// Accumulates squared L2 differences between resolved fields and their
/// reconstruction over matched time levels. Quadrature geometry and the
/// time-independent cell values are cached at construction.
class ErrorAccumulator {
  public:
    ErrorAccumulator(const MicroSolver& micro, const MacroSolver& macro,
                     const CellSolutions& cells)
        : rec_(cells, micro.config().viscosity, micro.config().epsilon,
               macro.scenario().u_bar_bc()) {
        const auto& mesh = micro.mesh();
        for (int t : micro.fluid_space().elements()) {
            const detail::ElementGeometry g(mesh, t);
            for (const auto& qp : tri_quad_deg4) {
                FluidPoint fp;
                fp.tri = t;
                fp.l1 = qp.a;
                fp.l2 = qp.b;
                fp.w = qp.w * 2.0 * g.area;
                const Vec2 x = point_of(mesh, t, qp.a, qp.b);
                fp.x1 = x.x;
                fp.cv = rec_.cell_values(rec_.scale(x));
                fluid_.push_back(fp);
            }
        }
        PointLocator bulk(macro.bulk_mesh(), macro.bulk_space().elements());
        for (int t : micro.solid_space().elements()) {
            const detail::ElementGeometry g(mesh, t);
            for (const auto& qp : tri_quad_deg4) {
                SolidPoint sp;
                sp.tri = t;
                sp.l1 = qp.a;
                sp.l2 = qp.b;
                sp.w = qp.w * 2.0 * g.area;
                sp.macro = bulk.locate(point_of(mesh, t, qp.a, qp.b));
                solid_.push_back(sp);
            }
        }
        pdiff_.resize(fluid_.size());
    }

    /// Adds weight * integral of squared differences at one time level.
    /// Pressures are compared in a common gauge (both shifted to zero mean
    /// over the fluid layer) since each is only defined up to a constant.
    void accumulate(const MicroState& ms, const MacroState& mas, double weight) {
        const double eps2 = rec_.epsilon() * rec_.epsilon();
        const auto& iface = *iface_;
        double parea = 0.0, pmean = 0.0;
        for (std::size_t k = 0; k < fluid_.size(); ++k) {
            const auto& fp = fluid_[k];
            const InterfaceTrace tf = interface_interp(iface, mas.theta_f, fp.x1);
            const InterfaceTrace pr = interface_interp(iface, mas.p, fp.x1);

            const double dtf =
                field_value(ms.theta_f, fp.tri, fp.l1, fp.l2) - rec_.theta_f_rec(fp.cv, tf);
            const Vec2 du = field_vector(ms.u, fp.tri, fp.l1, fp.l2) - rec_.u_rec(fp.cv);
            sq_theta_f_ += weight * fp.w * dtf * dtf;
            sq_u_ += weight * fp.w * du.dot(du);

            pdiff_[k] =
                eps2 * field_value(ms.p, fp.tri, fp.l1, fp.l2) - rec_.p_rec(fp.cv, pr, tf);
            parea += fp.w;
            pmean += fp.w * pdiff_[k];
        }
        pmean /= parea;
        for (std::size_t k = 0; k < fluid_.size(); ++k) {
            const double d = pdiff_[k] - pmean;
            sq_p_ += weight * fluid_[k].w * d * d;
        }
        for (const auto& sp : solid_) {
            const double d = field_value(ms.theta_s, sp.tri, sp.l1, sp.l2) -
                             field_value(mas.theta_s, sp.macro.tri, sp.macro.l1, sp.macro.l2);
            sq_theta_s_ += weight * sp.w * d * d;
        }
    }

    void bind_interface(const InterfaceMesh1D& iface) { iface_ = &iface; }

    ScenarioErrors finish() const {
        return {std::sqrt(sq_theta_f_), std::sqrt(sq_p_), std::sqrt(sq_u_),
                std::sqrt(sq_theta_s_)};
    }

  private:
    struct FluidPoint {
        int tri;
        double l1, l2, w, x1;
        Reconstruction::CellValues cv;
    };
    struct SolidPoint {
        int tri;
        double l1, l2, w;
        PointLocator::Hit macro;
    };

    static Vec2 point_of(const Mesh& mesh, int t, double l1, double l2) {
        const auto& v = mesh.triangles[t].v;
        const Vec2& a = mesh.vertices[v[0]];
        const Vec2& b = mesh.vertices[v[1]];
        const Vec2& c = mesh.vertices[v[2]];
        return a * (1.0 - l1 - l2) + b * l1 + c * l2;
    }

    Reconstruction rec_;
    const InterfaceMesh1D* iface_ = nullptr;
    std::vector<FluidPoint> fluid_;
    std::vector<SolidPoint> solid_;
    std::vector<double> pdiff_;
    double sq_theta_f_ = 0.0, sq_p_ = 0.0, sq_u_ = 0.0, sq_theta_s_ = 0.0;
};

/// Builds the homogenized scenario matching a resolved configuration: the
/// effective coefficients come from the cell solutions, the effective
/// interface sources are arclength integrals of the resolved sources over
/// the cell graph.
inline EffectiveScenario make_effective_scenario(const ScenarioConfig& cfg,
                                                 const CellSolutions& cells) {
    EffectiveScenario scn;
    scn.coefficients = cells.coefficients;
    scn.config = cfg;
    const CellGeometry geom = build_cell_geometry(cfg.profile);
    const double eps = cfg.epsilon;
    if (cfg.f_s)
        scn.f_bar_s = [geom, eps, f = cfg.f_s](double x1) {
            return effective_interface_source(geom,
                                              [&](const Vec2& y) { return f({x1, eps * y.y}); });
        };
    if (cfg.f_f)
        scn.f_bar_f = [geom, eps, f = cfg.f_f](double x1) {
            return effective_interface_source(geom,
                                              [&](const Vec2& y) { return f({x1, eps * y.y}); });
        };
    return scn;
}

/// Runs the resolved and homogenized solvers in lockstep and returns the
/// space-time L2 errors between the resolved fields and the corrector
/// reconstruction. Time integration is a right-endpoint rule over steps.
inline ScenarioErrors compute_scenario_errors(
    const ScenarioConfig& cfg, const CellSolutions& cells,
    const std::function<void(int, int)>& progress = {}, double macro_h = 0.0) {
    MicroSolver micro(cfg);
    EffectiveScenario scn = make_effective_scenario(cfg, cells);
    // the homogenized solution should be mesh-converged relative to the
    // eps-dependent differences being measured; allow a finer macro mesh
    if (macro_h > 0.0) scn.config.h_bulk = macro_h;
    MacroSolver macro(scn);
    ErrorAccumulator acc(micro, macro, cells);
    acc.bind_interface(macro.interface_mesh());
    const int n_steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
    for (int n = 0; n < n_steps; ++n) {
        micro.advance();
        macro.advance();
        acc.accumulate(micro.state(), macro.state(), cfg.dt);
        if (progress) progress(n + 1, n_steps);
    }
    return acc.finish();
}

/// Least-squares slope of log(error) against log(eps).
inline double fit_order(const std::map<double, double>& errors) {
    if (errors.size() < 2)
        throw std::invalid_argument("fit_order: need at least two (eps, error) pairs");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [e, v] : errors) {
        if (!(e > 0.0 && v > 0.0))
            throw std::invalid_argument("fit_order: eps and errors must be positive");
        const double x = std::log(e), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(errors.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct ConvergencePoint {
    double eps = 0.0;
    ScenarioErrors errors;
    double seconds = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergencePoint> points;
    double slope_theta_f = 0.0;
    double slope_p = 0.0;
    double slope_u = 0.0;
    double slope_theta_s = 0.0;
};

/// eps-sweep: solves the cell problems once, then runs the paired
/// resolved/homogenized scenario for each eps and fits log-log slopes.
inline ConvergenceReport run_convergence(
    const ScenarioConfig& base, const std::vector<double>& eps_list, double cell_h,
    const std::function<void(double, const ScenarioErrors&)>& on_point = {},
    const std::function<void(ScenarioConfig&)>& configure = {}, double macro_h = 0.0) {
    if (eps_list.size() < 2)
        throw std::invalid_argument("run_convergence: need at least two eps values");
    const CellGeometry geom = build_cell_geometry(base.profile);
    const CellSolutions cells = solve_cell_problems(geom, cell_h, base.kappa_f, base.u_motion);

    ConvergenceReport rep;
    std::map<double, double> etf, ep, eu, ets;
    for (double eps : eps_list) {
        ScenarioConfig cfg = base;
        cfg.epsilon = eps;
        // sources usually depend on eps through the layer height; rebuild
        // them per sweep point (default: the reference solid source)
        if (configure)
            configure(cfg);
        else if (cfg.f_s)
            cfg.f_s = ScenarioConfig::default_solid_source(eps, cfg.profile.gamma0);
        const auto t0 = std::chrono::steady_clock::now();
        const ScenarioErrors err = compute_scenario_errors(cfg, cells, {}, macro_h);
        const double sec = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - t0).count();
        rep.points.push_back({eps, err, sec});
        etf[eps] = err.theta_f;
        ep[eps] = err.p;
        eu[eps] = err.u;
        ets[eps] = err.theta_s;
        if (on_point) on_point(eps, err);
    }
    rep.slope_theta_f = fit_order(etf);
    rep.slope_p = fit_order(ep);
    rep.slope_u = fit_order(eu);
    rep.slope_theta_s = fit_order(ets);
    return rep;
}

}  // namespace roughlayer
