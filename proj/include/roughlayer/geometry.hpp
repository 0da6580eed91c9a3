#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughlayer/quadrature.hpp"

namespace roughlayer {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

enum class ProfileKind { Sine, Rect, Flat };

inline std::string to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::Sine: return "sine";
        case ProfileKind::Rect: return "rect";
        case ProfileKind::Flat: return "flat";
    }
    return "?";
}

/// Periodic roughness graph gamma: [0,1] -> [gamma0, 1].
/// The fluid cell is Z = {(y1,y2) : 0 < y2 < gamma(y1)}, the interface
/// Gamma is the full graph of gamma.
struct RoughnessProfile {
    ProfileKind kind = ProfileKind::Flat;
    double gamma0 = 0.5;

    RoughnessProfile() = default;
    RoughnessProfile(ProfileKind k, double g0) : kind(k), gamma0(g0) {
        if (!(gamma0 > 0.0 && gamma0 <= 1.0))
            throw std::invalid_argument("RoughnessProfile: gamma0 must be in (0,1]");
    }

    double evaluate(double x1) const {
        if (x1 < 0.0 || x1 > 1.0)
            throw std::domain_error("RoughnessProfile::evaluate: x1 outside [0,1]");
        switch (kind) {
            case ProfileKind::Flat:
                return gamma0;
            case ProfileKind::Sine: {
                if (x1 < 0.1 || x1 > 0.9) return 1.0;
                const double arg =
                    2.0 * std::numbers::pi * (x1 - 0.1) / 0.8 - std::numbers::pi / 2.0;
                return 1.0 - 0.5 * (1.0 - gamma0) * (std::sin(arg) + 1.0);
            }
            case ProfileKind::Rect: {
                if (x1 < 0.1 || x1 > 0.9) return 1.0;
                if (x1 < 0.2) {
                    const double t = (x1 - 0.1) / 0.1;
                    return 1.0 - (1.0 - gamma0) * smoothstep(t);
                }
                if (x1 <= 0.8) return gamma0;
                const double t = (x1 - 0.8) / 0.1;
                return gamma0 + (1.0 - gamma0) * smoothstep(t);
            }
        }
        return gamma0;
    }

    /// One-sided derivative of the graph (used for arclength quadrature and
    /// boundary point spacing; evaluated away from breakpoints).
    double derivative(double x1) const {
        switch (kind) {
            case ProfileKind::Flat:
                return 0.0;
            case ProfileKind::Sine: {
                if (x1 < 0.1 || x1 > 0.9) return 0.0;
                const double arg =
                    2.0 * std::numbers::pi * (x1 - 0.1) / 0.8 - std::numbers::pi / 2.0;
                return -0.5 * (1.0 - gamma0) * std::cos(arg) * 2.0 * std::numbers::pi / 0.8;
            }
            case ProfileKind::Rect: {
                if (x1 < 0.1 || x1 > 0.9) return 0.0;
                if (x1 < 0.2) {
                    const double t = (x1 - 0.1) / 0.1;
                    return -(1.0 - gamma0) * smoothstep_deriv(t) / 0.1;
                }
                if (x1 <= 0.8) return 0.0;
                const double t = (x1 - 0.8) / 0.1;
                return (1.0 - gamma0) * smoothstep_deriv(t) / 0.1;
            }
        }
        return 0.0;
    }

    /// Endpoints of the smooth pieces of gamma, used as exact panel edges
    /// for quadrature and as mandatory mesh points.
    std::vector<double> breakpoints() const {
        switch (kind) {
            case ProfileKind::Flat: return {0.0, 1.0};
            case ProfileKind::Sine: return {0.0, 0.1, 0.9, 1.0};
            case ProfileKind::Rect: return {0.0, 0.1, 0.2, 0.8, 0.9, 1.0};
        }
        return {0.0, 1.0};
    }

  private:
    static double smoothstep(double t) { return -2.0 * t * t * t + 3.0 * t * t; }
    static double smoothstep_deriv(double t) { return -6.0 * t * t + 6.0 * t; }
};

inline double evaluate_profile(const RoughnessProfile& profile, double x1) {
    return profile.evaluate(x1);
}

/// Exact (quadrature-level) description of the periodic reference cell Z.
struct CellGeometry {
    RoughnessProfile profile;
    double fluid_area = 0.0;        // |Z|
    double interface_length = 0.0;  // |Gamma|, arclength of the graph
};

/// Composite Gauss quadrature of f over [0,1] using the profile's exact
/// piece boundaries as panel edges; n is the total number of panels.
template <typename F>
double quadrature_over_profile(const RoughnessProfile& profile, int n, F&& f) {
    const auto bps = profile.breakpoints();
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < bps.size(); ++k) {
        const double a = bps[k], b = bps[k + 1];
        const int panels = std::max(1, static_cast<int>(std::ceil((b - a) * n)));
        const double dx = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            const double x0 = a + p * dx;
            for (const auto& gp : gauss5_unit) total += gp.w * dx * f(x0 + gp.x * dx);
        }
    }
    return total;
}

inline CellGeometry build_cell_geometry(const RoughnessProfile& profile, int quadrature_n = 64) {
    if (quadrature_n < 16)
        throw std::invalid_argument("build_cell_geometry: quadrature_n >= 16 required");
    CellGeometry g;
    g.profile = profile;
    g.fluid_area =
        quadrature_over_profile(profile, quadrature_n, [&](double x) { return profile.evaluate(x); });
    g.interface_length = quadrature_over_profile(profile, quadrature_n, [&](double x) {
        const double d = profile.derivative(x);
        return std::sqrt(1.0 + d * d);
    });
    return g;
}

/// The eps-scaled rough layer inside Omega = (0,1)^2, prior to meshing.
struct LayerDomain {
    RoughnessProfile profile;
    double epsilon = 0.1;
    int cell_count = 10;            // 1/epsilon
    double sigma_extent = 1.0;      // width of Sigma
    // inflow is the left lateral boundary, outflow the right one
    // unless flipped here.
    bool inflow_left = true;

    /// Height of the rough interface Gamma_eps above x1.
    double interface_height(double x1) const {
        double s = x1 / epsilon;
        double frac = s - std::floor(s);
        if (x1 >= sigma_extent) frac = 1.0;
        return epsilon * profile.evaluate(frac);
    }
};

inline LayerDomain build_layer_domain(const RoughnessProfile& profile, double epsilon,
                                      bool inflow_left = true) {
    const double n_real = 1.0 / epsilon;
    const int n = static_cast<int>(std::lround(n_real));
    if (n < 2 || std::abs(n_real - n) > 1e-9)
        throw std::invalid_argument("build_layer_domain: 1/epsilon must be an integer >= 2");
    LayerDomain d;
    d.profile = profile;
    d.epsilon = 1.0 / n;
    d.cell_count = n;
    d.inflow_left = inflow_left;
    return d;
}

}  // namespace roughlayer
