#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roughlayer {

/// Vogel-Fulcher-Tammann viscosity mu0 exp(a/(theta - T0)), restricted to a
/// clamp interval that excludes the singularity at T0 and extended by its
/// boundary values; constant law when a = 0. Bounded and Lipschitz on all
/// of R by construction.
struct ViscosityLaw {
    double mu0 = 0.2;
    double a = 3.0;
    double T0 = 0.6;
    double clamp_lo = 0.0;
    double clamp_hi = 0.5;

    void validate() const {
        if (!(mu0 > 0.0)) throw std::invalid_argument("ViscosityLaw: mu0 must be positive");
        if (!(clamp_lo < clamp_hi))
            throw std::invalid_argument("ViscosityLaw: empty clamp interval");
        if (a != 0.0 && clamp_lo <= T0 && T0 <= clamp_hi)
            throw std::invalid_argument("ViscosityLaw: clamp interval contains T0 singularity");
    }

    static ViscosityLaw constant(double mu) { return {mu, 0.0, 0.6, 0.0, 0.5}; }

    double evaluate(double theta) const {
        const double t = std::clamp(theta, clamp_lo, clamp_hi);
        if (a == 0.0) return mu0;
        return mu0 * std::exp(a / (t - T0));
    }

    double lower_bound() const { return std::min(evaluate(clamp_lo), evaluate(clamp_hi)); }
    double upper_bound() const { return std::max(evaluate(clamp_lo), evaluate(clamp_hi)); }

    /// Lipschitz constant: max |mu'| over the clamp interval. |mu'| as a
    /// function of d = |t - T0| has one interior critical point at d = a/2,
    /// so the max is over both endpoints and that point when it lies inside.
    double lipschitz_constant() const {
        if (a == 0.0) return 0.0;
        auto dmu = [&](double t) { return std::abs(a) * evaluate(t) / ((t - T0) * (t - T0)); };
        double m = std::max(dmu(clamp_lo), dmu(clamp_hi));
        for (double tc : {T0 - std::abs(a) / 2.0, T0 + std::abs(a) / 2.0})
            if (tc > clamp_lo && tc < clamp_hi) m = std::max(m, dmu(tc));
        return m;
    }
};

inline double vft_viscosity(const ViscosityLaw& law, double theta) {
    return law.evaluate(theta);
}

}  // namespace roughlayer
