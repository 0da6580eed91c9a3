#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughlayer/expression.hpp"
#include "roughlayer/micro.hpp"

namespace roughlayer {

/// Configuration error with the offending key/assumption in the message.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Full parsed run configuration: the scenario plus driver options that do
/// not belong to the model itself.
struct RunConfig {
    ScenarioConfig scenario;
    // source expressions, kept for re-binding at other eps; the default
    // solid source puts more heat at the tip of the roughness
    std::string f_s_expr = "(1 - x2/eps)/(1 - gamma0)";
    std::string f_f_expr;
    double cell_h = 0.01;
    std::vector<double> eps_list{0.2, 0.1, 0.05};
    std::vector<double> field_output_times;
    bool dump_mesh = false;
    std::vector<std::string> warnings;

    /// Binds a source expression at a given eps/gamma0 (sources are
    /// evaluated at physical points, with eps and gamma0 as parameters).
    static std::function<double(const Vec2&)> bind_source(const std::string& expr, double eps,
                                                          double gamma0) {
        if (expr.empty()) return {};
        Expression e(expr);
        return [e, eps, gamma0](const Vec2& x) {
            return e({x.x, x.y, eps, gamma0});
        };
    }

    /// Rebuilds the scenario sources for the given eps (used by sweeps).
    void rebind_sources(ScenarioConfig& cfg) const {
        cfg.f_s = bind_source(f_s_expr, cfg.epsilon, cfg.profile.gamma0);
        cfg.f_f = bind_source(f_f_expr, cfg.epsilon, cfg.profile.gamma0);
    }
};

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    std::string unknown;
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
    if (!unknown.empty())
        throw ConfigError("unknown config key(s) in " + where + ": " + unknown);
}

inline double number(const nlohmann::json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError("config key \"" + key + "\" must be a number");
    return j[key].get<double>();
}

}  // namespace detail

/// Parses a JSON configuration into a RunConfig with reference defaults for
/// every omitted key, rejecting unknown keys and violations of the model
/// assumptions with explicit diagnostics.
inline RunConfig parse_config_json(const nlohmann::json& j) {
    using nlohmann::json;
    detail::require_keys(
        j,
        {"kappa_s", "kappa_f", "alpha", "viscosity", "profile", "gamma0", "epsilon", "inflow",
         "u_motion", "f_s", "f_f", "t_end", "dt", "h_bulk", "h_layer", "theta_init", "cell_h",
         "eps_list", "field_output_times", "dump_mesh"},
        "top level");

    RunConfig rc;
    ScenarioConfig& c = rc.scenario;
    c.kappa_s = detail::number(j, "kappa_s", c.kappa_s);
    c.kappa_f = detail::number(j, "kappa_f", c.kappa_f);
    c.alpha = detail::number(j, "alpha", c.alpha);
    if (!(c.kappa_s > 0.0 && c.kappa_f > 0.0 && c.alpha > 0.0))
        throw ConfigError("A1: alpha, kappa_f, kappa_s must all be positive");

    if (j.contains("viscosity")) {
        const json& v = j["viscosity"];
        if (!v.is_object()) throw ConfigError("config key \"viscosity\" must be an object");
        detail::require_keys(v, {"type", "mu", "mu0", "a", "T0", "clamp"}, "viscosity");
        const std::string type = v.value("type", "vft");
        if (type == "constant") {
            const double mu = detail::number(v, "mu", 0.2);
            if (!(mu > 0.0)) throw ConfigError("A2: constant viscosity must be positive");
            c.viscosity = ViscosityLaw::constant(mu);
        } else if (type == "vft") {
            c.viscosity.mu0 = detail::number(v, "mu0", c.viscosity.mu0);
            c.viscosity.a = detail::number(v, "a", c.viscosity.a);
            c.viscosity.T0 = detail::number(v, "T0", c.viscosity.T0);
            if (v.contains("clamp")) {
                if (!v["clamp"].is_array() || v["clamp"].size() != 2)
                    throw ConfigError("viscosity clamp must be an array [lo, hi]");
                c.viscosity.clamp_lo = v["clamp"][0].get<double>();
                c.viscosity.clamp_hi = v["clamp"][1].get<double>();
            }
        } else {
            throw ConfigError("unknown viscosity type \"" + type +
                              "\" (expected \"vft\" or \"constant\")");
        }
        try {
            c.viscosity.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("A2: ") + e.what());
        }
    }

    const double gamma0 = detail::number(j, "gamma0", 0.5);
    std::string profile = "sine";
    if (j.contains("profile")) {
        if (!j["profile"].is_string()) throw ConfigError("config key \"profile\" must be a string");
        profile = j["profile"].get<std::string>();
    }
    ProfileKind kind;
    if (profile == "sine") kind = ProfileKind::Sine;
    else if (profile == "rect") kind = ProfileKind::Rect;
    else if (profile == "flat") kind = ProfileKind::Flat;
    else throw ConfigError("unknown profile \"" + profile + "\" (expected sine, rect or flat)");
    try {
        c.profile = RoughnessProfile(kind, gamma0);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }

    c.epsilon = detail::number(j, "epsilon", c.epsilon);
    if (!(c.epsilon > 0.0)) throw ConfigError("epsilon must be positive");

    if (j.contains("inflow")) {
        if (!j["inflow"].is_string()) throw ConfigError("config key \"inflow\" must be a string");
        const std::string s = j["inflow"].get<std::string>();
        if (s == "lin") c.inflow = InflowFamily::Lin;
        else if (s == "quad") c.inflow = InflowFamily::Quad;
        else if (s == "lin2") c.inflow = InflowFamily::Lin2;
        else throw ConfigError("unknown inflow \"" + s + "\" (expected lin, quad or lin2)");
    }
    if (c.inflow == InflowFamily::Lin2)
        rc.warnings.push_back(
            "A5: lin2 inflow does not vanish above the roughness crest; the lateral "
            "boundary data is not compatible with the no-slip graph condition (accepted "
            "for comparison runs)");

    if (j.contains("u_motion")) {
        const json& u = j["u_motion"];
        if (u.is_number()) {
            c.u_motion = {u.get<double>(), 0.0};
        } else if (u.is_array() && u.size() == 2) {
            c.u_motion = {u[0].get<double>(), u[1].get<double>()};
        } else {
            throw ConfigError("config key \"u_motion\" must be a number or [x, y]");
        }
    }
    if (c.u_motion.y != 0.0)
        throw ConfigError("A5: u_motion must be horizontal (u_motion . e2 = 0)");

    c.t_end = detail::number(j, "t_end", c.t_end);
    c.dt = detail::number(j, "dt", c.dt);
    c.h_bulk = detail::number(j, "h_bulk", c.h_bulk);
    c.h_layer = detail::number(j, "h_layer", c.h_layer);
    c.theta_init = detail::number(j, "theta_init", c.theta_init);
    if (!std::isfinite(c.theta_init))
        throw ConfigError("A3: initial temperature must be finite");
    if (!(c.dt > 0.0 && c.t_end >= 0.0 && c.h_bulk > 0.0))
        throw ConfigError("dt and h_bulk must be positive, t_end nonnegative");

    for (const char* key : {"f_s", "f_f"}) {
        if (!j.contains(key)) continue;
        if (!j[key].is_string())
            throw ConfigError(std::string("config key \"") + key +
                              "\" must be an expression string");
        const std::string expr = j[key].get<std::string>();
        if (expr.empty()) {  // explicit empty string disables the source
            (std::string(key) == "f_s" ? rc.f_s_expr : rc.f_f_expr).clear();
            continue;
        }
        try {
            Expression probe(expr);
            const double v = probe({0.5, 0.5 * c.epsilon, c.epsilon, gamma0});
            if (!std::isfinite(v))
                throw ConfigError(std::string("A4: source ") + key +
                                  " is not finite on the interface");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(std::string("invalid ") + key + ": " + e.what());
        }
        (std::string(key) == "f_s" ? rc.f_s_expr : rc.f_f_expr) = expr;
    }
    rc.rebind_sources(c);

    rc.cell_h = detail::number(j, "cell_h", rc.cell_h);
    if (!(rc.cell_h > 0.0)) throw ConfigError("cell_h must be positive");
    if (j.contains("eps_list")) {
        if (!j["eps_list"].is_array() || j["eps_list"].empty())
            throw ConfigError("eps_list must be a non-empty array of numbers");
        rc.eps_list.clear();
        for (const auto& e : j["eps_list"]) {
            if (!e.is_number() || !(e.get<double>() > 0.0))
                throw ConfigError("eps_list entries must be positive numbers");
            rc.eps_list.push_back(e.get<double>());
        }
    }
    if (j.contains("field_output_times")) {
        if (!j["field_output_times"].is_array())
            throw ConfigError("field_output_times must be an array of numbers");
        for (const auto& t : j["field_output_times"])
            rc.field_output_times.push_back(t.get<double>());
    }
    if (j.contains("dump_mesh")) {
        if (!j["dump_mesh"].is_boolean()) throw ConfigError("dump_mesh must be a boolean");
        rc.dump_mesh = j["dump_mesh"].get<bool>();
    }

    try {
        c.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return rc;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("malformed config " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    return parse_config_json(j);
}

/// JSON snapshot of a fully resolved scenario (written into run manifests).
inline nlohmann::json config_snapshot(const RunConfig& rc) {
    const ScenarioConfig& c = rc.scenario;
    nlohmann::json v;
    if (c.viscosity.a == 0.0) {
        v = {{"type", "constant"}, {"mu", c.viscosity.mu0}};
    } else {
        v = {{"type", "vft"},
             {"mu0", c.viscosity.mu0},
             {"a", c.viscosity.a},
             {"T0", c.viscosity.T0},
             {"clamp", {c.viscosity.clamp_lo, c.viscosity.clamp_hi}}};
    }
    return nlohmann::json{
        {"kappa_s", c.kappa_s},
        {"kappa_f", c.kappa_f},
        {"alpha", c.alpha},
        {"viscosity", v},
        {"profile", to_string(c.profile.kind)},
        {"gamma0", c.profile.gamma0},
        {"epsilon", c.epsilon},
        {"inflow", to_string(c.inflow)},
        {"u_motion", {c.u_motion.x, c.u_motion.y}},
        {"f_s", rc.f_s_expr},
        {"f_f", rc.f_f_expr},
        {"t_end", c.t_end},
        {"dt", c.dt},
        {"h_bulk", c.h_bulk},
        {"h_layer", c.h_layer},
        {"theta_init", c.theta_init},
        {"cell_h", rc.cell_h},
        {"eps_list", rc.eps_list},
        {"field_output_times", rc.field_output_times},
        {"dump_mesh", rc.dump_mesh},
        {"warnings", rc.warnings}};
}

}  // namespace roughlayer
