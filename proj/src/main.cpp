#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "roughlayer/analysis.hpp"
#include "roughlayer/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace roughlayer;

namespace {

constexpr const char* kVersion = "roughlayer 1.0.0";
constexpr int kLineSamples = 801;  // uniform x1 grid for line-sample CSVs

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Manifest {
    json doc;
    fs::path dir;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    explicit Manifest(const fs::path& out, const RunConfig& rc) : dir(out) {
        fs::create_directories(out);
        doc["version"] = kVersion;
        doc["config"] = config_snapshot(rc);
        doc["outputs"] = json::array();
    }

    void add_output(const fs::path& rel) { doc["outputs"].push_back(rel.string()); }

    void write() {
        doc["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (const auto& f : doc["outputs"]) {
            const fs::path p = dir / f.get<std::string>();
            if (!fs::exists(p) || fs::file_size(p) == 0)
                throw std::runtime_error("manifest lists missing or empty output: " + p.string());
        }
        std::ofstream(dir / "manifest.json") << doc.dump(2) << "\n";
    }
};

json coefficients_json(const EffectiveCoefficients& c, double kappa_f, double cell_h) {
    return json{{"kappa_tilde", c.kappa_tilde},
                {"kappa_tilde_over_kappa_f", c.kappa_tilde / kappa_f},
                {"K", c.K},
                {"xi0_bar", c.xi0_bar},
                {"z_volume", c.z_volume},
                {"gamma_measure", c.gamma_measure},
                {"xi_vertical_mean", c.xi_vertical_mean},
                {"xi0_vertical_mean", c.xi0_vertical_mean},
                {"cell_h", cell_h}};
}

void write_coefficients_csv(const fs::path& p, const RunConfig& rc,
                            const EffectiveCoefficients& c) {
    std::ofstream out(p);
    out << "profile,gamma0,cell_h,kappa_tilde_over_kappa_f,kappa_tilde,K,xi0_bar,"
           "z_volume,gamma_measure\n";
    out << to_string(rc.scenario.profile.kind) << "," << fmt(rc.scenario.profile.gamma0) << ","
        << fmt(rc.cell_h) << "," << fmt(c.kappa_tilde / rc.scenario.kappa_f) << ","
        << fmt(c.kappa_tilde) << "," << fmt(c.K) << "," << fmt(c.xi0_bar) << ","
        << fmt(c.z_volume) << "," << fmt(c.gamma_measure) << "\n";
}

void write_field_csv(const fs::path& p, const FunctionSpace& s, const std::vector<double>& coef,
                     int comp = 0) {
    std::ofstream out(p);
    out << "x1,x2,value\n";
    for (int n = 0; n < s.n_nodes(); ++n) {
        const Vec2& x = s.node_position(n);
        out << fmt(x.x) << "," << fmt(x.y) << "," << fmt(coef[s.dof(n, comp)]) << "\n";
    }
}

bool is_output_time(const RunConfig& rc, double t) {
    for (double ot : rc.field_output_times)
        if (std::abs(t - ot) < 0.5 * rc.scenario.dt) return true;
    return false;
}

std::string time_tag(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%08.3f", t);
    return buf;
}

/// Resolved run: line samples along (0,1) x {eps/2} plus optional field
/// snapshots; the pressure column stores eps^2 * p.
void run_micro_command(const RunConfig& rc, Manifest& man) {
    MicroSolver solver(rc.scenario);
    const double eps = rc.scenario.epsilon;
    PointLocator fluid(solver.mesh(), solver.fluid_space().elements());

    if (rc.dump_mesh) {
        std::ofstream(man.dir / "mesh.txt") << dump_mesh(solver.mesh());
        man.add_output("mesh.txt");
    }

    std::ofstream line(man.dir / "line_sample.csv");
    line << "t,x1,theta_f,pressure_eps2,u1\n";
    man.add_output("line_sample.csv");

    run_micro(solver, [&](const MicroSolver& s, const MicroState& st) {
        for (int i = 0; i < kLineSamples; ++i) {
            const double x1 = static_cast<double>(i) / (kLineSamples - 1);
            const Vec2 x{x1, eps / 2.0};
            // the sampling line leaves the fluid wherever the tooth dips
            // below eps/2; those samples are emitted as nan
            double tf = std::nan(""), pr = std::nan(""), u1 = std::nan("");
            if (s.config().profile.evaluate(x1 / eps - std::floor(x1 / eps)) > 0.5) {
                const auto hit = fluid.locate(x);
                tf = field_value(st.theta_f, hit.tri, hit.l1, hit.l2);
                pr = eps * eps * field_value(st.p, hit.tri, hit.l1, hit.l2);
                u1 = field_value(st.u, hit.tri, hit.l1, hit.l2, 0);
            }
            line << fmt(st.time) << "," << fmt(x1) << "," << fmt(tf) << "," << fmt(pr) << ","
                 << fmt(u1) << "\n";
        }
        if (is_output_time(rc, st.time)) {
            const std::string tag = time_tag(st.time);
            write_field_csv(man.dir / ("theta_s_" + tag + ".csv"), s.solid_space(),
                            st.theta_s.coef);
            write_field_csv(man.dir / ("theta_f_" + tag + ".csv"), s.fluid_space(),
                            st.theta_f.coef);
            write_field_csv(man.dir / ("pressure_" + tag + ".csv"), s.pressure_space(),
                            st.p.coef);
            write_field_csv(man.dir / ("u1_" + tag + ".csv"), s.velocity_space(), st.u.coef, 0);
            write_field_csv(man.dir / ("u2_" + tag + ".csv"), s.velocity_space(), st.u.coef, 1);
            for (const char* f : {"theta_s_", "theta_f_", "pressure_", "u1_", "u2_"})
                man.add_output(f + tag + ".csv");
        }
    });
    man.doc["mass_balance_flux"] = solver.boundary_flux();
}

/// Homogenized run with the same line-sample schema (pressure column holds
/// the limit pressure, u1 the constant effective velocity).
void run_macro_command(const RunConfig& rc, Manifest& man) {
    const CellGeometry geom = build_cell_geometry(rc.scenario.profile);
    const CellSolutions cells =
        solve_cell_problems(geom, rc.cell_h, rc.scenario.kappa_f, rc.scenario.u_motion);
    man.doc["coefficients"] = coefficients_json(cells.coefficients, rc.scenario.kappa_f,
                                                rc.cell_h);
    MacroSolver solver(make_effective_scenario(rc.scenario, cells));

    std::ofstream line(man.dir / "line_sample.csv");
    line << "t,x1,theta_f,pressure_eps2,u1\n";
    man.add_output("line_sample.csv");

    run_macro(solver, [&](const MacroSolver& s, const MacroState& st) {
        for (int i = 0; i < kLineSamples; ++i) {
            const double x1 = static_cast<double>(i) / (kLineSamples - 1);
            const auto tf = interface_interp(s.interface_mesh(), st.theta_f, x1);
            const auto pr = interface_interp(s.interface_mesh(), st.p, x1);
            line << fmt(st.time) << "," << fmt(x1) << "," << fmt(tf.value) << ","
                 << fmt(pr.value) << "," << fmt(st.u_bar) << "\n";
        }
        if (is_output_time(rc, st.time)) {
            const std::string tag = time_tag(st.time);
            write_field_csv(man.dir / ("theta_s_" + tag + ".csv"), s.bulk_space(),
                            st.theta_s.coef);
            man.add_output("theta_s_" + tag + ".csv");
        }
    });
}

void run_cell_command(const RunConfig& rc, Manifest& man) {
    const CellGeometry geom = build_cell_geometry(rc.scenario.profile);
    const CellSolutions cells =
        solve_cell_problems(geom, rc.cell_h, rc.scenario.kappa_f, rc.scenario.u_motion);
    man.doc["coefficients"] = coefficients_json(cells.coefficients, rc.scenario.kappa_f,
                                                rc.cell_h);
    write_coefficients_csv(man.dir / "coefficients.csv", rc, cells.coefficients);
    man.add_output("coefficients.csv");
    if (rc.dump_mesh) {
        std::ofstream(man.dir / "mesh.txt") << dump_mesh(*cells.mesh);
        man.add_output("mesh.txt");
    }
}

void run_convergence_command(const RunConfig& rc, Manifest& man,
                             const std::vector<double>& eps_override) {
    const std::vector<double>& eps_list = eps_override.empty() ? rc.eps_list : eps_override;
    // the homogenized reference runs on a refined macro mesh so that the
    // measured differences are dominated by the scale separation, not by
    // macro discretization error
    const double macro_h = std::min(rc.scenario.h_bulk, 0.01);
    const ConvergenceReport rep = run_convergence(
        rc.scenario, eps_list, rc.cell_h, {},
        [&rc](ScenarioConfig& cfg) { rc.rebind_sources(cfg); }, macro_h);

    std::ofstream csv(man.dir / "convergence.csv");
    csv << "eps,err_theta_f,err_p,err_u,err_theta_s\n";
    for (const auto& pt : rep.points)
        csv << fmt(pt.eps) << "," << fmt(pt.errors.theta_f) << "," << fmt(pt.errors.p) << ","
            << fmt(pt.errors.u) << "," << fmt(pt.errors.theta_s) << "\n";
    man.add_output("convergence.csv");

    json slopes{{"slope_theta_f", rep.slope_theta_f},
                {"slope_p", rep.slope_p},
                {"slope_u", rep.slope_u},
                {"slope_theta_s", rep.slope_theta_s},
                {"eps_list", eps_list}};
    json pts = json::array();
    for (const auto& pt : rep.points)
        pts.push_back({{"eps", pt.eps}, {"seconds", pt.seconds}});
    slopes["points"] = pts;
    std::ofstream(man.dir / "slopes.json") << slopes.dump(2) << "\n";
    man.add_output("slopes.json");
    man.doc["slopes"] = slopes;
}

/// One paired resolved + homogenized run written into a subdirectory.
void run_pair(const RunConfig& rc, const fs::path& out) {
    {
        Manifest man(out / "micro", rc);
        run_micro_command(rc, man);
        man.write();
    }
    {
        Manifest man(out / "macro", rc);
        run_macro_command(rc, man);
        man.write();
    }
}

void run_variants(const std::vector<std::pair<std::string, RunConfig>>& variants,
                  const fs::path& out, int threads) {
    std::vector<std::exception_ptr> errors(variants.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= variants.size()) return;
            try {
                run_pair(variants[i].second, out / variants[i].first);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

RunConfig with_inflow(RunConfig rc, InflowFamily f) {
    rc.scenario.inflow = f;
    return rc;
}

RunConfig with_height(RunConfig rc, double gamma0) {
    rc.scenario.profile = RoughnessProfile(rc.scenario.profile.kind, gamma0);
    rc.scenario.inflow = InflowFamily::Lin2;
    // normalized source 1/|Gamma|: unit total heat independent of gamma0
    const double glen = build_cell_geometry(rc.scenario.profile).interface_length;
    rc.scenario.f_s = [glen](const Vec2&) { return 1.0 / glen; };
    rc.f_s_expr = "";
    return rc;
}

RunConfig with_shape(RunConfig rc, ProfileKind kind) {
    rc.scenario.profile = RoughnessProfile(kind, rc.scenario.profile.gamma0);
    rc.scenario.inflow = InflowFamily::Lin2;
    const double glen = build_cell_geometry(rc.scenario.profile).interface_length;
    rc.scenario.f_s = [glen](const Vec2&) { return 1.0 / glen; };
    rc.f_s_expr = "";
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rough-layer flow and heat: resolved and homogenized solvers"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::string eps_csv;
    int threads = 1;
    for (const char* name :
         {"cell", "micro", "macro", "convergence", "sweep-inflow", "sweep-height",
          "sweep-shape"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON configuration file");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--eps-list", eps_csv, "comma-separated eps values");
        sub->add_option("--threads", threads, "concurrent scenario runs");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::fprintf(stderr, "{\"error\":\"usage\",\"message\":%s}\n",
                     json(std::string(e.what())).dump().c_str());
        return 2;
    }

    try {
        RunConfig rc = config_path.empty() ? RunConfig{} : parse_config(config_path);
        if (config_path.empty()) rc.rebind_sources(rc.scenario);
        for (const auto& w : rc.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

        std::vector<double> eps_override;
        if (!eps_csv.empty()) {
            std::stringstream ss(eps_csv);
            std::string item;
            while (std::getline(ss, item, ',')) eps_override.push_back(std::stod(item));
        }

        const std::string cmd = app.get_subcommands().front()->get_name();
        const fs::path out(out_dir);
        if (cmd == "cell") {
            Manifest man(out, rc);
            run_cell_command(rc, man);
            man.write();
        } else if (cmd == "micro") {
            Manifest man(out, rc);
            run_micro_command(rc, man);
            man.write();
        } else if (cmd == "macro") {
            Manifest man(out, rc);
            run_macro_command(rc, man);
            man.write();
        } else if (cmd == "convergence") {
            Manifest man(out, rc);
            run_convergence_command(rc, man, eps_override);
            man.write();
        } else if (cmd == "sweep-inflow") {
            run_variants({{"inflow_lin", with_inflow(rc, InflowFamily::Lin)},
                          {"inflow_quad", with_inflow(rc, InflowFamily::Quad)},
                          {"inflow_lin2", with_inflow(rc, InflowFamily::Lin2)}},
                         out, threads);
        } else if (cmd == "sweep-height") {
            run_variants({{"gamma0_0.1", with_height(rc, 0.1)},
                          {"gamma0_0.5", with_height(rc, 0.5)},
                          {"gamma0_0.9", with_height(rc, 0.9)}},
                         out, threads);
        } else if (cmd == "sweep-shape") {
            run_variants({{"shape_sine", with_shape(rc, ProfileKind::Sine)},
                          {"shape_rect", with_shape(rc, ProfileKind::Rect)}},
                         out, threads);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "{\"error\":\"config\",\"message\":%s}\n",
                     json(std::string(e.what())).dump().c_str());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "{\"error\":\"runtime\",\"message\":%s}\n",
                     json(std::string(e.what())).dump().c_str());
        return 1;
    }
}
