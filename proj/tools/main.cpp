// Command-line driver: derive connections, solve the reduced systems, verify
// residuals, and emit observables.
//
// Exit codes: 0 success, 1 usage/parse, 2 degenerate frame,
//             3 solver non-convergence, 4 verification failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <isoframe/odes.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>

using namespace isoframe;
using nlohmann::json;

namespace {

struct Csv {
    std::ofstream os;
    explicit Csv(const std::string& path) : os(path) {
        if (!os) throw std::runtime_error("cannot open output file '" + path + "'");
        os << std::setprecision(17);
    }
};

SolutionTable load_solution(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open solution file '" + path + "'");
    SolutionTable tab = SolutionTable::read_csv(is);
    // infer the system from the state columns and refresh dy from its rhs
    ODESystem sys;
    if (tab.state_names == std::vector<std::string>{"A", "Ap", "Phi", "Phip"}) sys = point_charge_system(1.0);
    else if (tab.state_names == std::vector<std::string>{"g", "gp", "h", "hp"}) sys = plane_wave_system(1.0);
    else if (tab.state_names == std::vector<std::string>{"y", "yp"}) sys = spherical_wave_system();
    else throw std::runtime_error("unrecognized solution column layout in '" + path + "'");
    tab.system = sys.name;
    return tab;
}

ProfileSet solution_profiles(const SolutionTable& tab, double m) {
    if (tab.system == "point_charge") return profiles_from_point_charge(tab, m);
    if (tab.system == "plane_wave") return profiles_from_plane_wave(tab, m);
    return profiles_from_spherical_wave(tab);
}

AnsatzFrame build_for(const std::string& ansatz, const ProfileSet& ps, double m, double psi) {
    if (ansatz == "spherical") return build_spherical(ps, m);
    if (ansatz == "plane-wave") return build_plane_wave(ps, psi, m);
    if (ansatz == "spherical-wave") return build_spherical_wave(ps);
    throw CLI::ValidationError("--ansatz", "unknown ansatz '" + ansatz + "'");
}

// reduced-variable index of each ansatz chart
int reduced_coord(const std::string& ansatz) { return ansatz == "spherical" ? 1 : 0; }

GridSpec verification_grid(const AnsatzFrame& af, const std::string& ansatz, Interval urange, int n) {
    GridSpec g = default_grid(*af.frame.chart(), 3);
    const int uc = reduced_coord(ansatz);
    g.range[uc] = urange;
    g.n[uc] = n;
    return g;
}

void write_manifest(const std::string& path, const json& j) {
    std::ofstream os(path);
    os << j.dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"isoframe: exterior-calculus toolkit for triplet-of-2-forms gauge fields"};
    app.require_subcommand(1);

    std::string ansatz = "spherical", out = "isoframe_out", format = "csv";
    std::string profiles_path, solution_path;
    double m = 1.0, psi = 0.0, c1 = 0.0, c2 = 0.0, tol = 1e-6, rho_max = 2.0;
    double r_min = 0.05, r_max = 300.0;
    std::vector<double> t_range{0.0, 20.0}, s_range{0.0, 10.0};
    double g0 = 0.0, gp0 = 1.0, h0 = 0.0, hp0 = 0.0;
    int grid = 32;
    bool spin = false;
    std::map<std::string, std::string> exprs;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--ansatz", ansatz, "spherical | plane-wave | spherical-wave");
        cmd->add_option("--m", m, "mass constant");
        cmd->add_option("--psi", psi, "boost rapidity");
        cmd->add_option("--grid", grid, "points along the reduced variable");
        cmd->add_option("--tol", tol, "tolerance");
        cmd->add_option("--out", out, "output path base");
        cmd->add_option("--format", format, "csv | json");
    };

    CLI::App* cmd_derive = app.add_subcommand("derive", "solve the structure equation and write connection + curvature tables");
    add_common(cmd_derive);
    cmd_derive->add_option("--profiles", profiles_path, "solution CSV supplying the profiles");
    cmd_derive->add_option("--r-min", r_min);
    cmd_derive->add_option("--r-max", r_max);
    for (const char* n : {"P", "Q", "p", "q"})
        cmd_derive->add_option(std::string("--") + n, exprs[n], "profile expression in the reduced variable u");

    CLI::App* cmd_solve = app.add_subcommand("solve", "integrate one of the reduced systems");
    std::string system;
    cmd_solve->add_option("system", system, "point-charge | plane-wave | spherical-wave")->required();
    add_common(cmd_solve);
    cmd_solve->add_option("--c1", c1, "asymptotic charge / first-integral constant");
    cmd_solve->add_option("--c2", c2, "asymptotic charge / phase shift");
    cmd_solve->add_option("--r-min", r_min);
    cmd_solve->add_option("--r-max", r_max);
    cmd_solve->add_option("--T-range", t_range, "plane-wave T range")->expected(2);
    cmd_solve->add_option("--s-range", s_range, "spherical-wave s range")->expected(2);
    cmd_solve->add_option("--g0", g0);
    cmd_solve->add_option("--gp0", gp0);
    cmd_solve->add_option("--h0", h0);
    cmd_solve->add_option("--hp0", hp0);

    CLI::App* cmd_verify = app.add_subcommand("verify", "residual report for a solution file");
    add_common(cmd_verify);
    cmd_verify->add_option("solution", solution_path, "solution CSV from `solve`")->required();

    CLI::App* cmd_obs = app.add_subcommand("observables", "stress-energy, trace, spin density");
    add_common(cmd_obs);
    cmd_obs->add_option("solution", solution_path, "solution CSV from `solve`")->required();
    cmd_obs->add_flag("--spin", spin, "emit the spin-density column and disk total (plane-wave only)");
    cmd_obs->add_option("--rho-max", rho_max, "disk radius for the spin total");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*cmd_solve) {
            SolutionTable tab;
            json manifest;
            if (system == "point-charge") {
                ShootingConfig cfg;
                cfg.r_min = r_min;
                cfg.r_max = r_max;
                cfg.c1 = c1;
                cfg.c2 = c2;
                cfg.tolerance = tol;
                try {
                    PointChargeSolution sol = shoot_point_charge(cfg);
                    tab = std::move(sol.table);
                    manifest["fitted"] = {{"C1", sol.c1}, {"C2", sol.c2},
                                          {"C1_fit_residual", sol.c1_fit_residual},
                                          {"C2_fit_residual", sol.c2_fit_residual}};
                    manifest["mismatch_history"] = sol.mismatch_history;
                } catch (const ShootingError& e) {
                    json diag{{"error", e.what()}, {"mismatch_history", e.mismatch_history}};
                    std::cerr << diag.dump(2) << "\n";
                    return 3;
                }
            } else if (system == "plane-wave") {
                ODESystem sys = plane_wave_system(m);
                sys.params.psi = psi;
                tab = integrate(sys, {g0, gp0, h0, hp0}, t_range[0], t_range[1]);
                const Dispersion d = dispersion_check(psi, m);
                manifest["dispersion"] = {{"omega", d.omega}, {"k", d.k}, {"omega2_minus_k2", d.omega2_minus_k2}};
            } else if (system == "spherical-wave") {
                if (!(c1 >= 1.0)) throw CLI::ValidationError("--c1", "spherical wave requires c1 >= 1");
                ODESystem sys = spherical_wave_system();
                sys.params.c1 = c1;
                sys.params.c2 = c2;
                tab = integrate(sys, {0.0, std::sqrt(c1 * c1 - 1.0)}, s_range[0] + c2, s_range[1] + c2);
            } else {
                throw CLI::ValidationError("system", "unknown system '" + system + "'");
            }
            json mj = json::parse(tab.manifest_json());
            for (auto& [k, v] : manifest.items()) mj[k] = v;
            if (format == "json") {
                mj["t"] = tab.t;
                mj["y"] = tab.y;
                write_manifest(out + ".json", mj);
            } else {
                Csv csv(out + ".csv");
                tab.write_csv(csv.os);
                write_manifest(out + ".json", mj);
            }
            return 0;
        }

        if (*cmd_derive) {
            ProfileSet ps;
            Interval urange{r_min, r_max};
            if (!profiles_path.empty()) {
                SolutionTable tab = load_solution(profiles_path);
                ps = solution_profiles(tab, m);
                const double lo = ps.domain.lo, hi = ps.domain.hi;
                urange = {std::max(lo, r_min), std::min(hi, r_max)};
            } else if (ansatz == "spherical") {
                auto expr_or = [&](const char* n, const std::string& dflt) {
                    return expression_profile(n, exprs[n].empty() ? dflt : exprs[n]);
                };
                ps.add(expr_or("P", "1"));
                ps.add(expr_or("Q", "1"));
                ps.add(expr_or("p", "u"));
                ps.add(expr_or("q", "u"));
                urange = {std::max(0.2, r_min), std::min(r_max, 1e3)};
                ps.domain = urange;
            } else {
                throw CLI::ValidationError("--profiles", "this ansatz needs a profile file");
            }
            AnsatzFrame af = build_for(ansatz, ps, m, psi);
            const int uc = reduced_coord(ansatz);
            IsoTripletForm alpha = connection_field(af.frame);
            IsoTripletForm K = curvature(alpha);
            Point x{0.4, 0.7, 1.1, 0.5}; // off-axis representative orbit point
            Csv csv(out + ".csv");
            csv.os << "#u";
            for (int a = 1; a <= 3; ++a)
                for (int i = 0; i < 4; ++i) csv.os << ",alpha" << a << "_" << i;
            for (int a = 1; a <= 3; ++a)
                for (const auto& tup : index_tuples(2)) csv.os << ",K" << a << "_" << tup[0] << tup[1];
            csv.os << (ansatz == "plane-wave" ? ",f,g" : ",Phi,A") << "\n";
            const int N = std::max(grid, 2);
            for (int k = 0; k < N; ++k) {
                Point xx = x;
                xx[uc] = urange.lo + (urange.hi - urange.lo) * k / (N - 1);
                csv.os << xx[uc];
                ConnectionComponents cc = solve_connection(af.frame, xx);
                for (int a = 0; a < 3; ++a)
                    for (int i = 0; i < 4; ++i) csv.os << "," << cc.A[a][i];
                for (int a = 0; a < 3; ++a)
                    for (double v : K[a].evaluate(xx)) csv.os << "," << v;
                if (ansatz == "plane-wave") {
                    csv.os << "," << cc.A[0][1] << "," << cc.A[2][2]; // f = alpha^1_Z, g = alpha^3_rho
                } else if (ansatz == "spherical") {
                    csv.os << "," << cc.A[0][0] << "," << cc.A[2][2]; // Phi = alpha^1_t, A = alpha^3_theta
                } else {
                    csv.os << "," << 0.0 << "," << cc.A[0][1]; // A = alpha^1_eta
                }
                csv.os << "\n";
            }
            return 0;
        }

        if (*cmd_verify || *cmd_obs) {
            SolutionTable tab = load_solution(solution_path);
            ProfileSet ps = solution_profiles(tab, m);
            const std::string eff_ansatz = tab.system == "point_charge" ? "spherical"
                                           : tab.system == "plane_wave" ? "plane-wave"
                                                                        : "spherical-wave";
            AnsatzFrame af = build_for(eff_ansatz, ps, m, psi);
            // sample safely inside the table's reduced range
            Interval ur{ps.domain.lo + 0.05 * (ps.domain.hi - ps.domain.lo),
                        ps.domain.hi - 0.05 * (ps.domain.hi - ps.domain.lo)};
            GridSpec gspec = verification_grid(af, eff_ansatz, ur, std::max(2, grid));

            if (*cmd_verify) {
                IsoTripletForm alpha = connection_field(af.frame);
                ResidualReport rs = structure_residual(af.frame, alpha, gspec);
                ResidualReport rf = field_equation_residual(af.frame, alpha, gspec);
                ResidualReport ry = yang_mills_residual(af.frame, alpha, gspec);
                // Bianchi on the closed-form connection family of this ansatz
                IsoTripletForm alpha_family =
                    eff_ansatz == "spherical"
                        ? spherical_connection(ps.get("Phi"), ps.get("A"))
                        : (eff_ansatz == "plane-wave" ? plane_wave_connection(ps.get("f"), ps.get("g"))
                                                      : cone_connection(ps.get("A")));
                ResidualReport rb = bianchi_residual(alpha_family, gspec);
                json rep;
                for (const ResidualReport* r : {&rs, &rf, &rb, &ry})
                    rep[r->equation] = json::parse(r->to_json());
                rep["tolerance"] = tol;
                const long total = gspec.total();
                bool ok = rb.max_residual < tol;
                for (const ResidualReport* r : {&rs, &rf, &ry})
                    ok = ok && r->max_residual < tol && r->skipped_points < total;
                rep["pass"] = ok;
                write_manifest(out + ".json", rep);
                std::cout << rep.dump(2) << "\n";
                return ok ? 0 : 4;
            }

            // observables
            if (spin && eff_ansatz != "plane-wave") {
                std::cerr << "spin density is defined for the plane-wave ansatz only\n";
                return 1;
            }
            // the closed-form connection of the ansatz (equal to the solved one,
            // but with exact derivatives)
            IsoTripletForm alpha =
                eff_ansatz == "spherical"
                    ? spherical_connection(ps.get("Phi"), ps.get("A"))
                    : (eff_ansatz == "plane-wave" ? plane_wave_connection(ps.get("f"), ps.get("g"))
                                                  : cone_connection(ps.get("A")));
            const int uc = reduced_coord(eff_ansatz);
            Point x{0.4, 0.7, 1.1, 0.5};
            Csv csv(out + ".csv");
            csv.os << "#u,trace,minus_m2_pipi";
            if (spin) csv.os << ",S_t_zphi,minus_fprime_over_m2";
            csv.os << "\n";
            const int N = std::max(grid, 2);
            for (int k = 0; k < N; ++k) {
                Point xx = x;
                xx[uc] = ur.lo + (ur.hi - ur.lo) * k / (N - 1);
                StressEnergy se = stress_energy(af.frame, alpha, xx);
                csv.os << xx[uc] << "," << se.trace << "," << -m * m * pi_dot_pi(af.frame, xx);
                if (spin) {
                    const auto S = spin_density(af.frame, alpha, xx);
                    csv.os << "," << S[1][3] << "," << -ps.get("f").d1(xx[uc]) / (m * m);
                }
                csv.os << "\n";
            }
            json mj{{"solution", solution_path}, {"ansatz", eff_ansatz}};
            if (spin) mj["spin_disk_total"] = spin_total(tab, m, rho_max);
            write_manifest(out + ".json", mj);
            return 0;
        }
    } catch (const DegenerateFrameError& e) {
        json diag{{"error", e.what()}, {"condition", e.condition}};
        std::cerr << diag.dump(2) << "\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
