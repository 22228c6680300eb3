#include "isoframe/odes.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace isoframe {

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) embedded pair

namespace {

const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
const double a21 = 1.0 / 5;
const double a31 = 3.0 / 40, a32 = 9.0 / 40;
const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
             a65 = -5103.0 / 18656;
const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// embedded 4th-order weights
const double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640, e5 = -92097.0 / 339200,
             e6 = 187.0 / 2100, e7 = 1.0 / 40;

} // namespace

SolutionTable integrate(const ODESystem& system, const std::vector<double>& initial,
                        double t0, double t1, const IntegratorConfig& config) {
    const int n = system.dim;
    if (static_cast<int>(initial.size()) != n) throw std::invalid_argument("initial state dimension mismatch");
    for (double v : initial)
        if (!std::isfinite(v)) throw std::invalid_argument("initial state must be finite");

    SolutionTable out;
    out.system = system.name;
    out.params = system.params;
    out.state_names = system.state_names;
    for (const auto& fi : system.first_integrals) out.integral_names.push_back(fi.name);
    out.rel_tol = config.rel_tol;
    out.abs_tol = config.abs_tol;

    const double dir = (t1 >= t0) ? 1.0 : -1.0;
    std::vector<double> y = initial, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
    double t = t0;
    system.rhs(t, y.data(), k1.data());

    auto record = [&](double tv, const std::vector<double>& yv, const std::vector<double>& dyv) {
        out.t.push_back(tv);
        out.y.push_back(yv);
        out.dy.push_back(dyv);
        std::vector<double> ints;
        for (const auto& fi : system.first_integrals) ints.push_back(fi.value(tv, yv.data()));
        out.integrals.push_back(std::move(ints));
    };
    record(t, y, k1);

    // initial step heuristic
    double h = config.initial_step;
    if (h == 0.0) {
        double ynorm = 0.0, fnorm = 0.0;
        for (int i = 0; i < n; ++i) {
            ynorm = std::max(ynorm, std::fabs(y[i]));
            fnorm = std::max(fnorm, std::fabs(k1[i]));
        }
        h = 0.01 * std::max(ynorm, 1.0) / std::max(fnorm, 1.0);
        h = std::min(h, 0.1 * std::fabs(t1 - t0));
        h = std::max(h, 1e-8);
    }
    h *= dir;

    while (dir * (t1 - t) > 0.0) {
        if (out.steps + out.rejected > config.max_steps)
            throw IntegrationError("integrator exceeded max step count", t);
        if (dir * (t + h - t1) > 0.0) h = t1 - t;
        if (std::fabs(h) < 1e-14 * std::max(1.0, std::fabs(t)))
            throw IntegrationError("step size underflow (stiffness or singularity)", t);

        auto stage = [&](double frac, std::initializer_list<std::pair<const std::vector<double>*, double>> terms,
                         std::vector<double>& kout) {
            for (int i = 0; i < n; ++i) {
                double acc = y[i];
                for (const auto& tm : terms) acc += h * tm.second * (*tm.first)[i];
                ytmp[i] = acc;
            }
            system.rhs(t + frac * h, ytmp.data(), kout.data());
        };
        stage(c2, {{&k1, a21}}, k2);
        stage(c3, {{&k1, a31}, {&k2, a32}}, k3);
        stage(c4, {{&k1, a41}, {&k2, a42}, {&k3, a43}}, k4);
        stage(c5, {{&k1, a51}, {&k2, a52}, {&k3, a53}, {&k4, a54}}, k5);
        stage(1.0, {{&k1, a61}, {&k2, a62}, {&k3, a63}, {&k4, a64}, {&k5, a65}}, k6);
        for (int i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        system.rhs(t + h, ynew.data(), k7.data());

        double err = 0.0;
        for (int i = 0; i < n; ++i) {
            const double y4 = y[i] + h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                          e7 * k7[i]);
            const double sc = config.abs_tol + config.rel_tol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            const double d = (ynew[i] - y4) / sc;
            err += d * d;
        }
        err = std::sqrt(err / n);

        if (err <= 1.0 || !std::isfinite(err)) {
            if (!std::isfinite(err)) throw IntegrationError("non-finite state during integration", t);
            t += h;
            y = ynew;
            k1 = k7; // FSAL
            ++out.steps;
            record(t, y, k1);
        } else {
            ++out.rejected;
        }
        const double fac = std::isfinite(err) && err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::min(5.0, std::max(0.2, fac));
    }
    return out;
}

// ---------------------------------------------------------------------------
// SolutionTable

namespace {

size_t locate(const std::vector<double>& t, double s) {
    const bool inc = t.back() >= t.front();
    if (inc ? (s <= t.front()) : (s >= t.front())) return 0;
    if (inc ? (s >= t.back()) : (s <= t.back())) return t.size() - 2;
    size_t lo = 0, hi = t.size() - 1;
    while (hi - lo > 1) {
        const size_t mid = (lo + hi) / 2;
        if (inc ? (t[mid] <= s) : (t[mid] >= s)) lo = mid;
        else hi = mid;
    }
    return lo;
}

} // namespace

std::vector<double> SolutionTable::state(double s) const {
    if (t.size() < 2) return y.front();
    const size_t k = locate(t, s);
    const double h = t[k + 1] - t[k];
    const double u = (s - t[k]) / h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    std::vector<double> out(y[k].size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = h00 * y[k][i] + h * h10 * dy[k][i] + h01 * y[k + 1][i] + h * h11 * dy[k + 1][i];
    return out;
}

std::vector<double> SolutionTable::state_derivative(double s) const {
    if (t.size() < 2) return dy.front();
    const size_t k = locate(t, s);
    const double h = t[k + 1] - t[k];
    const double u = (s - t[k]) / h;
    const double g00 = 6 * u * (u - 1) / h, g10 = (3 * u - 1) * (u - 1);
    const double g01 = -6 * u * (u - 1) / h, g11 = u * (3 * u - 2);
    std::vector<double> out(y[k].size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = g00 * y[k][i] + g10 * dy[k][i] + g01 * y[k + 1][i] + g11 * dy[k + 1][i];
    return out;
}

void SolutionTable::write_csv(std::ostream& os) const {
    os << "#t";
    for (const auto& n : state_names) os << "," << n;
    for (const auto& n : state_names) os << ",d" << n;
    for (const auto& n : integral_names) os << "," << n;
    os << "\n";
    os << std::setprecision(17);
    for (size_t k = 0; k < t.size(); ++k) {
        os << t[k];
        for (double v : y[k]) os << "," << v;
        for (double v : dy[k]) os << "," << v;
        for (double v : integrals[k]) os << "," << v;
        os << "\n";
    }
}

std::string SolutionTable::manifest_json() const {
    nlohmann::json j;
    j["system"] = system;
    j["parameters"] = {{"m", params.m}, {"c1", params.c1}, {"c2", params.c2}, {"psi", params.psi}};
    j["tolerances"] = {{"rel", rel_tol}, {"abs", abs_tol}};
    j["integrator"] = {{"steps", steps}, {"rejected_steps", rejected}, {"samples", t.size()}};
    j["state_names"] = state_names;
    j["conserved"] = integral_names;
    if (!integrals.empty() && !integral_names.empty()) {
        for (size_t c = 0; c < integral_names.size(); ++c) {
            double lo = integrals.front()[c], hi = lo;
            for (const auto& row : integrals) {
                lo = std::min(lo, row[c]);
                hi = std::max(hi, row[c]);
            }
            j["drift"][integral_names[c]] = hi - lo;
        }
    }
    return j.dump(2);
}

SolutionTable SolutionTable::read_csv(std::istream& is) {
    SolutionTable out;
    std::string line;
    if (!std::getline(is, line) || line.empty() || line[0] != '#')
        throw std::runtime_error("solution CSV must start with a '#' header row");
    std::vector<std::string> cols;
    {
        std::stringstream ss(line.substr(1));
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    // columns: t, states..., dstates..., integrals...
    size_t nstate = 0;
    for (size_t i = 1; i < cols.size(); ++i) {
        if (cols[i].size() > 1 && cols[i][0] == 'd' &&
            std::find(cols.begin() + 1, cols.begin() + static_cast<long>(i), cols[i].substr(1)) !=
                cols.begin() + static_cast<long>(i)) {
            nstate = i - 1;
            break;
        }
    }
    if (nstate == 0) throw std::runtime_error("solution CSV header carries no derivative columns");
    out.state_names.assign(cols.begin() + 1, cols.begin() + 1 + static_cast<long>(nstate));
    out.integral_names.assign(cols.begin() + 1 + 2 * static_cast<long>(nstate), cols.end());
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != cols.size()) throw std::runtime_error("ragged row in solution CSV");
        out.t.push_back(row[0]);
        out.y.emplace_back(row.begin() + 1, row.begin() + 1 + static_cast<long>(nstate));
        out.dy.emplace_back(row.begin() + 1 + static_cast<long>(nstate),
                            row.begin() + 1 + 2 * static_cast<long>(nstate));
        out.integrals.emplace_back(row.begin() + 1 + 2 * static_cast<long>(nstate), row.end());
    }
    if (out.t.size() < 2) throw std::runtime_error("solution CSV has fewer than two samples");
    return out;
}

// ---------------------------------------------------------------------------
// the three reduced systems

ODESystem point_charge_system(double m) {
    if (!(m > 0.0)) throw std::invalid_argument("mass must be positive");
    ODESystem sys;
    sys.name = "point_charge";
    sys.dim = 4;
    sys.state_names = {"A", "Ap", "Phi", "Phip"};
    sys.params.m = m;
    sys.rhs = [](double r, const double* u, double* du) {
        const double A = u[0], Ap = u[1], F = u[2], Fp = u[3];
        du[0] = Ap;
        du[1] = A * (A * A - 1.0) / (r * r) - A * F * F;
        du[2] = Fp;
        du[3] = 2.0 * A * A * F / (r * r) - 2.0 * Fp / r;
    };
    return sys;
}

ODESystem plane_wave_system(double m) {
    if (!(m > 0.0)) throw std::invalid_argument("mass must be positive");
    ODESystem sys;
    sys.name = "plane_wave";
    sys.dim = 4;
    sys.state_names = {"g", "gp", "h", "hp"};
    sys.params.m = m;
    sys.rhs = [](double, const double* u, double* du) {
        const double g = u[0], gp = u[1], h = u[2], hp = u[3];
        du[0] = gp;
        du[1] = -(g * g * g) - 2.0 * g * h * h;
        du[2] = hp;
        du[3] = -2.0 * g * g * h;
    };
    sys.first_integrals.push_back(
        {"E", [](double, const double* u) {
             const double g = u[0], gp = u[1], h = u[2], hp = u[3];
             return 0.5 * (gp * gp + hp * hp) + 0.25 * g * g * g * g + g * g * h * h;
         }});
    return sys;
}

ODESystem spherical_wave_system() {
    ODESystem sys;
    sys.name = "spherical_wave";
    sys.dim = 2;
    sys.state_names = {"y", "yp"};
    sys.rhs = [](double, const double* u, double* du) {
        du[0] = u[1];
        du[1] = -2.0 * u[0] * (1.0 + u[0] * u[0]);
    };
    sys.first_integrals.push_back({"E", [](double, const double* u) {
                                       const double w = 1.0 + u[0] * u[0];
                                       return u[1] * u[1] + w * w;
                                   }});
    return sys;
}

// ---------------------------------------------------------------------------
// point-charge shooting

namespace {

std::array<double, 4> far_state(double c1, double c2, double r) {
    return {1.0 + c2 / r, -c2 / (r * r), c1 / (r * r), -2.0 * c1 / (r * r * r)};
}

// point-charge system with a blow-up guard for shooting trials
ODESystem guarded_point_charge(double m) {
    ODESystem sys = point_charge_system(m);
    auto base = sys.rhs;
    sys.rhs = [base](double r, const double* u, double* du) {
        if (std::fabs(u[0]) + std::fabs(u[2]) > 1e3)
            throw IntegrationError("point-charge trajectory blew up", r);
        base(r, u, du);
    };
    return sys;
}

} // namespace

PointChargeSolution shoot_point_charge(const ShootingConfig& config) {
    if (!(config.r_min > 0.0 && config.r_min < config.r_max))
        throw std::invalid_argument("shooting window requires 0 < r_min < r_max");
    if (!(config.tolerance > 0.0)) throw std::invalid_argument("shooting tolerance must be positive");
    const ODESystem sys = guarded_point_charge(1.0);
    const double rmin = config.r_min, rmax = config.r_max;
    std::vector<double> history;

    const bool trivial_target = (config.c1 == 0.0 && config.c2 == 0.0);
    // shooting unknowns and their inner-state parameterization
    Eigen::VectorXd u;
    auto inner_state = [&](const Eigen::VectorXd& v) {
        std::vector<double> s(4);
        if (trivial_target) {
            // regular series A = 1 + a r^2, Phi = b r
            s = {1.0 + v[0] * rmin * rmin, 2.0 * v[0] * rmin, v[1] * rmin, v[1]};
        } else {
            s = {v[0], v[1], v[2], v[3]};
        }
        return s;
    };
    auto mismatch = [&](const Eigen::VectorXd& v, SolutionTable* keep) -> Eigen::VectorXd {
        SolutionTable tab = integrate(sys, inner_state(v), rmin, rmax, config.integrator);
        const std::vector<double>& yf = tab.y.back();
        Eigen::VectorXd f;
        if (trivial_target) {
            // Robin forms of "A(r_max)=1" and "Phi decays":  r A' + (A-1),  r^2 Phi' + 2 r Phi
            f.resize(2);
            f[0] = rmax * yf[1] + (yf[0] - 1.0);
            f[1] = rmax * rmax * yf[3] + 2.0 * rmax * yf[2];
        } else {
            const auto fs = far_state(config.c1, config.c2, rmax);
            f.resize(4);
            const double w[4] = {1.0, rmax, rmax * rmax, rmax * rmax * rmax};
            for (int i = 0; i < 4; ++i) f[i] = w[i] * (yf[static_cast<size_t>(i)] - fs[static_cast<size_t>(i)]);
        }
        if (keep) *keep = std::move(tab);
        return f;
    };

    if (trivial_target) {
        u.resize(2);
        u << config.guess_a, config.guess_b;
    } else {
        // seed the inner state by integrating backward from the asymptotic data
        const auto fs = far_state(config.c1, config.c2, rmax);
        SolutionTable back = integrate(sys, std::vector<double>(fs.begin(), fs.end()),
                                       rmax, rmin, config.integrator);
        u.resize(4);
        for (int i = 0; i < 4; ++i) u[i] = back.y.back()[static_cast<size_t>(i)];
    }

    SolutionTable best;
    Eigen::VectorXd f;
    bool converged = false;
    for (int it = 0; it <= config.max_iterations; ++it) {
        try {
            f = mismatch(u, &best);
        } catch (const IntegrationError&) {
            throw ShootingError("shooting trajectory left the integrable region", history);
        }
        const double nf = f.template lpNorm<Eigen::Infinity>();
        history.push_back(nf);
        if (nf < config.tolerance) {
            converged = true;
            break;
        }
        if (it == config.max_iterations) break;
        // finite-difference Jacobian, then damped Newton
        const long nu = u.size();
        Eigen::MatrixXd J(f.size(), nu);
        for (long j = 0; j < nu; ++j) {
            const double h = 1e-6 * std::max(std::fabs(u[j]), 1e-3);
            Eigen::VectorXd up = u;
            up[j] += h;
            Eigen::VectorXd fp;
            try {
                fp = mismatch(up, nullptr);
            } catch (const IntegrationError&) {
                throw ShootingError("shooting Jacobian probe left the integrable region", history);
            }
            J.col(j) = (fp - f) / h;
        }
        Eigen::VectorXd du = J.colPivHouseholderQr().solve(-f);
        double lambda = 1.0;
        bool improved = false;
        while (lambda > 1e-4) {
            try {
                Eigen::VectorXd f2 = mismatch(u + lambda * du, nullptr);
                if (f2.template lpNorm<Eigen::Infinity>() < nf) {
                    u += lambda * du;
                    improved = true;
                    break;
                }
            } catch (const IntegrationError&) {
            }
            lambda *= 0.5;
        }
        if (!improved) break; // stalled; the final mismatch check decides
    }
    if (!converged)
        throw ShootingError("point-charge shooting did not converge (non-monotone mismatch)", history);

    PointChargeSolution out;
    out.mismatch_history = history;
    out.table = std::move(best);

    // least-squares fits c + d/r over the last decade of r
    auto fit_tail = [&](int state_index, bool a_minus_one, double* c, double* resid) {
        const int N = 200;
        double s00 = 0, s01 = 0, s11 = 0, b0 = 0, b1v = 0;
        std::vector<double> rr(N), vv(N);
        for (int k = 0; k < N; ++k) {
            const double r = rmax / 10.0 + (rmax - rmax / 10.0) * k / (N - 1);
            const auto st = out.table.state(r);
            double val = st[static_cast<size_t>(state_index)];
            if (a_minus_one) val -= 1.0;
            val *= a_minus_one ? r : r * r;
            rr[k] = r;
            vv[k] = val;
            const double x1 = 1.0 / r;
            s00 += 1.0;
            s01 += x1;
            s11 += x1 * x1;
            b0 += val;
            b1v += x1 * val;
        }
        const double det = s00 * s11 - s01 * s01;
        const double cc = (s11 * b0 - s01 * b1v) / det;
        const double dd = (s00 * b1v - s01 * b0) / det;
        double maxdev = 0.0;
        for (int k = 0; k < N; ++k) maxdev = std::max(maxdev, std::fabs(vv[k] - (cc + dd / rr[k])));
        *c = cc;
        *resid = (std::fabs(cc) > 1e-12) ? maxdev / std::fabs(cc) : maxdev;
    };
    fit_tail(2, false, &out.c1, &out.c1_fit_residual);
    fit_tail(0, true, &out.c2, &out.c2_fit_residual);
    out.table.params.c1 = out.c1;
    out.table.params.c2 = out.c2;
    return out;
}

// ---------------------------------------------------------------------------
// profile reconstruction from trajectories

ProfileSet profiles_from_point_charge(const SolutionTable& table, double m) {
    auto tab = std::make_shared<SolutionTable>(table);
    const double m2 = m * m;
    auto st = [tab](double r) { return tab->state(r); };
    // third derivatives along the trajectory, from differentiating the system
    auto Appp = [](double r, const std::vector<double>& u) {
        const double A = u[0], Ap = u[1], F = u[2], Fp = u[3];
        return Ap * (3 * A * A - 1) / (r * r) - 2 * A * (A * A - 1) / (r * r * r) - Ap * F * F -
               2 * A * F * Fp;
    };
    auto Fppp = [](double r, const std::vector<double>& u) {
        const double A = u[0], Ap = u[1], F = u[2], Fp = u[3];
        const double Fpp = 2 * A * A * F / (r * r) - 2 * Fp / r;
        return (4 * A * Ap * F + 2 * A * A * Fp) / (r * r) - 4 * A * A * F / (r * r * r) - 2 * Fpp / r +
               2 * Fp / (r * r);
    };
    auto App = [](double r, const std::vector<double>& u) {
        return u[0] * (u[0] * u[0] - 1) / (r * r) - u[0] * u[2] * u[2];
    };
    auto Fpp = [](double r, const std::vector<double>& u) {
        return 2 * u[0] * u[0] * u[2] / (r * r) - 2 * u[3] / r;
    };

    ProfileSet ps;
    ps.domain = {std::min(tab->t_front(), tab->t_back()), std::max(tab->t_front(), tab->t_back())};
    ps.add(make_profile("A", [st](double r) { return st(r)[0]; },
                        [st](double r) { return st(r)[1]; },
                        [st, App](double r) { return App(r, st(r)); }));
    ps.add(make_profile("Phi", [st](double r) { return st(r)[2]; },
                        [st](double r) { return st(r)[3]; },
                        [st, Fpp](double r) { return Fpp(r, st(r)); }));
    ps.add(make_profile("P", [st, m2](double r) { return st(r)[3] / m2; },
                        [st, Fpp, m2](double r) { return Fpp(r, st(r)) / m2; },
                        [st, Fppp, m2](double r) { return Fppp(r, st(r)) / m2; }));
    // Q = (1 - A^2) / (m^2 r^2)
    ps.add(make_profile(
        "Q",
        [st, m2](double r) {
            const auto u = st(r);
            return (1 - u[0] * u[0]) / (m2 * r * r);
        },
        [st, m2](double r) {
            const auto u = st(r);
            const double w = 1 - u[0] * u[0], wp = -2 * u[0] * u[1];
            return wp / (m2 * r * r) - 2 * w / (m2 * r * r * r);
        },
        [st, App, m2](double r) {
            const auto u = st(r);
            const double w = 1 - u[0] * u[0], wp = -2 * u[0] * u[1];
            const double wpp = -2 * (u[1] * u[1] + u[0] * App(r, u));
            return wpp / (m2 * r * r) - 4 * wp / (m2 * r * r * r) + 6 * w / (m2 * r * r * r * r);
        }));
    // p = A Phi / m^2
    ps.add(make_profile(
        "p",
        [st, m2](double r) {
            const auto u = st(r);
            return u[0] * u[2] / m2;
        },
        [st, m2](double r) {
            const auto u = st(r);
            return (u[1] * u[2] + u[0] * u[3]) / m2;
        },
        [st, App, Fpp, m2](double r) {
            const auto u = st(r);
            return (App(r, u) * u[2] + 2 * u[1] * u[3] + u[0] * Fpp(r, u)) / m2;
        }));
    // q = -A' / m^2
    ps.add(make_profile("q", [st, m2](double r) { return -st(r)[1] / m2; },
                        [st, App, m2](double r) { return -App(r, st(r)) / m2; },
                        [st, Appp, m2](double r) { return -Appp(r, st(r)) / m2; }));
    return ps;
}

ProfileSet profiles_from_plane_wave(const SolutionTable& table, double m) {
    auto tab = std::make_shared<SolutionTable>(table);
    const double m2 = m * m, rt2 = std::sqrt(2.0);
    auto st = [tab](double T) { return tab->state(T); };
    auto gpp = [](const std::vector<double>& u) { return -(u[0] * u[0] * u[0]) - 2 * u[0] * u[2] * u[2]; };
    auto hpp = [](const std::vector<double>& u) { return -2 * u[0] * u[0] * u[2]; };
    auto gppp = [](const std::vector<double>& u) {
        return -3 * u[0] * u[0] * u[1] - 2 * u[1] * u[2] * u[2] - 4 * u[0] * u[2] * u[3];
    };
    auto hppp = [](const std::vector<double>& u) {
        return -2 * (2 * u[0] * u[1] * u[2] + u[0] * u[0] * u[3]);
    };

    ProfileSet ps;
    ps.domain = {std::min(tab->t_front(), tab->t_back()), std::max(tab->t_front(), tab->t_back())};
    ps.add(make_profile("g", [st](double T) { return st(T)[0]; },
                        [st](double T) { return st(T)[1]; },
                        [st, gpp](double T) { return gpp(st(T)); }));
    ps.add(make_profile("h", [st](double T) { return st(T)[2]; },
                        [st](double T) { return st(T)[3]; },
                        [st, hpp](double T) { return hpp(st(T)); }));
    ps.add(make_profile("f", [st, rt2](double T) { return rt2 * st(T)[2]; },
                        [st, rt2](double T) { return rt2 * st(T)[3]; },
                        [st, hpp, rt2](double T) { return rt2 * hpp(st(T)); }));
    ps.add(make_profile("P", [st, rt2, m2](double T) { return rt2 * st(T)[3] / m2; },
                        [st, hpp, rt2, m2](double T) { return rt2 * hpp(st(T)) / m2; },
                        [st, hppp, rt2, m2](double T) { return rt2 * hppp(st(T)) / m2; }));
    ps.add(make_profile(
        "Q", [st, m2](double T) { return st(T)[0] * st(T)[0] / m2; },
        [st, m2](double T) {
            const auto u = st(T);
            return 2 * u[0] * u[1] / m2;
        },
        [st, gpp, m2](double T) {
            const auto u = st(T);
            return 2 * (u[1] * u[1] + u[0] * gpp(u)) / m2;
        }));
    ps.add(make_profile(
        "p",
        [st, rt2, m2](double T) {
            const auto u = st(T);
            return -rt2 * u[0] * u[2] / m2;
        },
        [st, rt2, m2](double T) {
            const auto u = st(T);
            return -rt2 * (u[1] * u[2] + u[0] * u[3]) / m2;
        },
        [st, gpp, hpp, rt2, m2](double T) {
            const auto u = st(T);
            return -rt2 * (gpp(u) * u[2] + 2 * u[1] * u[3] + u[0] * hpp(u)) / m2;
        }));
    ps.add(make_profile("q", [st, m2](double T) { return st(T)[1] / m2; },
                        [st, gpp, m2](double T) { return gpp(st(T)) / m2; },
                        [st, gppp, m2](double T) { return gppp(st(T)) / m2; }));
    return ps;
}

ProfileSet profiles_from_spherical_wave(const SolutionTable& table) {
    auto tab = std::make_shared<SolutionTable>(table);
    auto st = [tab](double zeta) { return tab->state(std::log(zeta)); };
    auto ypp = [](const std::vector<double>& u) { return -2 * u[0] * (1 + u[0] * u[0]); };
    auto yppp = [](const std::vector<double>& u) { return -2 * u[1] * (1 + 3 * u[0] * u[0]); };

    ProfileSet ps;
    ps.domain = {std::exp(std::min(tab->t_front(), tab->t_back())),
                 std::exp(std::max(tab->t_front(), tab->t_back()))};
    ps.add(make_profile("A", [st](double z) { return st(z)[0]; },
                        [st](double z) { return st(z)[1] / z; },
                        [st, ypp](double z) {
                            const auto u = st(z);
                            return (ypp(u) - u[1]) / (z * z);
                        }));
    // p = y'(s) / zeta^2, q = -(1 + y^2) / zeta^2; with w(s) the numerator,
    // d/dz [w/z^2] = (w' - 2w)/z^3 and d2/dz2 = (w'' - 5w' + 6w)/z^4.
    ps.add(make_profile("p", [st](double z) { return st(z)[1] / (z * z); },
                        [st, ypp](double z) {
                            const auto u = st(z);
                            return (ypp(u) - 2 * u[1]) / (z * z * z);
                        },
                        [st, ypp, yppp](double z) {
                            const auto u = st(z);
                            return (yppp(u) - 5 * ypp(u) + 6 * u[1]) / (z * z * z * z);
                        }));
    ps.add(make_profile(
        "q", [st](double z) { return -(1 + st(z)[0] * st(z)[0]) / (z * z); },
        [st](double z) {
            const auto u = st(z);
            const double w = -(1 + u[0] * u[0]), wp = -2 * u[0] * u[1];
            return (wp - 2 * w) / (z * z * z);
        },
        [st, ypp](double z) {
            const auto u = st(z);
            const double w = -(1 + u[0] * u[0]), wp = -2 * u[0] * u[1];
            const double wpp = -2 * (u[1] * u[1] + u[0] * ypp(u));
            return (wpp - 5 * wp + 6 * w) / (z * z * z * z);
        }));
    // the section-7 symmetry identifies P with p and Q with q
    ps.items["P"] = ps.items["p"];
    ps.items["P"].name = "P";
    ps.items["Q"] = ps.items["q"];
    ps.items["Q"].name = "Q";
    return ps;
}

// ---------------------------------------------------------------------------

Dispersion dispersion_check(double psi, double m) {
    if (!(m > 0.0)) throw std::invalid_argument("mass must be positive");
    const double omega = m * std::cosh(psi), k = m * std::sinh(psi);
    // evaluate omega^2 - k^2 as (omega-k)(omega+k) = m e^-psi * m e^psi to
    // avoid catastrophic cancellation at large |psi|
    const double diff = m * std::exp(-std::abs(psi)), sum = m * std::exp(std::abs(psi));
    return {omega, k, diff * sum};
}

double spin_total(const SolutionTable& plane_wave, double m, double rho_max) {
    if (plane_wave.system != "plane_wave")
        throw std::invalid_argument("spin total is defined for plane-wave solutions only");
    ProfileSet ps = profiles_from_plane_wave(plane_wave, m);
    AnsatzFrame af = build_plane_wave(ps, plane_wave.params.psi, m);
    // the closed-form connection stays defined even where the frame itself is
    // degenerate (e.g. the zero-field rest state)
    IsoTripletForm alpha = plane_wave_connection(ps.get("f"), ps.get("g"));
    const double T = 0.5 * (plane_wave.t_front() + plane_wave.t_back());
    const double Z = 0.3;
    const int Nrho = 32, Nphi = 64;
    double tx = 0.0, ty = 0.0;
    for (int i = 0; i < Nrho; ++i) {
        const double rho = rho_max * (i + 0.5) / Nrho;
        const double wr = rho_max / Nrho;
        for (int j = 0; j < Nphi; ++j) {
            const double phi = 2.0 * M_PI * j / Nphi;
            const double wphi = 2.0 * M_PI / Nphi;
            const auto S = spin_density(af.frame, alpha, Point{T, Z, rho, phi});
            const double sigma = S[1][3]; // the S^t_{z phi} slot
            tx += sigma * std::cos(phi) * rho * wr * wphi;
            ty += sigma * std::sin(phi) * rho * wr * wphi;
        }
    }
    return std::sqrt(tx * tx + ty * ty);
}

} // namespace isoframe
