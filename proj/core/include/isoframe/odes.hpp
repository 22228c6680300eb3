#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "isoframe/ansatz.hpp"

namespace isoframe {

struct ODESystem {
    std::string name;
    int dim = 0;
    std::vector<std::string> state_names;
    // rhs(t, y, dydt)
    std::function<void(double, const double*, double*)> rhs;
    struct FirstIntegral {
        std::string name;
        std::function<double(double, const double*)> value;
    };
    std::vector<FirstIntegral> first_integrals;
    struct Params {
        double m = 1.0, c1 = 0.0, c2 = 0.0, psi = 0.0;
    } params;
};

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    long max_steps = 2000000;
    double initial_step = 0.0; // 0 = automatic
};

struct IntegrationError : std::runtime_error {
    double location;
    IntegrationError(const std::string& what, double where)
        : std::runtime_error(what), location(where) {}
};

// Sampled trajectory over the accepted steps of the adaptive integrator, with
// cubic-Hermite dense output between nodes.
class SolutionTable {
public:
    std::string system;
    ODESystem::Params params;
    std::vector<std::string> state_names;
    std::vector<std::string> integral_names;

    std::vector<double> t;                         // accepted nodes, strictly monotone
    std::vector<std::vector<double>> y;            // state per node
    std::vector<std::vector<double>> dy;           // state derivative per node
    std::vector<std::vector<double>> integrals;    // conserved columns per node

    long steps = 0, rejected = 0;
    double rel_tol = 0.0, abs_tol = 0.0;

    int dim() const { return state_names.empty() ? 0 : static_cast<int>(state_names.size()); }
    double t_front() const { return t.front(); }
    double t_back() const { return t.back(); }

    // cubic Hermite on the accepted step containing s
    std::vector<double> state(double s) const;
    std::vector<double> state_derivative(double s) const;

    void write_csv(std::ostream& os) const;
    std::string manifest_json() const;

    static SolutionTable read_csv(std::istream& is);
};

SolutionTable integrate(const ODESystem& system, const std::vector<double>& initial,
                        double t0, double t1, const IntegratorConfig& config = {});

// ---- the three symmetry-reduced systems -------------------------------------

// state (A, A', Phi, Phi'):  A'' = A(A^2-1)/r^2 - A Phi^2,
//                            Phi'' = 2 A^2 Phi / r^2 - 2 Phi'/r
ODESystem point_charge_system(double m);

// state (g, g', h, h'):  g'' = -g^3 - 2 g h^2,  h'' = -2 g^2 h,
// energy (g'^2 + h'^2)/2 + g^4/4 + g^2 h^2
ODESystem plane_wave_system(double m);

// state (y, y') in s = ln(zeta):  y'' = -2 y (1 + y^2),
// first integral y'^2 + (1+y^2)^2
ODESystem spherical_wave_system();

// ---- point-charge boundary value problem ------------------------------------

struct ShootingConfig {
    double r_min = 0.05;
    double r_max = 300.0;
    // target asymptotic charges:  Phi -> c1/r^2,  A -> 1 + c2/r.
    // Both zero selects the regular-origin branch (trivial solution).
    double c1 = 0.0, c2 = 0.0;
    // initial-guess shooting parameters for the regular-series start (A = 1 + a r^2, Phi = b r)
    double guess_a = 0.0, guess_b = 0.0;
    int max_iterations = 30;
    double tolerance = 1e-6;
    IntegratorConfig integrator{1e-12, 1e-14, 2000000, 0.0};
};

struct ShootingError : std::runtime_error {
    std::vector<double> mismatch_history;
    ShootingError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), mismatch_history(std::move(history)) {}
};

struct PointChargeSolution {
    SolutionTable table;
    double c1 = 0.0, c2 = 0.0;                  // least-squares fits over the last decade
    double c1_fit_residual = 0.0, c2_fit_residual = 0.0;
    std::vector<double> mismatch_history;
};

PointChargeSolution shoot_point_charge(const ShootingConfig& config);

// ---- ansatz profile reconstruction ------------------------------------------

// Profiles (P,Q,p,q and A,Phi) from a point-charge trajectory; derivatives come
// from the ODE right-hand side, not from re-differencing the table.
ProfileSet profiles_from_point_charge(const SolutionTable& table, double m);

// Profiles (P,Q,p,q,f,g,h) from a plane-wave trajectory.
ProfileSet profiles_from_plane_wave(const SolutionTable& table, double m);

// Profiles (p,q,A) of zeta from a spherical-wave trajectory in s = ln(zeta).
ProfileSet profiles_from_spherical_wave(const SolutionTable& table);

// ---- observables helpers ------------------------------------------------------

struct Dispersion {
    double omega, k, omega2_minus_k2;
};
Dispersion dispersion_check(double psi, double m);

// Norm of the disk-integrated spin vector for a plane-wave solution, at the
// table's mid time.
double spin_total(const SolutionTable& plane_wave, double m, double rho_max);

} // namespace isoframe
