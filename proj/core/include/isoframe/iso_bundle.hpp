#pragma once

#include <optional>
#include <string>

#include "isoframe/forms.hpp"

namespace isoframe {

// A local isotopic frame: triplet of 2-forms plus the mass constant.
struct IsoFrame {
    IsoTripletForm pi;
    double mass;
    double condition_bound = 1e8;

    IsoFrame(IsoTripletForm pi_, double mass_)
        : pi(std::move(pi_)), mass(mass_) {
        if (pi.degree() != 2) throw std::invalid_argument("isotopic frame must consist of 2-forms");
        if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
    }
    const ChartPtr& chart() const { return pi.chart(); }
};

struct DegenerateFrameError : std::runtime_error {
    double condition;
    explicit DegenerateFrameError(double cond)
        : std::runtime_error("degenerate isotopic frame: structure matrix condition " + std::to_string(cond)),
          condition(cond) {}
};

// Connection components A^a_i at a point (a = iso label, i = coordinate).
struct ConnectionComponents {
    std::array<std::array<double, 4>, 3> A;
    double condition;      // SVD condition of the scaled structure matrix
    double back_residual;  // structure-equation residual of the returned solution
};

enum class SolvePath { Direct, LeastSquares };

// Solve the first structure equation d pi^a + eps^a_{bc} alpha^b wedge pi^c = 0
// as a 12x12 linear system at the point x.
ConnectionComponents solve_connection(const IsoFrame& frame, const Point& x,
                                      SolvePath path = SolvePath::Direct);

// The connection as a triplet of 1-forms whose components call the pointwise
// solve; derivatives fall back to central differences.
IsoTripletForm connection_field(const IsoFrame& frame);

// K^a = d alpha^a + 1/2 eps^a_{bc} alpha^b wedge alpha^c
IsoTripletForm curvature(const IsoTripletForm& alpha);

// D omega^a = d omega^a + eps^a_{bc} alpha^b wedge omega^c
IsoTripletForm covariant_derivative(const IsoTripletForm& alpha, const IsoTripletForm& omega);

// Rectangular evaluation grid; counts of 1 pin the coordinate at the range
// midpoint.
struct GridSpec {
    std::array<Interval, 4> range;
    std::array<int, 4> n;

    static GridSpec box(const std::array<Interval, 4>& range, const std::array<int, 4>& n) {
        return GridSpec{range, n};
    }
    template <typename F>
    void for_each(F&& fn) const {
        for (int i0 = 0; i0 < n[0]; ++i0)
            for (int i1 = 0; i1 < n[1]; ++i1)
                for (int i2 = 0; i2 < n[2]; ++i2)
                    for (int i3 = 0; i3 < n[3]; ++i3)
                        fn(Point{at(0, i0), at(1, i1), at(2, i2), at(3, i3)});
    }
    double at(int coord, int k) const {
        if (n[coord] <= 1) return 0.5 * (range[coord].lo + range[coord].hi);
        return range[coord].lo + (range[coord].hi - range[coord].lo) * k / (n[coord] - 1);
    }
    long total() const { return long(n[0]) * n[1] * n[2] * n[3]; }
};

// Reasonable finite sampling boxes for the builtin charts.
GridSpec default_grid(const Chart& chart, int points_per_coord = 8);

struct ResidualReport {
    std::string equation;
    GridSpec grid;
    double max_residual = 0.0;
    Point worst_point{};
    long skipped_points = 0;
    std::string to_json() const;
};

// max |K^a - m^2 pi^a| over the grid
ResidualReport field_equation_residual(const IsoFrame& frame, const GridSpec& grid);
ResidualReport field_equation_residual(const IsoFrame& frame, const IsoTripletForm& alpha, const GridSpec& grid);

// max |D K^a| over the grid, for any connection
ResidualReport bianchi_residual(const IsoTripletForm& alpha, const GridSpec& grid);

// max |D star(pi)^a - I^a| over the grid; absent current means source-free
ResidualReport yang_mills_residual(const IsoFrame& frame, const GridSpec& grid,
                                   const IsoTripletForm* current = nullptr);
ResidualReport yang_mills_residual(const IsoFrame& frame, const IsoTripletForm& alpha, const GridSpec& grid,
                                   const IsoTripletForm* current = nullptr);

// max structure-equation residual of (frame, alpha) over the grid
ResidualReport structure_residual(const IsoFrame& frame, const IsoTripletForm& alpha, const GridSpec& grid);

// Smooth field of SO(3) matrices with differentiable entries.
struct GaugeRotationField {
    std::array<std::array<ScalarField, 3>, 3> R;
    void require_orthogonal(const Point& x, double tol = 1e-12) const;
};

// Rotation about a fixed axis by a position-dependent differentiable angle.
GaugeRotationField axis_rotation(const std::array<double, 3>& axis, const ScalarField& angle);

IsoFrame gauge_transform(const IsoFrame& frame, const GaugeRotationField& R);
IsoTripletForm gauge_transform(const IsoTripletForm& omega, const GaugeRotationField& R);

// ---- observables ----------------------------------------------------------

// full contraction sum_a sum_{ij} pi^a_{ij} pi_a^{ij} with metric raising
double pi_dot_pi(const IsoFrame& frame, const Point& x);

// L = K.pi - (m^2/2) pi.pi + J.A   (source-free when current is null); the
// kinetic contraction runs over all ordered index pairs
double lagrangian_density(const IsoFrame& frame, const IsoTripletForm& alpha, const Point& x,
                          const IsoTripletForm* current = nullptr);

struct StressEnergy {
    std::array<std::array<double, 4>, 4> T; // T^m_n
    double trace;
};
StressEnergy stress_energy(const IsoFrame& frame, const IsoTripletForm& alpha, const Point& x);

// S^t_{ij} = sum_a [ (pi_a)^t_i alpha^a_j - (pi_a)^t_j alpha^a_i ],  i,j spatial
std::array<std::array<double, 4>, 4> spin_density(const IsoFrame& frame, const IsoTripletForm& alpha,
                                                  const Point& x);

} // namespace isoframe
