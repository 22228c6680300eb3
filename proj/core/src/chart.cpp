#include "isoframe/chart.hpp"

#include <cmath>
#include <limits>

namespace isoframe {

Chart::Chart(std::string name,
             std::array<std::string, 4> coords,
             std::array<ScalarField, 4> metric_diag,
             std::array<Interval, 4> domain)
    : name_(std::move(name)),
      coords_(std::move(coords)),
      metric_diag_(std::move(metric_diag)),
      domain_(domain),
      density_field_(sf_sqrt(-(metric_diag_[0] * metric_diag_[1] * metric_diag_[2] * metric_diag_[3]))) {}

bool Chart::contains(const Point& x) const {
    for (int i = 0; i < 4; ++i)
        if (!(x[i] > domain_[i].lo && x[i] < domain_[i].hi)) return false;
    return true;
}

void Chart::require_interior(const Point& x) const {
    if (!contains(x))
        throw std::domain_error("point outside domain of chart '" + name_ + "'");
}

double Chart::density(const Point& x) const {
    double prod = 1.0;
    for (int i = 0; i < 4; ++i) {
        const double gi = metric_diag_[i](x);
        if (std::fabs(gi) < 1e-14)
            throw SingularChartError("degenerate metric component g_" + std::to_string(i) + std::to_string(i) +
                                     " on chart '" + name_ + "'");
        prod *= gi;
    }
    return std::sqrt(-prod);
}

int Chart::coord_index(const std::string& name) const {
    for (int i = 0; i < 4; ++i)
        if (coords_[i] == name) return i;
    throw std::invalid_argument("chart '" + name_ + "' has no coordinate '" + name + "'");
}

double levi_civita_density(const Chart& chart, const Point& x) {
    chart.require_interior(x);
    return chart.density(x);
}

ChartPtr builtin_chart(ChartKind kind, double psi, double margin) {
    const double inf = std::numeric_limits<double>::infinity();
    const ScalarField one(1.0), mone(-1.0);
    switch (kind) {
        case ChartKind::Cartesian: {
            std::array<Interval, 4> dom{{{-inf, inf}, {-inf, inf}, {-inf, inf}, {-inf, inf}}};
            return std::make_shared<Chart>("cartesian",
                                           std::array<std::string, 4>{"t", "x", "y", "z"},
                                           std::array<ScalarField, 4>{one, mone, mone, mone}, dom);
        }
        case ChartKind::Spherical: {
            ScalarField r = coordinate(1), th = coordinate(2);
            std::array<Interval, 4> dom{{{-inf, inf}, {margin, inf}, {margin, M_PI - margin}, {-inf, inf}}};
            return std::make_shared<Chart>(
                "spherical", std::array<std::string, 4>{"t", "r", "theta", "phi"},
                std::array<ScalarField, 4>{one, mone, -(r * r), -(r * r * sf_sin(th) * sf_sin(th))}, dom);
        }
        case ChartKind::BoostedCylindrical: {
            // Coordinates (T, Z, rho, phi) obtained from lab cylindrical
            // (t, z, rho, phi) by the rapidity-psi boost along z; the flat
            // metric keeps the same diagonal form in the boosted pair.
            if (!std::isfinite(psi)) throw std::invalid_argument("boost rapidity must be finite");
            ScalarField rho = coordinate(2);
            std::array<Interval, 4> dom{{{-inf, inf}, {-inf, inf}, {margin, inf}, {-inf, inf}}};
            return std::make_shared<Chart>(
                "boosted_cylindrical", std::array<std::string, 4>{"T", "Z", "rho", "phi"},
                std::array<ScalarField, 4>{one, mone, mone, -(rho * rho)}, dom);
        }
        case ChartKind::Cone: {
            // zeta = sqrt(t^2 - r^2), eta = artanh(r/t):
            // ds^2 = dzeta^2 - zeta^2 [deta^2 + sinh^2(eta)(dtheta^2 + sin^2(theta) dphi^2)]
            ScalarField z = coordinate(0), eta = coordinate(1), th = coordinate(2);
            ScalarField z2 = z * z, sh = sf_sinh(eta), sn = sf_sin(th);
            std::array<Interval, 4> dom{{{margin, inf}, {margin, inf}, {margin, M_PI - margin}, {-inf, inf}}};
            return std::make_shared<Chart>(
                "cone", std::array<std::string, 4>{"zeta", "eta", "theta", "phi"},
                std::array<ScalarField, 4>{one, -z2, -(z2 * sh * sh), -(z2 * sh * sh * sn * sn)}, dom);
        }
    }
    throw std::invalid_argument("unknown chart kind");
}

ChartPtr chart_by_name(const std::string& name, double psi) {
    if (name == "cartesian") return builtin_chart(ChartKind::Cartesian);
    if (name == "spherical") return builtin_chart(ChartKind::Spherical);
    if (name == "boosted_cylindrical" || name == "cylindrical")
        return builtin_chart(ChartKind::BoostedCylindrical, psi);
    if (name == "cone") return builtin_chart(ChartKind::Cone);
    throw std::invalid_argument("unknown chart '" + name + "'");
}

} // namespace isoframe
