#pragma once

#include <memory>
#include <string>

#include "isoframe/scalar_field.hpp"

namespace isoframe {

struct Interval {
    double lo, hi;
};

// A 4-coordinate chart with a diagonal Lorentzian metric (+,-,-,-).  Metric
// components are scalar fields so that anything built from them (Hodge star
// included) stays differentiable.
class Chart {
public:
    Chart(std::string name,
          std::array<std::string, 4> coords,
          std::array<ScalarField, 4> metric_diag,
          std::array<Interval, 4> domain);

    const std::string& name() const { return name_; }
    const std::array<std::string, 4>& coords() const { return coords_; }
    const ScalarField& metric_diag(int i) const { return metric_diag_[i]; }
    const std::array<Interval, 4>& domain() const { return domain_; }

    bool contains(const Point& x) const;
    void require_interior(const Point& x) const;
    // sqrt(-det g); throws on a degenerate metric component.
    double density(const Point& x) const;
    const ScalarField& density_field() const { return density_field_; }

    int coord_index(const std::string& name) const;

private:
    std::string name_;
    std::array<std::string, 4> coords_;
    std::array<ScalarField, 4> metric_diag_;
    std::array<Interval, 4> domain_;
    ScalarField density_field_;
};

using ChartPtr = std::shared_ptr<const Chart>;

enum class ChartKind { Cartesian, Spherical, BoostedCylindrical, Cone };

// The four builtin charts.  `psi` is the boost rapidity and only affects the
// boosted cylindrical chart (where it is recorded for bookkeeping; the metric
// is boost-invariant).  Domains exclude coordinate singularities by `margin`.
ChartPtr builtin_chart(ChartKind kind, double psi = 0.0, double margin = 1e-6);

ChartPtr chart_by_name(const std::string& name, double psi = 0.0);

double levi_civita_density(const Chart& chart, const Point& x);

struct SingularChartError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace isoframe
