#pragma once

#include <vector>

#include "isoframe/chart.hpp"

namespace isoframe {

// Strictly-ascending index tuples for each degree, in lexicographic order.
// Degree p has C(4,p) slots; all form components live in this basis.
const std::vector<std::vector<int>>& index_tuples(int degree);
int tuple_slot(int degree, const std::vector<int>& ascending);

class DifferentialForm {
public:
    DifferentialForm(ChartPtr chart, int degree);

    int degree() const { return degree_; }
    const ChartPtr& chart() const { return chart_; }
    int size() const { return static_cast<int>(comps_.size()); }

    const ScalarField& component(int slot) const { return comps_[slot]; }
    ScalarField& component(int slot) { return comps_[slot]; }
    const ScalarField& component(const std::vector<int>& ascending) const {
        return comps_[tuple_slot(degree_, ascending)];
    }
    void set_component(const std::vector<int>& ascending, const ScalarField& f) {
        comps_[tuple_slot(degree_, ascending)] = f;
    }

    // All components at a point, in tuple order.
    std::vector<double> evaluate(const Point& x) const;

private:
    ChartPtr chart_;
    int degree_;
    std::vector<ScalarField> comps_;
};

DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b);
DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b);
DifferentialForm operator*(const ScalarField& s, const DifferentialForm& a);

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);
DifferentialForm exterior_derivative(const DifferentialForm& omega);

// Hodge star on the form's diagonal-metric chart.  The result's components
// remain scalar fields, so the starred form is still differentiable.
DifferentialForm hodge_star(const DifferentialForm& omega);

// Convenience: the 1-form dx^i of the chart.
DifferentialForm basis_one_form(const ChartPtr& chart, int i);

// Triplet of equal-degree forms indexed by the isotopic label a = 1..3
// (stored 0-based).
struct IsoTripletForm {
    std::array<DifferentialForm, 3> f;

    IsoTripletForm(ChartPtr chart, int degree)
        : f{DifferentialForm(chart, degree), DifferentialForm(chart, degree), DifferentialForm(chart, degree)} {}

    int degree() const { return f[0].degree(); }
    const ChartPtr& chart() const { return f[0].chart(); }
    DifferentialForm& operator[](int a) { return f[a]; }
    const DifferentialForm& operator[](int a) const { return f[a]; }
};

IsoTripletForm hodge_star(const IsoTripletForm& omega);

} // namespace isoframe
