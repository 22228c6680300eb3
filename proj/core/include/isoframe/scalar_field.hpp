#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

namespace isoframe {

// A point in a 4-coordinate chart, in the chart's coordinate order.
using Point = std::array<double, 4>;

// Node of an immutable expression tree.  Every node can evaluate itself at a
// point and produce the tree of its partial derivative with respect to one of
// the four coordinates, so derivatives compose analytically to any order that
// the leaves support.
class Expr {
public:
    using Ptr = std::shared_ptr<const Expr>;
    virtual ~Expr() = default;
    virtual double eval(const Point& x) const = 0;
    virtual Ptr diff(int coord) const = 0;
    virtual bool is_constant(double* value = nullptr) const { (void)value; return false; }
};

// Value-semantics handle used throughout the library.
class ScalarField {
public:
    ScalarField() : node_(zero_node()) {}
    ScalarField(double c) : node_(constant_node(c)) {}
    explicit ScalarField(Expr::Ptr node) : node_(std::move(node)) {}

    double operator()(const Point& x) const { return node_->eval(x); }
    ScalarField derivative(int coord) const { return ScalarField(node_->diff(coord)); }
    bool is_constant(double* value = nullptr) const { return node_->is_constant(value); }
    const Expr::Ptr& node() const { return node_; }

    static Expr::Ptr zero_node();
    static Expr::Ptr constant_node(double c);

private:
    Expr::Ptr node_;
};

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator/(const ScalarField& a, const ScalarField& b);

ScalarField coordinate(int index);
ScalarField sf_pow(const ScalarField& base, const ScalarField& expo);
ScalarField sf_sin(const ScalarField& a);
ScalarField sf_cos(const ScalarField& a);
ScalarField sf_sinh(const ScalarField& a);
ScalarField sf_cosh(const ScalarField& a);
ScalarField sf_sqrt(const ScalarField& a);

// One-variable profile with caller-supplied value and first two derivatives.
// Derivatives beyond the supplied order fall back to central differences of
// the highest supplied callback.
struct Profile {
    std::string name;
    std::function<double(double)> f0, f1, f2;

    double value(double u) const { return f0(u); }
    double d1(double u) const { return f1(u); }
    double d2(double u) const { return f2(u); }
};

// Profile lifted to a scalar field of the coordinate with index `coord`.
ScalarField profile_field(const Profile& p, int coord, int deriv_level = 0);

// Opaque pointwise function of a chart point; derivatives by central
// differences with step cbrt(machine eps) * max(1, |x_i|).
ScalarField numeric_field(std::function<double(const Point&)> fn);

// Minimal arithmetic grammar: + - * / ^, sin cos sinh cosh sqrt, coordinate
// names, named constants, numeric literals, parentheses.
ScalarField parse_expression(const std::string& text,
                             const std::array<std::string, 4>& coord_names,
                             const std::function<double(const std::string&)>* constants = nullptr);

} // namespace isoframe
