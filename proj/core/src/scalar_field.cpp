#include "isoframe/scalar_field.hpp"

#include <cctype>
#include <limits>
#include <utility>
#include <vector>

namespace isoframe {

namespace {

const double kFDStep = std::cbrt(std::numeric_limits<double>::epsilon());

class ConstExpr : public Expr {
public:
    explicit ConstExpr(double c) : c_(c) {}
    double eval(const Point&) const override { return c_; }
    Ptr diff(int) const override { return ScalarField::zero_node(); }
    bool is_constant(double* value) const override {
        if (value) *value = c_;
        return true;
    }
private:
    double c_;
};

class CoordExpr : public Expr {
public:
    explicit CoordExpr(int i) : i_(i) {}
    double eval(const Point& x) const override { return x[i_]; }
    Ptr diff(int coord) const override { return ScalarField::constant_node(coord == i_ ? 1.0 : 0.0); }
private:
    int i_;
};

bool const_value(const Expr::Ptr& e, double* v) { return e->is_constant(v); }

class AddExpr : public Expr {
public:
    AddExpr(Ptr a, Ptr b) : a_(std::move(a)), b_(std::move(b)) {}
    double eval(const Point& x) const override { return a_->eval(x) + b_->eval(x); }
    Ptr diff(int coord) const override;
private:
    Ptr a_, b_;
};

class MulExpr : public Expr {
public:
    MulExpr(Ptr a, Ptr b) : a_(std::move(a)), b_(std::move(b)) {}
    double eval(const Point& x) const override { return a_->eval(x) * b_->eval(x); }
    Ptr diff(int coord) const override;
private:
    Ptr a_, b_;
};

class DivExpr : public Expr {
public:
    DivExpr(Ptr a, Ptr b) : a_(std::move(a)), b_(std::move(b)) {}
    double eval(const Point& x) const override { return a_->eval(x) / b_->eval(x); }
    Ptr diff(int coord) const override;
private:
    Ptr a_, b_;
};

class PowExpr : public Expr {
public:
    PowExpr(Ptr a, Ptr b) : a_(std::move(a)), b_(std::move(b)) {}
    double eval(const Point& x) const override { return std::pow(a_->eval(x), b_->eval(x)); }
    Ptr diff(int coord) const override;
private:
    Ptr a_, b_;
};

class FuncExpr : public Expr {
public:
    enum Kind { Sin, Cos, Sinh, Cosh, Sqrt, Log };
    FuncExpr(Kind k, Ptr a) : k_(k), a_(std::move(a)) {}
    double eval(const Point& x) const override {
        const double u = a_->eval(x);
        switch (k_) {
            case Sin: return std::sin(u);
            case Cos: return std::cos(u);
            case Sinh: return std::sinh(u);
            case Cosh: return std::cosh(u);
            case Sqrt: return std::sqrt(u);
            case Log: return std::log(u);
        }
        return 0.0;
    }
    Ptr diff(int coord) const override;
private:
    Kind k_;
    Ptr a_;
};

class ProfileExpr : public Expr {
public:
    ProfileExpr(Profile p, int coord, int level)
        : p_(std::move(p)), coord_(coord), level_(level) {}
    double eval(const Point& x) const override { return eval_level(x[coord_], level_); }
    Ptr diff(int coord) const override {
        if (coord != coord_) return ScalarField::zero_node();
        return std::make_shared<ProfileExpr>(p_, coord_, level_ + 1);
    }
private:
    double eval_level(double u, int level) const {
        switch (level) {
            case 0: return p_.value(u);
            case 1: return p_.d1(u);
            case 2: return p_.d2(u);
            default: {
                const double h = kFDStep * std::max(1.0, std::fabs(u));
                return (eval_level(u + h, level - 1) - eval_level(u - h, level - 1)) / (2.0 * h);
            }
        }
    }
    Profile p_;
    int coord_;
    int level_;
};

class NumericExpr : public Expr {
public:
    explicit NumericExpr(std::function<double(const Point&)> fn) : fn_(std::move(fn)) {}
    double eval(const Point& x) const override { return fn_(x); }
    Ptr diff(int coord) const override;
private:
    std::function<double(const Point&)> fn_;
};

// Central finite difference of an arbitrary inner expression.
class FDExpr : public Expr {
public:
    FDExpr(Ptr inner, int coord) : inner_(std::move(inner)), coord_(coord) {}
    double eval(const Point& x) const override {
        // 5-point stencil, O(h^4): keeps derivative noise near 1e-12 so
        // downstream residual checks can resolve 1e-10 agreement
        static const double step = std::pow(std::numeric_limits<double>::epsilon(), 0.2);
        const double h = step * std::max(1.0, std::fabs(x[coord_]));
        auto f = [&](double d) {
            Point xx = x;
            xx[coord_] += d;
            return inner_->eval(xx);
        };
        return (-f(2 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2 * h)) / (12.0 * h);
    }
    Ptr diff(int coord) const override { return std::make_shared<FDExpr>(shared_from_this_(), coord); }
private:
    Ptr shared_from_this_() const { return std::make_shared<FDExpr>(inner_, coord_); }
    Ptr inner_;
    int coord_;
};

Expr::Ptr add(Expr::Ptr a, Expr::Ptr b);
Expr::Ptr mul(Expr::Ptr a, Expr::Ptr b);
Expr::Ptr divide(Expr::Ptr a, Expr::Ptr b);

Expr::Ptr add(Expr::Ptr a, Expr::Ptr b) {
    double ca, cb;
    const bool ka = const_value(a, &ca), kb = const_value(b, &cb);
    if (ka && kb) return ScalarField::constant_node(ca + cb);
    if (ka && ca == 0.0) return b;
    if (kb && cb == 0.0) return a;
    return std::make_shared<AddExpr>(std::move(a), std::move(b));
}

Expr::Ptr mul(Expr::Ptr a, Expr::Ptr b) {
    double ca, cb;
    const bool ka = const_value(a, &ca), kb = const_value(b, &cb);
    if (ka && kb) return ScalarField::constant_node(ca * cb);
    if ((ka && ca == 0.0) || (kb && cb == 0.0)) return ScalarField::zero_node();
    if (ka && ca == 1.0) return b;
    if (kb && cb == 1.0) return a;
    return std::make_shared<MulExpr>(std::move(a), std::move(b));
}

Expr::Ptr divide(Expr::Ptr a, Expr::Ptr b) {
    double ca, cb;
    const bool ka = const_value(a, &ca), kb = const_value(b, &cb);
    if (kb && cb == 1.0) return a;
    if (ka && ca == 0.0) return ScalarField::zero_node();
    if (ka && kb) return ScalarField::constant_node(ca / cb);
    return std::make_shared<DivExpr>(std::move(a), std::move(b));
}

Expr::Ptr neg(Expr::Ptr a) { return mul(ScalarField::constant_node(-1.0), std::move(a)); }

Expr::Ptr AddExpr::diff(int coord) const { return add(a_->diff(coord), b_->diff(coord)); }

Expr::Ptr MulExpr::diff(int coord) const {
    return add(mul(a_->diff(coord), b_), mul(a_, b_->diff(coord)));
}

Expr::Ptr DivExpr::diff(int coord) const {
    // (a/b)' = a'/b - a b' / b^2
    return add(divide(a_->diff(coord), b_),
               neg(divide(mul(a_, b_->diff(coord)), mul(b_, b_))));
}

Expr::Ptr PowExpr::diff(int coord) const {
    double cb;
    if (const_value(b_, &cb)) {
        // d a^c = c a^(c-1) a'
        Expr::Ptr p = std::make_shared<PowExpr>(a_, ScalarField::constant_node(cb - 1.0));
        return mul(ScalarField::constant_node(cb), mul(std::move(p), a_->diff(coord)));
    }
    // general a^b = exp(b log a):  a^b (b' log a + b a'/a)
    Expr::Ptr self = std::make_shared<PowExpr>(a_, b_);
    Expr::Ptr t1 = mul(b_->diff(coord), std::make_shared<FuncExpr>(FuncExpr::Log, a_));
    Expr::Ptr t2 = divide(mul(b_, a_->diff(coord)), a_);
    return mul(std::move(self), add(std::move(t1), std::move(t2)));
}

Expr::Ptr FuncExpr::diff(int coord) const {
    Expr::Ptr da = a_->diff(coord);
    switch (k_) {
        case Sin: return mul(std::make_shared<FuncExpr>(Cos, a_), da);
        case Cos: return neg(mul(std::make_shared<FuncExpr>(Sin, a_), da));
        case Sinh: return mul(std::make_shared<FuncExpr>(Cosh, a_), da);
        case Cosh: return mul(std::make_shared<FuncExpr>(Sinh, a_), da);
        case Sqrt: {
            Expr::Ptr self = std::make_shared<FuncExpr>(Sqrt, a_);
            return divide(da, mul(ScalarField::constant_node(2.0), std::move(self)));
        }
        case Log: return divide(da, a_);
    }
    return ScalarField::zero_node();
}

Expr::Ptr NumericExpr::diff(int coord) const {
    return std::make_shared<FDExpr>(std::make_shared<NumericExpr>(fn_), coord);
}

} // namespace

Expr::Ptr ScalarField::zero_node() {
    static const Expr::Ptr zero = std::make_shared<ConstExpr>(0.0);
    return zero;
}

Expr::Ptr ScalarField::constant_node(double c) {
    if (c == 0.0) return zero_node();
    return std::make_shared<ConstExpr>(c);
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) { return ScalarField(add(a.node(), b.node())); }
ScalarField operator-(const ScalarField& a, const ScalarField& b) { return ScalarField(add(a.node(), neg(b.node()))); }
ScalarField operator-(const ScalarField& a) { return ScalarField(neg(a.node())); }
ScalarField operator*(const ScalarField& a, const ScalarField& b) { return ScalarField(mul(a.node(), b.node())); }
ScalarField operator/(const ScalarField& a, const ScalarField& b) { return ScalarField(divide(a.node(), b.node())); }

ScalarField coordinate(int index) {
    if (index < 0 || index > 3) throw std::invalid_argument("coordinate index out of range");
    return ScalarField(std::make_shared<CoordExpr>(index));
}

ScalarField sf_pow(const ScalarField& base, const ScalarField& expo) {
    return ScalarField(std::make_shared<PowExpr>(base.node(), expo.node()));
}
ScalarField sf_sin(const ScalarField& a) { return ScalarField(std::make_shared<FuncExpr>(FuncExpr::Sin, a.node())); }
ScalarField sf_cos(const ScalarField& a) { return ScalarField(std::make_shared<FuncExpr>(FuncExpr::Cos, a.node())); }
ScalarField sf_sinh(const ScalarField& a) { return ScalarField(std::make_shared<FuncExpr>(FuncExpr::Sinh, a.node())); }
ScalarField sf_cosh(const ScalarField& a) { return ScalarField(std::make_shared<FuncExpr>(FuncExpr::Cosh, a.node())); }
ScalarField sf_sqrt(const ScalarField& a) { return ScalarField(std::make_shared<FuncExpr>(FuncExpr::Sqrt, a.node())); }

ScalarField profile_field(const Profile& p, int coord, int deriv_level) {
    if (!p.f0 || !p.f1 || !p.f2) throw std::invalid_argument("profile '" + p.name + "' missing derivative callbacks");
    return ScalarField(std::make_shared<ProfileExpr>(p, coord, deriv_level));
}

ScalarField numeric_field(std::function<double(const Point&)> fn) {
    return ScalarField(std::make_shared<NumericExpr>(std::move(fn)));
}

// ---------------------------------------------------------------------------
// recursive-descent parser

namespace {

struct Parser {
    const std::string& s;
    size_t pos = 0;
    const std::array<std::string, 4>& coords;
    const std::function<double(const std::string&)>* constants;

    void skip() { while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos; }

    bool consume(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) {
        throw std::runtime_error("expression parse error at offset " + std::to_string(pos) + ": " + what);
    }

    ScalarField parse() {
        ScalarField e = expr();
        skip();
        if (pos != s.size()) fail("trailing input");
        return e;
    }

    ScalarField expr() {
        ScalarField e = term();
        for (;;) {
            if (consume('+')) e = e + term();
            else if (consume('-')) e = e - term();
            else return e;
        }
    }

    ScalarField term() {
        ScalarField e = unary();
        for (;;) {
            if (consume('*')) e = e * unary();
            else if (consume('/')) e = e / unary();
            else return e;
        }
    }

    ScalarField unary() {
        if (consume('-')) return -unary();
        if (consume('+')) return unary();
        return power();
    }

    ScalarField power() {
        ScalarField base = atom();
        if (consume('^')) return sf_pow(base, unary()); // right-associative
        return base;
    }

    ScalarField atom() {
        skip();
        if (pos >= s.size()) fail("unexpected end of input");
        const char c = s[pos];
        if (c == '(') {
            ++pos;
            ScalarField e = expr();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    ScalarField number() {
        size_t end = pos;
        double v = std::stod(s.substr(pos), &end);
        pos += end;
        return ScalarField(v);
    }

    ScalarField identifier() {
        size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        const std::string name = s.substr(start, pos - start);
        if (consume('(')) {
            ScalarField arg = expr();
            if (!consume(')')) fail("expected ')' after function argument");
            if (name == "sin") return sf_sin(arg);
            if (name == "cos") return sf_cos(arg);
            if (name == "sinh") return sf_sinh(arg);
            if (name == "cosh") return sf_cosh(arg);
            if (name == "sqrt") return sf_sqrt(arg);
            fail("unknown function '" + name + "'");
        }
        for (int i = 0; i < 4; ++i)
            if (coords[i] == name) return coordinate(i);
        if (name == "pi") return ScalarField(M_PI);
        if (constants && *constants) return ScalarField((*constants)(name));
        fail("unknown identifier '" + name + "'");
    }
};

} // namespace

ScalarField parse_expression(const std::string& text,
                             const std::array<std::string, 4>& coord_names,
                             const std::function<double(const std::string&)>* constants) {
    Parser p{text, 0, coord_names, constants};
    return p.parse();
}

} // namespace isoframe
