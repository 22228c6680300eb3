#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <isoframe/elliptic.hpp>

#include <cmath>
#include <random>

using namespace isoframe;

namespace {

// Adaptive Simpson quadrature of the defining integral
//   K(m) = \int_0^{pi/2} dtheta / sqrt(1 - m sin^2 theta)
double k_integrand(double theta, double m) {
    const double s = std::sin(theta);
    return 1.0 / std::sqrt(1.0 - m * s * s);
}

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(double a, double b, double fa, double fm, double fb, double whole, double tol,
                        double m, int depth) {
    const double mid = 0.5 * (a + b);
    const double lm = k_integrand(0.5 * (a + mid), m);
    const double rm = k_integrand(0.5 * (mid + b), m);
    const double left = simpson(a, mid, fa, lm, fm);
    const double right = simpson(mid, b, fm, rm, fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(a, mid, fa, lm, fm, left, tol / 2, m, depth - 1) +
           adaptive_simpson(mid, b, fm, rm, fb, right, tol / 2, m, depth - 1);
}

double quadrature_K(double m) {
    const double a = 0.0, b = std::acos(-1.0) / 2.0;
    const double fa = k_integrand(a, m), fb = k_integrand(b, m), fm = k_integrand(0.5 * (a + b), m);
    return adaptive_simpson(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), 1e-15, m, 40);
}

} // namespace

TEST_CASE("complete integral: circular case") {
    CHECK(complete_K(0.0) == doctest::Approx(std::acos(-1.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("complete integral vs quadrature oracle") {
    CHECK(std::abs(complete_K(0.5) - quadrature_K(0.5)) < 1e-13);
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> dist(0.0, 0.98);
    for (int i = 0; i < 100; ++i) {
        const double m = dist(rng);
        const double agm = complete_K(m);
        const double quad = quadrature_K(m);
        CHECK(std::abs(agm - quad) < 1e-13 * std::max(1.0, std::abs(quad)));
    }
}

TEST_CASE("special values of sn, cn, dn") {
    const JacobiTriple z = jacobi_sn_cn_dn(0.0, 0.7);
    CHECK(z.sn == 0.0);
    CHECK(z.cn == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(z.dn == doctest::Approx(1.0).epsilon(1e-14));

    // m = 0 degenerates to circular functions, sd(u,0) = sin u
    for (double u : {-2.3, -0.4, 0.1, 0.9, 3.7}) {
        const JacobiTriple t = jacobi_sn_cn_dn(u, 0.0);
        CHECK(t.sn == doctest::Approx(std::sin(u)).epsilon(1e-13));
        CHECK(t.cn == doctest::Approx(std::cos(u)).epsilon(1e-13));
        CHECK(t.dn == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(jacobi_sd(u, 0.0) == doctest::Approx(std::sin(u)).epsilon(1e-13));
    }

    // quarter period: (1, 0, sqrt(1-m))
    for (double m : {0.1, 0.5, 0.9}) {
        const JacobiTriple t = jacobi_sn_cn_dn(complete_K(m), m);
        CHECK(std::abs(t.sn - 1.0) < 1e-12);
        CHECK(std::abs(t.cn) < 1e-12);
        CHECK(std::abs(t.dn - std::sqrt(1.0 - m)) < 1e-12);
    }
}

TEST_CASE("Pythagorean identities over four periods") {
    for (double m : {0.1, 0.25, 0.5, 0.9}) {
        const double K = complete_K(m);
        for (int i = 0; i < 1000; ++i) {
            const double u = -4.0 * K + 8.0 * K * i / 999.0;
            const JacobiTriple t = jacobi_sn_cn_dn(u, m);
            CHECK(std::abs(t.sn * t.sn + t.cn * t.cn - 1.0) < 1e-12);
            CHECK(std::abs(t.dn * t.dn + m * t.sn * t.sn - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("periodicity in 4K") {
    for (double m : {0.25, 0.5, 0.9}) {
        const double K = complete_K(m);
        for (double u : {-3.1, -0.7, 0.3, 1.9, 2.6}) {
            const JacobiTriple a = jacobi_sn_cn_dn(u, m);
            const JacobiTriple b = jacobi_sn_cn_dn(u + 4.0 * K, m);
            CHECK(std::abs(a.sn - b.sn) < 1e-11);
            CHECK(std::abs(a.cn - b.cn) < 1e-11);
            CHECK(std::abs(a.dn - b.dn) < 1e-11);
        }
    }
}

TEST_CASE("sd satisfies its first-order ODE identity") {
    // y = sd(u,m):  y'^2 = (1 - (1-m) y^2)(1 + m y^2), with y' from the
    // closed derivative relations (not finite differences)
    for (double m : {0.1, 0.5, 0.9}) {
        const double K = complete_K(m);
        for (int i = 0; i < 200; ++i) {
            const double u = -2.0 * K + 4.0 * K * i / 199.0;
            const JacobiTriple t = jacobi_sn_cn_dn(u, m);
            const JacobiTriple d = jacobi_derivatives(u, m);
            const double y = t.sn / t.dn;
            const double yp = (d.sn * t.dn - t.sn * d.dn) / (t.dn * t.dn);
            const double rhs = (1.0 - (1.0 - m) * y * y) * (1.0 + m * y * y);
            CHECK(std::abs(yp * yp - rhs) < 1e-10);
        }
    }
}

TEST_CASE("second derivative of sd determines the cubic coefficient") {
    // differentiating the first-order identity gives
    //   y'' = (2m-1) y - 2m(1-m) y^3;
    // at m = 1/2 the linear term drops and y'' = -y^3/2, which is the cubic
    // coefficient the wave-profile calibration relies on.  Check the
    // analytic prediction against a high-order finite-difference stencil.
    const double m = 0.5;
    const double h = 1e-3;
    for (double u : {0.3, 0.8, 1.4}) {
        auto f = [&](double v) { return jacobi_sd(v, m); };
        // 5-point stencil second derivative, O(h^4)
        const double ypp =
            (-f(u + 2 * h) + 16 * f(u + h) - 30 * f(u) + 16 * f(u - h) - f(u - 2 * h)) / (12 * h * h);
        const double y = f(u);
        // differentiating y'^2 = (1-(1-m)y^2)(1+m y^2):
        //   y'' = (2m-1) y - 2 m (1-m) y^3
        const double predicted = (2.0 * m - 1.0) * y - 2.0 * m * (1.0 - m) * y * y * y;
        CHECK(std::abs(ypp - predicted) < 1e-8);
        // at m = 1/2 the linear term vanishes: a pure cubic ODE y'' = -y^3/2,
        // the structure used by the wave-profile calibration
        CHECK(std::abs(predicted + 0.5 * y * y * y) < 1e-14);
    }
}

TEST_CASE("out-of-range parameter is rejected") {
    CHECK_THROWS(complete_K(1.0));
    CHECK_THROWS(jacobi_sn_cn_dn(0.3, -0.1));
}
