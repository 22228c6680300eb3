#include "isoframe/elliptic.hpp"

#include <cmath>
#include <stdexcept>

namespace isoframe {

double complete_K(double m) {
    if (!(m >= 0.0 && m < 1.0)) throw std::domain_error("elliptic parameter must satisfy 0 <= m < 1");
    double a = 1.0, b = std::sqrt(1.0 - m);
    // quadratic convergence: well under 1 ulp in < 10 sweeps; the cap guards
    // against the stop test stalling at the last representable bit
    for (int i = 0; i < 40 && std::fabs(a - b) > 1e-16 * a; ++i) {
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return M_PI / (2.0 * a);
}

namespace {

// AGM / descending-Landen evaluation on the reduced range.
JacobiTriple sncndn_core(double u, double m) {
    if (m == 0.0) return {std::sin(u), std::cos(u), 1.0};
    double a[32], c[32];
    a[0] = 1.0;
    c[0] = std::sqrt(m);
    double b = std::sqrt(1.0 - m);
    int n = 0;
    while (std::fabs(c[n]) > 1e-17 * a[n] && n < 31) {
        const double an = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = std::sqrt(a[n] * b);
        a[n + 1] = an;
        ++n;
    }
    double phi = std::ldexp(a[n] * u, n);
    for (int k = n; k > 0; --k)
        phi = 0.5 * (phi + std::asin(std::max(-1.0, std::min(1.0, c[k] / a[k] * std::sin(phi))) ));
    const double sn = std::sin(phi);
    const double cn = std::cos(phi);
    const double dn = std::sqrt(1.0 - m * sn * sn);
    return {sn, cn, dn};
}

} // namespace

JacobiTriple jacobi_sn_cn_dn(double u, double m) {
    if (!(m >= 0.0 && m < 1.0)) throw std::domain_error("elliptic parameter must satisfy 0 <= m < 1");
    if (!std::isfinite(u)) throw std::domain_error("elliptic argument must be finite");
    // quarter-period folding into [0, K]
    const double K = complete_K(m);
    double v = std::fmod(u, 4.0 * K);
    if (v < 0.0) v += 4.0 * K;
    double s_sn = 1.0, s_cn = 1.0;
    if (v >= 2.0 * K) {
        v -= 2.0 * K;
        s_sn = -s_sn;
        s_cn = -s_cn;
    }
    if (v > K) {
        v = 2.0 * K - v;
        s_cn = -s_cn;
    }
    JacobiTriple t = sncndn_core(v, m);
    return {s_sn * t.sn, s_cn * t.cn, t.dn};
}

double jacobi_sd(double u, double m) {
    const JacobiTriple t = jacobi_sn_cn_dn(u, m);
    return t.sn / t.dn;
}

JacobiTriple jacobi_derivatives(double u, double m) {
    const JacobiTriple t = jacobi_sn_cn_dn(u, m);
    return {t.cn * t.dn, -t.sn * t.dn, -m * t.sn * t.cn};
}

} // namespace isoframe
