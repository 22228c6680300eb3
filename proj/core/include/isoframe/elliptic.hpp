#pragma once

namespace isoframe {

// Jacobi elliptic functions in the parameter convention m = k^2, 0 <= m < 1.

// Complete elliptic integral of the first kind via the arithmetic-geometric
// mean.
double complete_K(double m);

struct JacobiTriple {
    double sn, cn, dn;
};

JacobiTriple jacobi_sn_cn_dn(double u, double m);

// sd = sn / dn
double jacobi_sd(double u, double m);

// d/du of (sn, cn, dn) from the closed derivative relations.
JacobiTriple jacobi_derivatives(double u, double m);

} // namespace isoframe
