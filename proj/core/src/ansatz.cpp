#include "isoframe/ansatz.hpp"

#include <cmath>

namespace isoframe {

const Profile& ProfileSet::get(const std::string& name) const {
    auto it = items.find(name);
    if (it == items.end()) throw std::invalid_argument("profile set is missing '" + name + "'");
    return it->second;
}

Profile make_profile(std::string name, std::function<double(double)> f,
                     std::function<double(double)> d1, std::function<double(double)> d2) {
    return Profile{std::move(name), std::move(f), std::move(d1), std::move(d2)};
}

Profile expression_profile(std::string name, const std::string& text, const std::string& var) {
    ScalarField e = parse_expression(text, {var, "", "", ""});
    ScalarField e1 = e.derivative(0);
    ScalarField e2 = e1.derivative(0);
    auto lift = [](ScalarField f) {
        return [f](double u) { return f(Point{u, 0.0, 0.0, 0.0}); };
    };
    return Profile{std::move(name), lift(e), lift(e1), lift(e2)};
}

namespace {

void spot_check_profile(const Profile& p, const Interval& dom) {
    // derivative consistency by central differences at fixed pseudo-random points
    unsigned long seed = 0x2545F4914F6CDD1DULL;
    auto next = [&seed]() {
        seed ^= seed << 13; seed ^= seed >> 7; seed ^= seed << 17;
        return (seed >> 11) * (1.0 / 9007199254740992.0);
    };
    const double lo = dom.lo, hi = std::min(dom.hi, dom.lo + 10.0);
    for (int k = 0; k < 16; ++k) {
        const double u = lo + (hi - lo) * (0.05 + 0.9 * next());
        const double h = 1e-5 * std::max(1.0, std::fabs(u));
        const double fd1 = (p.value(u + h) - p.value(u - h)) / (2 * h);
        const double fd2 = (p.d1(u + h) - p.d1(u - h)) / (2 * h);
        const double s1 = std::max({1.0, std::fabs(p.d1(u)), std::fabs(fd1)});
        const double s2 = std::max({1.0, std::fabs(p.d2(u)), std::fabs(fd2)});
        if (std::fabs(p.d1(u) - fd1) > 1e-5 * s1 || std::fabs(p.d2(u) - fd2) > 1e-5 * s2)
            throw std::invalid_argument("profile '" + p.name + "' has inconsistent derivative callbacks");
    }
}

ScalarField lift(const Profile& p, int coord) { return profile_field(p, coord); }

} // namespace

AnsatzFrame build_spherical(const ProfileSet& profiles, double m) {
    if (profiles.domain.lo <= 0.0) throw std::invalid_argument("spherical ansatz domain must avoid r=0");
    ChartPtr chart = builtin_chart(ChartKind::Spherical);
    for (const char* n : {"P", "Q", "p", "q"}) spot_check_profile(profiles.get(n), profiles.domain);
    ScalarField P = lift(profiles.get("P"), 1), Q = lift(profiles.get("Q"), 1);
    ScalarField p = lift(profiles.get("p"), 1), q = lift(profiles.get("q"), 1);
    ScalarField r = coordinate(1), sth = sf_sin(coordinate(2));
    IsoTripletForm pi(chart, 2);
    pi[0].set_component({0, 1}, -P);
    pi[0].set_component({2, 3}, Q * r * r * sth);
    pi[1].set_component({0, 2}, -p);
    pi[1].set_component({1, 3}, -(q * sth));
    pi[2].set_component({0, 3}, p * sth);
    pi[2].set_component({1, 2}, -q);
    return AnsatzFrame{IsoFrame(std::move(pi), m), AnsatzKind::Spherical, profiles, 0.0};
}

AnsatzFrame build_plane_wave(const ProfileSet& profiles, double psi, double m) {
    ChartPtr chart = builtin_chart(ChartKind::BoostedCylindrical, psi);
    for (const char* n : {"P", "Q", "p", "q"}) spot_check_profile(profiles.get(n), profiles.domain);
    if (profiles.has("f") && profiles.has("h")) {
        // h = f / sqrt(2)
        const Profile& f = profiles.get("f");
        const Profile& h = profiles.get("h");
        for (int k = 0; k < 8; ++k) {
            const double u = profiles.domain.lo +
                             (std::min(profiles.domain.hi, profiles.domain.lo + 5.0) - profiles.domain.lo) * k / 7.0;
            if (std::fabs(h.value(u) - f.value(u) / std::sqrt(2.0)) > 1e-10 * std::max(1.0, std::fabs(f.value(u))))
                throw std::invalid_argument("plane-wave profiles violate h = f/sqrt(2)");
        }
    }
    ScalarField P = lift(profiles.get("P"), 0), Q = lift(profiles.get("Q"), 0);
    ScalarField p = lift(profiles.get("p"), 0), q = lift(profiles.get("q"), 0);
    ScalarField rho = coordinate(2);
    IsoTripletForm pi(chart, 2);
    pi[0].set_component({0, 1}, P);
    pi[0].set_component({2, 3}, -(Q * rho));
    pi[1].set_component({1, 2}, p);
    pi[1].set_component({0, 3}, q * rho);
    pi[2].set_component({1, 3}, -(p * rho)); // p rho dphi^dZ
    pi[2].set_component({0, 2}, q);
    return AnsatzFrame{IsoFrame(std::move(pi), m), AnsatzKind::PlaneWave, profiles, psi};
}

AnsatzFrame build_spherical_wave(const ProfileSet& profiles) {
    if (profiles.domain.lo <= 0.0) throw std::invalid_argument("spherical-wave domain must avoid the light cone");
    ChartPtr chart = builtin_chart(ChartKind::Cone);
    for (const char* n : {"p", "q"}) spot_check_profile(profiles.get(n), profiles.domain);
    ScalarField p = lift(profiles.get("p"), 0), q = lift(profiles.get("q"), 0);
    ScalarField z = coordinate(0), sh = sf_sinh(coordinate(1)), sn = sf_sin(coordinate(2));
    IsoTripletForm pi(chart, 2);
    pi[0].set_component({0, 1}, p * z);
    pi[0].set_component({2, 3}, -(q * z * z * sh * sh * sn));
    pi[1].set_component({0, 2}, p * z * sh);
    pi[1].set_component({1, 3}, q * z * z * sh * sn);
    pi[2].set_component({0, 3}, p * z * sh * sn);
    pi[2].set_component({1, 2}, -(q * z * z * sh)); // q z^2 sinh(eta) dtheta^deta
    return AnsatzFrame{IsoFrame(std::move(pi), 1.0), AnsatzKind::SphericalWave, profiles, 0.0};
}

IsoTripletForm spherical_connection(const Profile& Phi, const Profile& A) {
    ChartPtr chart = builtin_chart(ChartKind::Spherical);
    ScalarField Phif = profile_field(Phi, 1), Af = profile_field(A, 1);
    ScalarField cth = sf_cos(coordinate(2)), sth = sf_sin(coordinate(2));
    IsoTripletForm alpha(chart, 1);
    alpha[0].set_component({0}, Phif);
    alpha[0].set_component({3}, -cth);
    alpha[1].set_component({3}, Af * sth);
    alpha[2].set_component({2}, Af);
    return alpha;
}

IsoTripletForm plane_wave_connection(const Profile& f, const Profile& g) {
    ChartPtr chart = builtin_chart(ChartKind::BoostedCylindrical);
    ScalarField ff = profile_field(f, 0), gf = profile_field(g, 0);
    ScalarField rho = coordinate(2);
    IsoTripletForm alpha(chart, 1);
    alpha[0].set_component({1}, ff);
    alpha[0].set_component({3}, ScalarField(-1.0));
    alpha[1].set_component({3}, gf * rho);
    alpha[2].set_component({2}, gf);
    return alpha;
}

IsoTripletForm cone_connection(const Profile& A) {
    ChartPtr chart = builtin_chart(ChartKind::Cone);
    ScalarField Af = profile_field(A, 0);
    ScalarField sh = sf_sinh(coordinate(1)), ch = sf_cosh(coordinate(1));
    ScalarField sn = sf_sin(coordinate(2)), cn = sf_cos(coordinate(2));
    IsoTripletForm alpha(chart, 1);
    alpha[0].set_component({1}, Af);
    alpha[0].set_component({3}, cn);
    alpha[1].set_component({2}, Af * sh);
    alpha[1].set_component({3}, -(ch * sn));
    alpha[2].set_component({2}, ch);
    alpha[2].set_component({3}, Af * sh * sn);
    return alpha;
}

namespace {

// geometric weight of each (iso index, ascending-pair slot) in the ansatz shape
std::array<std::array<ScalarField, 6>, 3> shape_weights(AnsatzKind kind) {
    std::array<std::array<ScalarField, 6>, 3> w;
    for (auto& row : w)
        for (auto& e : row) e = ScalarField(1.0);
    // ascending pair slots: 0:(01) 1:(02) 2:(03) 3:(12) 4:(13) 5:(23)
    switch (kind) {
        case AnsatzKind::Spherical: {
            ScalarField r = coordinate(1), sth = sf_sin(coordinate(2));
            w[0][5] = r * r * sth;
            w[1][4] = sth;
            w[2][2] = sth;
            break;
        }
        case AnsatzKind::PlaneWave: {
            ScalarField rho = coordinate(2);
            w[0][5] = rho;
            w[1][2] = rho;
            w[2][4] = rho;
            break;
        }
        case AnsatzKind::SphericalWave: {
            ScalarField z = coordinate(0), sh = sf_sinh(coordinate(1)), sn = sf_sin(coordinate(2));
            w[0][0] = z;
            w[0][5] = z * z * sh * sh * sn;
            w[1][1] = z * sh;
            w[1][4] = z * z * sh * sn;
            w[2][2] = z * sh * sn;
            w[2][3] = z * z * sh;
            break;
        }
    }
    return w;
}

std::vector<Point> orbit_points(AnsatzKind kind, double u) {
    switch (kind) {
        case AnsatzKind::Spherical: // u = r
            return {Point{0.3, u, 0.7, 0.4}, Point{1.1, u, 1.4, 2.2}, Point{-0.5, u, 2.3, 5.0}};
        case AnsatzKind::PlaneWave: // u = T
            return {Point{u, 0.2, 0.8, 0.4}, Point{u, -1.0, 1.7, 2.0}, Point{u, 2.5, 0.5, 5.1}};
        case AnsatzKind::SphericalWave: // u = zeta
            return {Point{u, 0.6, 0.8, 0.3}, Point{u, 1.3, 1.9, 2.5}, Point{u, 0.9, 2.4, 4.4}};
    }
    throw std::logic_error("bad ansatz kind");
}

} // namespace

std::vector<ReducedResidual> reduced_residuals(const AnsatzFrame& ansatz) {
    auto weights = std::make_shared<std::array<std::array<ScalarField, 6>, 3>>(shape_weights(ansatz.kind));
    auto frame = std::make_shared<IsoFrame>(ansatz.frame);
    auto alpha = std::make_shared<IsoTripletForm>(connection_field(*frame));
    auto K = std::make_shared<IsoTripletForm>(curvature(*alpha));
    const AnsatzKind kind = ansatz.kind;
    const double m2 = ansatz.frame.mass * ansatz.frame.mass;

    std::vector<ReducedResidual> out;
    const auto& pairs = index_tuples(2);
    for (int a = 0; a < 3; ++a)
        for (size_t s = 0; s < pairs.size(); ++s) {
            std::string label = "K" + std::to_string(a + 1) + "_" + std::to_string(pairs[s][0]) +
                                std::to_string(pairs[s][1]);
            auto fn = [frame, K, weights, kind, m2, a, s](double u) {
                double first = 0.0;
                const auto pts = orbit_points(kind, u);
                for (size_t k = 0; k < pts.size(); ++k) {
                    const double kc = (*K)[a].component(static_cast<int>(s))(pts[k]);
                    const double pc = frame->pi[a].component(static_cast<int>(s))(pts[k]);
                    const double wv = (*weights)[a][s](pts[k]);
                    const double val = (kc - m2 * pc) / wv;
                    if (k == 0) {
                        first = val;
                    } else if (std::fabs(val - first) > 1e-10 * std::max(1.0, std::fabs(first))) {
                        throw std::runtime_error("residual does not factor through the symmetry orbit");
                    }
                }
                return first;
            };
            out.push_back(ReducedResidual{std::move(label), std::move(fn)});
        }
    return out;
}

std::array<double, 4> spherical_structure_relations(const ProfileSet& profiles, double m, double r) {
    (void)m;
    const Profile& P = profiles.get("P");
    const Profile& Q = profiles.get("Q");
    const Profile& p = profiles.get("p");
    const Profile& q = profiles.get("q");
    const Profile& A = profiles.get("A");
    const Profile& Phi = profiles.get("Phi");
    const double Av = A.value(r), Phiv = Phi.value(r);
    return {
        2.0 * r * Q.value(r) + r * r * Q.d1(r) - 2.0 * Av * q.value(r),
        p.d1(r) - (Av * P.value(r) - Phiv * q.value(r)),
        2.0 * r * P.value(r) + r * r * P.d1(r) - 2.0 * Av * p.value(r),
        q.d1(r) - (Av * Q.value(r) + Phiv * p.value(r)),
    };
}

} // namespace isoframe
