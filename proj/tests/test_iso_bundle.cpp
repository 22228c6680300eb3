#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <isoframe/ansatz.hpp>
#include <isoframe/iso_bundle.hpp>
#include <isoframe/odes.hpp>

#include <cmath>
#include <random>

using namespace isoframe;

namespace {

const double PI = std::acos(-1.0);

// flat spherical frame: P = Q = 1, p = q = r
AnsatzFrame flat_spherical(double m = 1.0) {
    ProfileSet ps;
    ps.domain = {0.3, 5.0};
    ps.add(expression_profile("P", "1"));
    ps.add(expression_profile("Q", "1"));
    ps.add(expression_profile("p", "u"));
    ps.add(expression_profile("q", "u"));
    return build_spherical(ps, m);
}

// random nondegenerate frame on the cartesian chart: smooth perturbation of
// the identity-like frame pi^a = dx^0 ^ dx^a + (a-dependent spatial 2-form)
IsoFrame random_frame(const ChartPtr& chart, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coef(-0.25, 0.25);
    std::uniform_int_distribution<int> pick(0, 3);
    IsoTripletForm pi(chart, 2);
    for (int a = 0; a < 3; ++a) {
        // dominant slots keeping the 12x12 structure system well conditioned
        pi[a].set_component({0, a + 1}, ScalarField(1.0) + ScalarField(coef(rng)) * coordinate(pick(rng)));
        const int b = (a + 1) % 3 + 1, c = (a + 2) % 3 + 1;
        std::vector<int> spatial{std::min(b, c), std::max(b, c)};
        pi[a].set_component(spatial, ScalarField(1.0) + ScalarField(coef(rng)) * coordinate(pick(rng)));
        // small smooth noise in every slot
        for (int s = 0; s < pi[a].size(); ++s)
            pi[a].component(s) =
                pi[a].component(s) + ScalarField(coef(rng)) * sf_sin(ScalarField(0.7) * coordinate(pick(rng)));
    }
    return IsoFrame(pi, 1.0);
}

Point random_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(0.2, 1.8);
    return {d(rng), d(rng), d(rng), d(rng)};
}

double frame_scale(const IsoFrame& frame, const Point& x) {
    double s = 0.0;
    for (int a = 0; a < 3; ++a)
        for (double v : frame.pi[a].evaluate(x)) s = std::max(s, std::abs(v));
    return s;
}

// residual of d pi^a + eps^a_{bc} alpha^b ^ pi^c at a point for given numbers
double structure_residual_at(const IsoFrame& frame, const ConnectionComponents& cc, const Point& x) {
    IsoTripletForm alpha(frame.chart(), 1);
    for (int a = 0; a < 3; ++a)
        for (int i = 0; i < 4; ++i) alpha[a].component(i) = ScalarField(cc.A[a][i]);
    double worst = 0.0;
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        DifferentialForm res = exterior_derivative(frame.pi[a]) + wedge(alpha[b], frame.pi[c]) -
                               wedge(alpha[c], frame.pi[b]);
        for (double v : res.evaluate(x)) worst = std::max(worst, std::abs(v));
    }
    return worst;
}

ScalarField smooth_profile_field(double a0, double a1, double w, int coord) {
    return ScalarField(a0) + ScalarField(a1) * sf_sin(ScalarField(w) * coordinate(coord));
}

} // namespace

TEST_CASE("flat spherical frame: pure-gauge connection and zero curvature") {
    AnsatzFrame af = flat_spherical(1.0);
    const Point x{0.2, 1.7, 0.9, 0.4};
    ConnectionComponents cc = solve_connection(af.frame, x);
    // Phi = alpha^1_t = 0, A = alpha^3_theta = 1, plus the pure-gauge angular terms
    CHECK(std::abs(cc.A[0][0]) < 1e-12);
    CHECK(std::abs(cc.A[0][3] + std::cos(0.9)) < 1e-12);
    CHECK(std::abs(cc.A[1][3] - std::sin(0.9)) < 1e-12);
    CHECK(std::abs(cc.A[2][2] - 1.0) < 1e-12);
    CHECK(cc.back_residual < 1e-12);

    IsoTripletForm K = curvature(connection_field(af.frame));
    std::mt19937_64 rng(2);
    for (int i = 0; i < 10; ++i) {
        Point p{0.0, 0.0, 0.0, 0.0};
        std::uniform_real_distribution<double> t(-1.0, 1.0), r(0.5, 3.0), th(0.4, 2.6), ph(0.1, 6.0);
        p = {t(rng), r(rng), th(rng), ph(rng)};
        for (int a = 0; a < 3; ++a)
            for (double v : K[a].evaluate(p)) CHECK(std::abs(v) < 1e-10);
    }
}

TEST_CASE("connection solve: 1000 random frames, two paths, back-substitution") {
    std::mt19937_64 rng(77);
    auto chart = builtin_chart(ChartKind::Cartesian);
    int accepted = 0;
    while (accepted < 1000) {
        IsoFrame frame = random_frame(chart, rng);
        const Point x = random_point(rng);
        ConnectionComponents direct, lsq;
        try {
            direct = solve_connection(frame, x, SolvePath::Direct);
            lsq = solve_connection(frame, x, SolvePath::LeastSquares);
        } catch (const DegenerateFrameError&) {
            continue; // the acceptance statement quantifies over nondegenerate frames
        }
        ++accepted;
        const double scale = frame_scale(frame, x);
        for (int a = 0; a < 3; ++a)
            for (int i = 0; i < 4; ++i) CHECK(std::abs(direct.A[a][i] - lsq.A[a][i]) < 1e-9);
        CHECK(direct.back_residual < 1e-9 * std::max(1.0, scale));
        // independent back-substitution through the forms machinery
        CHECK(structure_residual_at(frame, direct, x) < 1e-9 * std::max(1.0, scale));
    }
    CHECK(accepted == 1000);
}

TEST_CASE("degenerate frame raises with condition diagnostics") {
    auto chart = builtin_chart(ChartKind::Cartesian);
    IsoTripletForm pi(chart, 2);
    // pi^2 == pi^3 makes the structure system rank deficient
    pi[0].set_component({0, 1}, ScalarField(1.0));
    pi[1].set_component({0, 2}, ScalarField(1.0));
    pi[2].set_component({0, 2}, ScalarField(1.0));
    IsoFrame frame(pi, 1.0);
    try {
        (void)solve_connection(frame, {0.1, 0.2, 0.3, 0.4});
        FAIL("expected DegenerateFrameError");
    } catch (const DegenerateFrameError& e) {
        CHECK(e.condition > 1e8);
    }
}

TEST_CASE("Bianchi identity for the closed-form connection families") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> coef(-0.8, 0.8), freq(0.3, 1.2);

    // spherical family: alpha^1 = Phi dt - cos(theta) dphi, alpha^2 = A sin(theta) dphi,
    // alpha^3 = A dtheta, with arbitrary smooth Phi(r), A(r)
    for (int trial = 0; trial < 6; ++trial) {
        const double a0 = coef(rng), a1 = coef(rng), wa = freq(rng);
        const double b0 = coef(rng), b1 = coef(rng), wb = freq(rng);
        Profile Phi = expression_profile("Phi", std::to_string(a0) + " + " + std::to_string(a1) +
                                                    "*sin(" + std::to_string(wa) + "*u)");
        Profile A = expression_profile("A", std::to_string(b0) + " + " + std::to_string(b1) +
                                                "*cos(" + std::to_string(wb) + "*u)");
        IsoTripletForm alpha = spherical_connection(Phi, A);
        GridSpec grid = GridSpec::box({Interval{-1.0, 1.0}, {0.5, 4.0}, {0.4, 2.7}, {0.2, 6.0}},
                                      {3, 6, 5, 4});
        ResidualReport rep = bianchi_residual(alpha, grid);
        CHECK(rep.max_residual < 1e-8);
        CHECK(rep.skipped_points == 0);
    }

    // plane-wave family: alpha^1 = f dZ - dphi, alpha^2 = g rho dphi, alpha^3 = g drho
    for (int trial = 0; trial < 6; ++trial) {
        const double a0 = coef(rng), a1 = coef(rng), wa = freq(rng);
        Profile f = expression_profile("f", std::to_string(a0) + " + " + std::to_string(a1) +
                                                "*sin(" + std::to_string(wa) + "*u)");
        Profile g = expression_profile("g", std::to_string(coef(rng)) + " + " + std::to_string(coef(rng)) +
                                                "*cos(" + std::to_string(freq(rng)) + "*u)");
        IsoTripletForm alpha = plane_wave_connection(f, g);
        GridSpec grid = GridSpec::box({Interval{0.0, 6.0}, {-1.0, 1.0}, {0.3, 2.5}, {0.2, 6.0}},
                                      {6, 3, 4, 4});
        ResidualReport rep = bianchi_residual(alpha, grid);
        CHECK(rep.max_residual < 1e-8);
        CHECK(rep.skipped_points == 0);
    }
}

TEST_CASE("gauge covariance: curvature rotates with the frame") {
    std::mt19937_64 rng(19);
    AnsatzFrame af = flat_spherical(1.0);

    // position-dependent rotation about a fixed iso axis
    const std::array<double, 3> axis{0.36, 0.48, 0.8};
    GaugeRotationField R = axis_rotation(axis, ScalarField(0.4) + ScalarField(0.3) * coordinate(1));
    R.require_orthogonal({0.1, 1.3, 0.8, 0.2});

    IsoFrame rotated = gauge_transform(af.frame, R);
    IsoTripletForm K = curvature(connection_field(af.frame));
    IsoTripletForm Kr = curvature(connection_field(rotated));
    IsoTripletForm RK = gauge_transform(K, R);
    for (int i = 0; i < 8; ++i) {
        std::uniform_real_distribution<double> r(0.6, 2.8), th(0.5, 2.5), ph(0.2, 5.9), t(-0.5, 0.5);
        const Point x{t(rng), r(rng), th(rng), ph(rng)};
        for (int a = 0; a < 3; ++a) {
            const auto got = Kr[a].evaluate(x);
            const auto want = RK[a].evaluate(x);
            for (size_t s = 0; s < got.size(); ++s) CHECK(std::abs(got[s] - want[s]) < 1e-8);
        }
    }

    // same covariance on a curved (non-flat-connection) configuration
    ProfileSet ps;
    ps.domain = {0.5, 4.0};
    ps.add(expression_profile("P", "1 + 0.1*sin(u)"));
    ps.add(expression_profile("Q", "1 - 0.05*u"));
    ps.add(expression_profile("p", "u + 0.2"));
    ps.add(expression_profile("q", "u"));
    AnsatzFrame curved = build_spherical(ps, 1.0);
    IsoFrame rotated2 = gauge_transform(curved.frame, R);
    IsoTripletForm K2 = curvature(connection_field(curved.frame));
    IsoTripletForm K2r = curvature(connection_field(rotated2));
    IsoTripletForm RK2 = gauge_transform(K2, R);
    for (int i = 0; i < 5; ++i) {
        std::uniform_real_distribution<double> r(0.8, 3.2), th(0.5, 2.5), ph(0.2, 5.9), t(-0.5, 0.5);
        const Point x{t(rng), r(rng), th(rng), ph(rng)};
        for (int a = 0; a < 3; ++a) {
            const auto got = K2r[a].evaluate(x);
            const auto want = RK2[a].evaluate(x);
            for (size_t s = 0; s < got.size(); ++s) CHECK(std::abs(got[s] - want[s]) < 1e-8);
        }
    }
}

TEST_CASE("implication chain: field equation solutions satisfy Yang-Mills") {
    // integrate the plane-wave system, rebuild the frame, and check both the
    // field-equation residual and the source-free Yang-Mills residual
    ODESystem sys = plane_wave_system(1.0);
    SolutionTable tab = integrate(sys, {0.3, 0.9, 0.4, 0.1}, 0.0, 8.0);
    ProfileSet ps = profiles_from_plane_wave(tab, 1.0);
    AnsatzFrame af = build_plane_wave(ps, 0.0, 1.0);
    GridSpec grid = GridSpec::box({Interval{0.5, 7.5}, {-1.0, 1.0}, {0.4, 2.2}, {0.3, 5.9}},
                                  {8, 3, 3, 3});
    IsoTripletForm alpha = connection_field(af.frame);
    ResidualReport field = field_equation_residual(af.frame, alpha, grid);
    CHECK(field.max_residual < 1e-6);
    CHECK(field.skipped_points == 0);
    ResidualReport ym = yang_mills_residual(af.frame, alpha, grid);
    CHECK(ym.max_residual < 1e-6);
    CHECK(ym.skipped_points == 0);
}

TEST_CASE("observable identities") {
    const double m = 1.3;

    SUBCASE("flat frame: zero curvature gives L = -(m^2/2) pi.pi") {
        AnsatzFrame af = flat_spherical(m);
        IsoTripletForm alpha = connection_field(af.frame);
        const Point x{0.1, 1.4, 1.0, 0.6};
        const double L = lagrangian_density(af.frame, alpha, x);
        const double pp = pi_dot_pi(af.frame, x);
        CHECK(L == doctest::Approx(-0.5 * m * m * pp).epsilon(1e-9));
        // flat spherical frame is null: pi.pi = 0
        CHECK(std::abs(pp) < 1e-12);
    }

    SUBCASE("on-shell plane wave: L = +(m^2/2) pi.pi and trace(T) = -m^2 pi.pi") {
        ODESystem sys = plane_wave_system(m);
        SolutionTable tab = integrate(sys, {0.2, 0.8, 0.5, 0.0}, 0.0, 6.0);
        ProfileSet ps = profiles_from_plane_wave(tab, m);
        AnsatzFrame af = build_plane_wave(ps, 0.0, m);
        IsoTripletForm alpha = plane_wave_connection(ps.get("f"), ps.get("g"));
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> T(0.5, 5.5), rho(0.4, 2.0), ph(0.2, 6.0), Z(-1.0, 1.0);
        for (int i = 0; i < 12; ++i) {
            const Point x{T(rng), Z(rng), rho(rng), ph(rng)};
            const double pp = pi_dot_pi(af.frame, x);
            const double L = lagrangian_density(af.frame, alpha, x);
            const StressEnergy se = stress_energy(af.frame, alpha, x);
            CHECK(std::abs(L - 0.5 * m * m * pp) < 1e-8 * std::max(1.0, std::abs(pp)));
            CHECK(std::abs(se.trace + m * m * pp) < 1e-8 * std::max(1.0, std::abs(pp)));
            // explicit trace of the mixed tensor agrees with the reported trace
            double tr = 0.0;
            for (int k = 0; k < 4; ++k) tr += se.T[k][k];
            CHECK(std::abs(tr - se.trace) < 1e-12 * std::max(1.0, std::abs(tr)));
        }
    }

    SUBCASE("plane-wave spin density: S^t_{Z phi} = -f' / m^2") {
        ODESystem sys = plane_wave_system(m);
        SolutionTable tab = integrate(sys, {0.2, 0.8, 0.5, 0.0}, 0.0, 6.0);
        ProfileSet ps = profiles_from_plane_wave(tab, m);
        AnsatzFrame af = build_plane_wave(ps, 0.0, m);
        IsoTripletForm alpha = plane_wave_connection(ps.get("f"), ps.get("g"));
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> T(0.5, 5.5), rho(0.4, 2.0), ph(0.2, 6.0), Z(-1.0, 1.0);
        for (int i = 0; i < 12; ++i) {
            const Point x{T(rng), Z(rng), rho(rng), ph(rng)};
            const auto S = spin_density(af.frame, alpha, x);
            CHECK(std::abs(S[1][3] + ps.get("f").d1(x[0]) / (m * m)) < 1e-8);
            CHECK(std::abs(S[1][3] + S[3][1]) < 1e-14); // antisymmetry
        }
    }
}

TEST_CASE("residual reports carry grid metadata and parallel evaluation agrees") {
    AnsatzFrame af = flat_spherical(1.0);
    GridSpec grid = GridSpec::box({Interval{-0.5, 0.5}, {0.6, 3.0}, {0.5, 2.6}, {0.3, 5.9}},
                                  {2, 6, 4, 4});
    IsoTripletForm alpha = connection_field(af.frame);

    setenv("ISOFRAME_THREADS", "1", 1);
    ResidualReport serial = structure_residual(af.frame, alpha, grid);
    setenv("ISOFRAME_THREADS", "4", 1);
    ResidualReport parallel = structure_residual(af.frame, alpha, grid);
    unsetenv("ISOFRAME_THREADS");
    CHECK(serial.max_residual == doctest::Approx(parallel.max_residual).epsilon(1e-14));
    CHECK(serial.skipped_points == parallel.skipped_points);
    CHECK(!serial.to_json().empty());
}
