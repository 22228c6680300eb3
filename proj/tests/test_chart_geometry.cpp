#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <isoframe/chart.hpp>
#include <isoframe/forms.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace isoframe;

namespace {

const double PI = std::acos(-1.0);

Point random_interior(const Chart& chart, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    Point x{};
    for (int i = 0; i < 4; ++i) {
        const Interval& iv = chart.domain()[i];
        const double lo = std::max(iv.lo, -10.0), hi = std::min(iv.hi, 10.0);
        x[i] = lo + (hi - lo) * unit(rng);
    }
    return x;
}

std::array<double, 4> metric_at(const Chart& chart, const Point& x) {
    std::array<double, 4> g{};
    for (int i = 0; i < 4; ++i) g[i] = chart.metric_diag(i)(x);
    return g;
}

// Brute-force Hodge star: full Levi-Civita contraction with inverse-metric
// index raising, enumerating every permutation of the four indices.
std::vector<double> brute_force_star(const DifferentialForm& w, const Point& x) {
    const Chart& chart = *w.chart();
    const int p = w.degree();
    const auto g = metric_at(chart, x);
    const double rho = chart.density(x);
    const auto& in_tuples = index_tuples(p);
    const auto& out_tuples = index_tuples(4 - p);
    const std::vector<double> wv = w.evaluate(x);

    int perm[4] = {0, 1, 2, 3};
    std::vector<double> out(out_tuples.size(), 0.0);
    do {
        // parity of the permutation: epsilon with ascending indices is +1
        int sign = 1;
        {
            int q[4] = {perm[0], perm[1], perm[2], perm[3]};
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j)
                    if (q[i] > q[j]) {
                        std::swap(q[i], q[j]);
                        sign = -sign;
                    }
        }
        // head = form indices, tail = output slot; keep ascending tails only
        std::vector<int> head(perm, perm + p), tail(perm + p, perm + 4);
        if (!std::is_sorted(tail.begin(), tail.end())) continue;
        // antisymmetrize the head back to its ascending component slot
        std::vector<int> h = head;
        int hsign = 1;
        for (size_t i = 0; i < h.size(); ++i)
            for (size_t j = i + 1; j < h.size(); ++j)
                if (h[i] > h[j]) {
                    std::swap(h[i], h[j]);
                    hsign = -hsign;
                }
        const int in_slot = p == 0 ? 0 : tuple_slot(p, h);
        double raise = 1.0;
        for (int i : head) raise *= 1.0 / g[i];
        const int out_slot = p == 4 ? 0 : tuple_slot(4 - p, tail);
        out[out_slot] += rho * raise * hsign * sign * wv[in_slot];
    } while (std::next_permutation(perm, perm + 4));
    // each unordered head was visited once per ordering: divide by p!
    const double pf = std::tgamma(p + 1);
    for (double& v : out) v /= pf;
    return out;
}

DifferentialForm random_form(const ChartPtr& chart, int degree, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    DifferentialForm w(chart, degree);
    for (int s = 0; s < w.size(); ++s) {
        const double a = coef(rng), b = coef(rng);
        w.component(s) = ScalarField(a) + ScalarField(b) * coordinate(s % 4);
    }
    return w;
}

DifferentialForm scaled(double c, const DifferentialForm& w) { return ScalarField(c) * w; }

} // namespace

TEST_CASE("builtin metric values") {
    auto cart = builtin_chart(ChartKind::Cartesian);
    const auto gc = metric_at(*cart, {0.3, -1.2, 4.5, 0.9});
    CHECK(gc[0] == 1.0);
    CHECK(gc[1] == -1.0);
    CHECK(gc[2] == -1.0);
    CHECK(gc[3] == -1.0);

    auto cone = builtin_chart(ChartKind::Cone);
    const auto gk = metric_at(*cone, {2.0, 1.0, PI / 2.0, 0.0});
    const double sh1 = std::sinh(1.0);
    CHECK(gk[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gk[1] == doctest::Approx(-4.0).epsilon(1e-15));
    CHECK(gk[2] == doctest::Approx(-4.0 * sh1 * sh1).epsilon(1e-14));
    CHECK(gk[3] == doctest::Approx(-4.0 * sh1 * sh1).epsilon(1e-14)); // sin(pi/2) = 1

    auto sph = builtin_chart(ChartKind::Spherical);
    const auto gs = metric_at(*sph, {0.0, 3.0, PI / 6.0, 1.0});
    CHECK(gs[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gs[1] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(gs[2] == doctest::Approx(-9.0).epsilon(1e-14));
    CHECK(gs[3] == doctest::Approx(-2.25).epsilon(1e-14));
}

TEST_CASE("metric signature on random interior points") {
    std::mt19937_64 rng(7);
    for (ChartKind kind :
         {ChartKind::Cartesian, ChartKind::Spherical, ChartKind::BoostedCylindrical, ChartKind::Cone}) {
        auto chart = builtin_chart(kind, 0.0, 0.35);
        for (int i = 0; i < 200; ++i) {
            const auto g = metric_at(*chart, random_interior(*chart, rng));
            CHECK(g[0] > 0.0);
            for (int j = 1; j < 4; ++j) CHECK(g[j] < 0.0);
        }
    }
}

TEST_CASE("Levi-Civita density examples and invariant") {
    auto cone = builtin_chart(ChartKind::Cone);
    const double sh1 = std::sinh(1.0);
    CHECK(cone->density({2.0, 1.0, PI / 2.0, 0.0}) == doctest::Approx(8.0 * sh1 * sh1).epsilon(1e-14));

    auto cart = builtin_chart(ChartKind::Cartesian);
    CHECK(cart->density({-3.0, 0.4, 2.2, 7.0}) == doctest::Approx(1.0).epsilon(1e-15));

    auto sph = builtin_chart(ChartKind::Spherical);
    CHECK(sph->density({0.0, 2.0, PI / 2.0, 0.3}) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(levi_civita_density(*sph, {0.0, 2.0, PI / 2.0, 0.3}) == doctest::Approx(4.0).epsilon(1e-14));

    // density == sqrt(-prod g_ii) on 1e4 random points per chart
    std::mt19937_64 rng(99);
    for (ChartKind kind :
         {ChartKind::Cartesian, ChartKind::Spherical, ChartKind::BoostedCylindrical, ChartKind::Cone}) {
        auto chart = builtin_chart(kind, 0.0, 0.6);
        for (int i = 0; i < 10000; ++i) {
            const Point x = random_interior(*chart, rng);
            const auto g = metric_at(*chart, x);
            const double expected = std::sqrt(-g[0] * g[1] * g[2] * g[3]);
            CHECK(std::abs(chart->density(x) - expected) < 1e-12 * expected);
        }
    }
}

TEST_CASE("hodge star against the brute-force contraction oracle") {
    std::mt19937_64 rng(41);
    for (ChartKind kind : {ChartKind::Cartesian, ChartKind::Spherical, ChartKind::Cone}) {
        auto chart = builtin_chart(kind, 0.0, 0.35);
        for (int degree = 0; degree <= 4; ++degree) {
            for (int trial = 0; trial < 20; ++trial) {
                DifferentialForm w = random_form(chart, degree, rng);
                DifferentialForm sw = hodge_star(w);
                const Point x = random_interior(*chart, rng);
                const auto got = sw.evaluate(x);
                const auto want = brute_force_star(w, x);
                REQUIRE(got.size() == want.size());
                for (size_t s = 0; s < got.size(); ++s)
                    CHECK(std::abs(got[s] - want[s]) < 1e-11 * std::max(1.0, std::abs(want[s])));
            }
        }
    }
}

TEST_CASE("star of dx^dy in cartesian coordinates") {
    auto chart = builtin_chart(ChartKind::Cartesian);
    DifferentialForm w = wedge(basis_one_form(chart, 1), basis_one_form(chart, 2));
    DifferentialForm sw = hodge_star(w);
    const Point x{0.1, 0.2, 0.3, 0.4};
    const auto got = sw.evaluate(x);
    const auto want = brute_force_star(w, x);
    for (size_t s = 0; s < got.size(); ++s) CHECK(got[s] == doctest::Approx(want[s]).epsilon(1e-14));
}

TEST_CASE("star is an involution up to the signature sign") {
    // Lorentzian signature: star(star(w)) = (-1)^{p(4-p)} * (-1) * w
    std::mt19937_64 rng(17);
    for (ChartKind kind : {ChartKind::Cartesian, ChartKind::Spherical, ChartKind::Cone}) {
        auto chart = builtin_chart(kind, 0.0, 0.35);
        for (int degree = 0; degree <= 4; ++degree) {
            const double sign = ((degree * (4 - degree)) % 2 == 0 ? 1.0 : -1.0) * (-1.0);
            for (int trial = 0; trial < 10; ++trial) {
                DifferentialForm w = random_form(chart, degree, rng);
                DifferentialForm ss = hodge_star(hodge_star(w));
                const Point x = random_interior(*chart, rng);
                const auto a = ss.evaluate(x);
                const auto b = w.evaluate(x);
                for (size_t s = 0; s < a.size(); ++s)
                    CHECK(std::abs(a[s] - sign * b[s]) < 1e-12 * std::max(1.0, std::abs(b[s])));
            }
        }
    }
}

TEST_CASE("star is pointwise linear") {
    std::mt19937_64 rng(23);
    auto chart = builtin_chart(ChartKind::Spherical, 0.0, 0.3);
    for (int degree = 1; degree <= 3; ++degree) {
        DifferentialForm w = random_form(chart, degree, rng);
        DifferentialForm e = random_form(chart, degree, rng);
        DifferentialForm lhs = hodge_star(scaled(1.7, w) + scaled(-0.4, e));
        DifferentialForm rhs = scaled(1.7, hodge_star(w)) + scaled(-0.4, hodge_star(e));
        for (int trial = 0; trial < 50; ++trial) {
            const Point x = random_interior(*chart, rng);
            const auto l = lhs.evaluate(x);
            const auto r = rhs.evaluate(x);
            for (size_t s = 0; s < l.size(); ++s)
                CHECK(std::abs(l[s] - r[s]) < 1e-12 * std::max(1.0, std::abs(r[s])));
        }
    }
}

TEST_CASE("spherical transmutation slots for (P,Q,p,q) = (1,0,0,0)") {
    // A 2-form with only the (t,r) slot filled as -P dt^dr: its star must
    // land entirely in the (theta,phi) slot with coefficient P r^2 sin(theta),
    // i.e. the slot map sends (P, Q) to (-Q, P) = (0, 1).
    auto chart = builtin_chart(ChartKind::Spherical);
    DifferentialForm w(chart, 2);
    w.set_component({0, 1}, ScalarField(-1.0)); // -P dt^dr with P = 1
    DifferentialForm sw = hodge_star(w);
    const Point x{0.0, 2.0, 1.1, 0.3};
    const auto v = sw.evaluate(x);
    CHECK(v[tuple_slot(2, {2, 3})] == doctest::Approx(4.0 * std::sin(1.1)).epsilon(1e-13));
    CHECK(std::abs(v[tuple_slot(2, {0, 1})]) < 1e-14);
    CHECK(std::abs(v[tuple_slot(2, {0, 2})]) < 1e-14);
    CHECK(std::abs(v[tuple_slot(2, {1, 3})]) < 1e-14);
}

TEST_CASE("singular chart error at degenerate points") {
    auto sph = builtin_chart(ChartKind::Spherical, 0.0, 0.0);
    CHECK_THROWS_AS((void)sph->density({0.0, 1.0, 0.0, 0.2}), SingularChartError);
    // theta tiny but interior: g_33 = -r^2 sin^2(theta) is within 1e-14 of zero
    CHECK_THROWS_AS((void)levi_civita_density(*sph, {0.0, 1.0, 1e-10, 0.2}), SingularChartError);
}

TEST_CASE("chart lookup by name") {
    CHECK(chart_by_name("spherical")->coords()[1] == "r");
    CHECK(chart_by_name("cone")->coords()[0] == "zeta");
    CHECK_THROWS(chart_by_name("no_such_chart"));
}
