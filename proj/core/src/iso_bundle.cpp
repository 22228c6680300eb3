#include "isoframe/iso_bundle.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

namespace isoframe {

namespace {

constexpr int eps_sign(int a, int b, int c) {
    if (a == b || b == c || a == c) return 0;
    // parity of the permutation (a,b,c) of (0,1,2)
    return ((b - a + 3) % 3 == 1) ? 1 : -1;
}

// (dx^i wedge pi)_J for all ascending triples J, given the six ascending-pair
// components of a 2-form at a point.
void wedge_basis_into(int i, const std::vector<double>& pi2, double coeff,
                      Eigen::Ref<Eigen::VectorXd> out) {
    const auto& pairs = index_tuples(2);
    const auto& triples = index_tuples(3);
    for (size_t s = 0; s < pairs.size(); ++s) {
        const int k = pairs[s][0], l = pairs[s][1];
        if (i == k || i == l) continue;
        std::vector<int> idx{i, k, l};
        int sign = 1;
        for (size_t a = 0; a < 3; ++a)
            for (size_t b = a + 1; b < 3; ++b)
                if (idx[a] > idx[b]) { std::swap(idx[a], idx[b]); sign = -sign; }
        for (size_t t = 0; t < triples.size(); ++t)
            if (triples[t] == idx) {
                out[static_cast<long>(t)] += sign * coeff * pi2[s];
                break;
            }
    }
}

struct StructureSystem {
    Eigen::Matrix<double, 12, 12> M;
    Eigen::Matrix<double, 12, 1> rhs;
    double scale;
};

StructureSystem assemble_structure(const IsoFrame& frame, const Point& x) {
    // rows: (a, ascending triple J); columns: (b, i); unknowns A^b_i
    StructureSystem sys;
    sys.M.setZero();
    sys.rhs.setZero();
    std::array<std::vector<double>, 3> pi_vals;
    double scale = 0.0;
    for (int c = 0; c < 3; ++c) {
        pi_vals[c] = frame.pi[c].evaluate(x);
        for (double v : pi_vals[c]) scale = std::max(scale, std::fabs(v));
    }
    sys.scale = scale > 0.0 ? scale : 1.0;
    for (int a = 0; a < 3; ++a) {
        DifferentialForm dpi = exterior_derivative(frame.pi[a]);
        const std::vector<double> dvals = dpi.evaluate(x);
        for (int J = 0; J < 4; ++J) sys.rhs[4 * a + J] = -dvals[static_cast<size_t>(J)];
        for (int b = 0; b < 3; ++b) {
            for (int c = 0; c < 3; ++c) {
                const int e = eps_sign(a, b, c);
                if (e == 0) continue;
                for (int i = 0; i < 4; ++i) {
                    Eigen::VectorXd col = Eigen::VectorXd::Zero(4);
                    wedge_basis_into(i, pi_vals[c], static_cast<double>(e), col);
                    for (int J = 0; J < 4; ++J) sys.M(4 * a + J, 4 * b + i) += col[J];
                }
            }
        }
    }
    return sys;
}

} // namespace

ConnectionComponents solve_connection(const IsoFrame& frame, const Point& x, SolvePath path) {
    frame.chart()->require_interior(x);
    StructureSystem sys = assemble_structure(frame, x);
    // column scaling by the frame magnitude keeps conditioning honest
    const Eigen::Matrix<double, 12, 12> Ms = sys.M / sys.scale;
    const Eigen::Matrix<double, 12, 1> rs = sys.rhs / sys.scale;

    Eigen::JacobiSVD<Eigen::Matrix<double, 12, 12>> svd(Ms, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(11);
    const double cond = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(cond < frame.condition_bound)) throw DegenerateFrameError(cond);

    Eigen::Matrix<double, 12, 1> sol;
    if (path == SolvePath::Direct) {
        sol = Ms.partialPivLu().solve(rs);
    } else {
        sol = svd.solve(rs);
    }

    ConnectionComponents out;
    out.condition = cond;
    out.back_residual = (Ms * sol - rs).cwiseAbs().maxCoeff() * sys.scale;
    for (int b = 0; b < 3; ++b)
        for (int i = 0; i < 4; ++i) out.A[b][i] = sol[4 * b + i];
    return out;
}

IsoTripletForm connection_field(const IsoFrame& frame) {
    // Components call the pointwise 12x12 solve; a one-entry cache avoids
    // re-solving when the twelve components are sampled at the same point.
    struct Cache {
        std::mutex mu;
        bool valid = false;
        Point x{};
        ConnectionComponents sol;
    };
    auto cache = std::make_shared<Cache>();
    auto frame_copy = std::make_shared<IsoFrame>(frame);
    IsoTripletForm alpha(frame.chart(), 1);
    for (int a = 0; a < 3; ++a)
        for (int i = 0; i < 4; ++i) {
            auto fn = [cache, frame_copy, a, i](const Point& x) {
                std::lock_guard<std::mutex> lock(cache->mu);
                if (!cache->valid || cache->x != x) {
                    cache->sol = solve_connection(*frame_copy, x);
                    cache->x = x;
                    cache->valid = true;
                }
                return cache->sol.A[a][i];
            };
            alpha[a].set_component({i}, numeric_field(fn));
        }
    return alpha;
}

IsoTripletForm curvature(const IsoTripletForm& alpha) {
    if (alpha.degree() != 1) throw std::invalid_argument("curvature expects a triplet of 1-forms");
    IsoTripletForm K(alpha.chart(), 2);
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        K[a] = exterior_derivative(alpha[a]) + wedge(alpha[b], alpha[c]);
    }
    return K;
}

IsoTripletForm covariant_derivative(const IsoTripletForm& alpha, const IsoTripletForm& omega) {
    IsoTripletForm out(omega.chart(), omega.degree() + 1);
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        out[a] = exterior_derivative(omega[a]) + wedge(alpha[b], omega[c]) - wedge(alpha[c], omega[b]);
    }
    return out;
}

GridSpec default_grid(const Chart& chart, int points_per_coord) {
    GridSpec g;
    const std::string& name = chart.name();
    auto clampfin = [](Interval iv, double lo, double hi) {
        return Interval{std::max(iv.lo, lo), std::min(iv.hi, hi)};
    };
    for (int i = 0; i < 4; ++i) g.n[i] = points_per_coord;
    if (name == "spherical") {
        g.range = {Interval{0.0, 1.0}, clampfin(chart.domain()[1], 0.5, 3.0),
                   clampfin(chart.domain()[2], 0.3, M_PI - 0.3), Interval{0.1, 2.0 * M_PI - 0.1}};
    } else if (name == "boosted_cylindrical") {
        g.range = {Interval{0.0, 2.0}, Interval{-1.0, 1.0},
                   clampfin(chart.domain()[2], 0.4, 2.5), Interval{0.1, 2.0 * M_PI - 0.1}};
    } else if (name == "cone") {
        g.range = {clampfin(chart.domain()[0], 0.5, 3.0), clampfin(chart.domain()[1], 0.3, 2.0),
                   clampfin(chart.domain()[2], 0.3, M_PI - 0.3), Interval{0.1, 2.0 * M_PI - 0.1}};
    } else {
        g.range = {Interval{-1.0, 1.0}, Interval{-1.0, 1.0}, Interval{-1.0, 1.0}, Interval{-1.0, 1.0}};
    }
    return g;
}

std::string ResidualReport::to_json() const {
    nlohmann::json j;
    j["equation"] = equation;
    j["max_residual"] = max_residual;
    j["worst_point"] = worst_point;
    j["skipped_points"] = skipped_points;
    nlohmann::json grid_j;
    for (int i = 0; i < 4; ++i) {
        grid_j["range"].push_back({grid.range[i].lo, grid.range[i].hi});
        grid_j["points"].push_back(grid.n[i]);
    }
    j["grid"] = grid_j;
    return j.dump(2);
}

namespace {

int worker_count() {
    if (const char* env = std::getenv("ISOFRAME_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

ResidualReport max_over_grid(const std::string& equation, const GridSpec& grid,
                             const std::function<double(const Point&)>& fn) {
    ResidualReport rep;
    rep.equation = equation;
    rep.grid = grid;
    std::vector<Point> points;
    points.reserve(static_cast<size_t>(grid.total()));
    grid.for_each([&](const Point& x) { points.push_back(x); });

    const int nw = std::min<int>(worker_count(), static_cast<int>(points.size()) > 0 ? static_cast<int>(points.size()) : 1);
    std::vector<ResidualReport> partial(static_cast<size_t>(nw), rep);
    std::vector<std::exception_ptr> errors(static_cast<size_t>(nw));
    std::vector<std::thread> workers;
    for (int w = 0; w < nw; ++w) {
        workers.emplace_back([&, w]() {
            ResidualReport& local = partial[static_cast<size_t>(w)];
            try {
                for (size_t k = static_cast<size_t>(w); k < points.size(); k += static_cast<size_t>(nw)) {
                    double v;
                    try {
                        v = fn(points[k]);
                    } catch (const DegenerateFrameError&) {
                        ++local.skipped_points;
                        continue;
                    } catch (const SingularChartError&) {
                        ++local.skipped_points;
                        continue;
                    }
                    if (v > local.max_residual) {
                        local.max_residual = v;
                        local.worst_point = points[k];
                    }
                }
            } catch (...) {
                errors[static_cast<size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& th : workers) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (const auto& local : partial) {
        rep.skipped_points += local.skipped_points;
        if (local.max_residual > rep.max_residual) {
            rep.max_residual = local.max_residual;
            rep.worst_point = local.worst_point;
        }
    }
    return rep;
}

double max_abs(const IsoTripletForm& w, const Point& x) {
    double m = 0.0;
    for (int a = 0; a < 3; ++a)
        for (double v : w[a].evaluate(x)) m = std::max(m, std::fabs(v));
    return m;
}

} // namespace

ResidualReport field_equation_residual(const IsoFrame& frame, const IsoTripletForm& alpha, const GridSpec& grid) {
    IsoTripletForm K = curvature(alpha);
    const double m2 = frame.mass * frame.mass;
    return max_over_grid("field_equation", grid, [&](const Point& x) {
        double worst = 0.0;
        for (int a = 0; a < 3; ++a) {
            const auto kv = K[a].evaluate(x);
            const auto pv = frame.pi[a].evaluate(x);
            for (size_t s = 0; s < kv.size(); ++s)
                worst = std::max(worst, std::fabs(kv[s] - m2 * pv[s]));
        }
        return worst;
    });
}

ResidualReport field_equation_residual(const IsoFrame& frame, const GridSpec& grid) {
    return field_equation_residual(frame, connection_field(frame), grid);
}

ResidualReport bianchi_residual(const IsoTripletForm& alpha, const GridSpec& grid) {
    IsoTripletForm DK = covariant_derivative(alpha, curvature(alpha));
    return max_over_grid("bianchi", grid, [&](const Point& x) { return max_abs(DK, x); });
}

ResidualReport yang_mills_residual(const IsoFrame& frame, const IsoTripletForm& alpha, const GridSpec& grid,
                                   const IsoTripletForm* current) {
    IsoTripletForm Dstar = covariant_derivative(alpha, hodge_star(frame.pi));
    return max_over_grid("yang_mills", grid, [&](const Point& x) {
        double worst = 0.0;
        for (int a = 0; a < 3; ++a) {
            const auto dv = Dstar[a].evaluate(x);
            std::vector<double> iv(dv.size(), 0.0);
            if (current) iv = (*current)[a].evaluate(x);
            for (size_t s = 0; s < dv.size(); ++s)
                worst = std::max(worst, std::fabs(dv[s] - iv[s]));
        }
        return worst;
    });
}

ResidualReport yang_mills_residual(const IsoFrame& frame, const GridSpec& grid, const IsoTripletForm* current) {
    return yang_mills_residual(frame, connection_field(frame), grid, current);
}

ResidualReport structure_residual(const IsoFrame& frame, const IsoTripletForm& alpha, const GridSpec& grid) {
    IsoTripletForm lhs(frame.chart(), 3);
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        lhs[a] = exterior_derivative(frame.pi[a]) + wedge(alpha[b], frame.pi[c]) - wedge(alpha[c], frame.pi[b]);
    }
    return max_over_grid("structure", grid, [&](const Point& x) { return max_abs(lhs, x); });
}

void GaugeRotationField::require_orthogonal(const Point& x, double tol) const {
    Eigen::Matrix3d Rm;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) Rm(i, j) = R[i][j](x);
    if (((Rm.transpose() * Rm) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol ||
        Rm.determinant() < 0.0)
        throw std::invalid_argument("gauge rotation field is not a proper rotation at a sample point");
}

GaugeRotationField axis_rotation(const std::array<double, 3>& axis, const ScalarField& angle) {
    double norm = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    if (norm == 0.0) throw std::invalid_argument("rotation axis must be nonzero");
    const double nx = axis[0] / norm, ny = axis[1] / norm, nz = axis[2] / norm;
    const ScalarField c = sf_cos(angle), s = sf_sin(angle);
    const ScalarField one_minus_c = ScalarField(1.0) - c;
    const double n[3] = {nx, ny, nz};
    GaugeRotationField out;
    // Rodrigues: R = c I + s [n]_x + (1-c) n n^T
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            ScalarField entry = ScalarField(n[i] * n[j]) * one_minus_c;
            if (i == j) entry = entry + c;
            // s * eps_{ikj} n_k  ==  -s * eps_{ijk} n_k
            const int k = 3 - i - j;
            if (i != j) {
                const double e = static_cast<double>(eps_sign(i, j, k));
                entry = entry - ScalarField(e * n[k]) * s;
            }
            out.R[i][j] = entry;
        }
    return out;
}

IsoTripletForm gauge_transform(const IsoTripletForm& omega, const GaugeRotationField& R) {
    IsoTripletForm out(omega.chart(), omega.degree());
    for (int a = 0; a < 3; ++a) {
        DifferentialForm acc(omega.chart(), omega.degree());
        for (int b = 0; b < 3; ++b) acc = acc + R.R[a][b] * omega[b];
        out[a] = acc;
    }
    return out;
}

IsoFrame gauge_transform(const IsoFrame& frame, const GaugeRotationField& R) {
    GridSpec g = default_grid(*frame.chart(), 3);
    g.for_each([&](const Point& x) { R.require_orthogonal(x, 1e-10); });
    IsoFrame out(gauge_transform(frame.pi, R), frame.mass);
    out.condition_bound = frame.condition_bound;
    return out;
}

// ---- observables ----------------------------------------------------------

namespace {

struct RaisedFrame {
    // lower components per iso label over ascending pairs, inverse metric diag
    std::array<std::vector<double>, 3> pi;
    std::array<double, 4> ginv;
};

RaisedFrame eval_frame(const IsoFrame& frame, const Point& x) {
    RaisedFrame out;
    for (int a = 0; a < 3; ++a) out.pi[a] = frame.pi[a].evaluate(x);
    for (int i = 0; i < 4; ++i) out.ginv[i] = 1.0 / frame.chart()->metric_diag(i)(x);
    return out;
}

// full antisymmetric component X_{ij} from ascending-pair storage
double comp2(const std::vector<double>& v, int i, int j) {
    if (i == j) return 0.0;
    const auto& pairs = index_tuples(2);
    const int lo = std::min(i, j), hi = std::max(i, j);
    for (size_t s = 0; s < pairs.size(); ++s)
        if (pairs[s][0] == lo && pairs[s][1] == hi) return (i < j) ? v[s] : -v[s];
    return 0.0;
}

} // namespace

double pi_dot_pi(const IsoFrame& frame, const Point& x) {
    RaisedFrame rf = eval_frame(frame, x);
    double acc = 0.0;
    const auto& pairs = index_tuples(2);
    for (int a = 0; a < 3; ++a)
        for (size_t s = 0; s < pairs.size(); ++s) {
            const int i = pairs[s][0], j = pairs[s][1];
            acc += 2.0 * rf.ginv[i] * rf.ginv[j] * rf.pi[a][s] * rf.pi[a][s];
        }
    return acc;
}

double lagrangian_density(const IsoFrame& frame, const IsoTripletForm& alpha, const Point& x,
                          const IsoTripletForm* current) {
    RaisedFrame rf = eval_frame(frame, x);
    IsoTripletForm K = curvature(alpha);
    const auto& pairs = index_tuples(2);
    double k_dot_pi = 0.0;
    for (int a = 0; a < 3; ++a) {
        const auto kv = K[a].evaluate(x);
        for (size_t s = 0; s < pairs.size(); ++s) {
            const int i = pairs[s][0], j = pairs[s][1];
            k_dot_pi += 2.0 * rf.ginv[i] * rf.ginv[j] * kv[s] * rf.pi[a][s];
        }
    }
    const double m2 = frame.mass * frame.mass;
    // kinetic term contracts over all ordered index pairs: (dA + eps A A/2).pi
    // summed both ways equals the full contraction K.pi
    double L = k_dot_pi - 0.5 * m2 * pi_dot_pi(frame, x);
    if (current) {
        // J.A with J the 1-form dual of the 3-form current
        IsoTripletForm j1 = hodge_star(*current);
        for (int a = 0; a < 3; ++a) {
            const auto jv = j1[a].evaluate(x);
            const auto av = alpha[a].evaluate(x);
            for (int i = 0; i < 4; ++i) L += rf.ginv[i] * jv[static_cast<size_t>(i)] * av[static_cast<size_t>(i)];
        }
    }
    return L;
}

StressEnergy stress_energy(const IsoFrame& frame, const IsoTripletForm& alpha, const Point& x) {
    RaisedFrame rf = eval_frame(frame, x);
    IsoTripletForm K = curvature(alpha);
    std::array<std::vector<double>, 3> kv;
    for (int a = 0; a < 3; ++a) kv[a] = K[a].evaluate(x);
    const double L = lagrangian_density(frame, alpha, x);
    StressEnergy out;
    out.trace = 0.0;
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
            double acc = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int i = 0; i < 4; ++i)
                    acc += rf.ginv[m] * rf.ginv[i] * comp2(rf.pi[a], m, i) * comp2(kv[a], n, i);
            if (m == n) acc -= L;
            out.T[m][n] = acc;
            if (m == n) out.trace += acc;
        }
    return out;
}

std::array<std::array<double, 4>, 4> spin_density(const IsoFrame& frame, const IsoTripletForm& alpha,
                                                  const Point& x) {
    RaisedFrame rf = eval_frame(frame, x);
    std::array<std::array<double, 4>, 4> S{};
    std::array<std::vector<double>, 3> av;
    for (int a = 0; a < 3; ++a) av[a] = alpha[a].evaluate(x);
    for (int i = 1; i < 4; ++i)
        for (int j = 1; j < 4; ++j) {
            double acc = 0.0;
            for (int a = 0; a < 3; ++a)
                acc += rf.ginv[0] * (comp2(rf.pi[a], 0, i) * av[a][static_cast<size_t>(j)] -
                                     comp2(rf.pi[a], 0, j) * av[a][static_cast<size_t>(i)]);
            S[i][j] = acc;
        }
    return S;
}

} // namespace isoframe
