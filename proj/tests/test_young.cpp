#include "doctest.h"
#include "support.hpp"

#include "sparsedom/young.hpp"

#include <chrono>

using namespace sparsedom;
using sparsedom::testing::random_function;
using sparsedom::testing::random_steps;

namespace {

std::vector<YoungFunction> bundled_kinds() {
    return {YoungFunction::power(2.0),          YoungFunction::power(1.5),
            YoungFunction::power_log(2.0, 0.5), YoungFunction::power_log(3.0, 0.25),
            YoungFunction::power_r(2.0, 1.5),   YoungFunction::power_log(1.5, 1.0)};
}

// all-window maximal function by brute force
GridFunction brute_maximal(const GridFunction& f, const YoungFunction* A = nullptr) {
    const Grid& g = f.grid();
    const int n = g.cells_per_side();
    GridFunction out(g, 0.0);
    for (int len = 1; len <= n; ++len)
        for (int i = 0; i + len <= n; ++i) {
            const int jl = g.dim() == 1 ? 1 : len;
            for (int j = 0; j + jl <= (g.dim() == 1 ? 1 : n); ++j) {
                double val;
                if (A) {
                    val = orlicz_norm(f, CubeWindow{{i, j}, len}, *A);
                } else {
                    double s = 0.0;
                    for (int a = i; a < i + len; ++a)
                        for (int b = j; b < j + jl; ++b) s += std::abs(f[g.flat(a, b)]);
                    val = s / (len * jl);
                }
                for (int a = i; a < i + len; ++a)
                    for (int b = j; b < j + jl; ++b) out[g.flat(a, b)] = std::max(out[g.flat(a, b)], val);
            }
        }
    return out;
}

}  // namespace

TEST_CASE("Young functions are increasing and convex on a sampled grid") {
    for (const auto& A : bundled_kinds()) {
        CHECK(A(0.0) == 0.0);
        double prev = 0.0;
        for (double t = 0.01; t < 50.0; t *= 1.1) {
            CHECK(A(t) > prev);
            prev = A(t);
            const double h = 1e-3 * t;
            CHECK(A(t + h) - 2.0 * A(t) + A(t - h) >= -1e-9 * A(t));
        }
    }
    CHECK_THROWS_AS(YoungFunction::power(0.5), std::invalid_argument);
    CHECK_THROWS_AS(YoungFunction::power_log(1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(YoungFunction::custom({1.0, 0.5}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("complementary function closed forms") {
    CHECK(complementary(YoungFunction::power(2.0), 2.0) == doctest::Approx(1.0));
    CHECK(complementary(YoungFunction::power(2.0), 0.0) == 0.0);
    CHECK_THROWS_AS(complementary(YoungFunction::power(2.0), -1.0), std::invalid_argument);
    // power_r(2, 1) is t^2: closed form t^{(rp)'} (1/(rp))^{1/(rp-1)} (1 - 1/(rp)) = t^2 / 4
    for (double s : {0.3, 1.0, 2.0, 5.0})
        CHECK(complementary(YoungFunction::power_r(2.0, 1.0), s) == doctest::Approx(s * s / 4.0).epsilon(1e-13));
    const auto A = YoungFunction::power_r(2.0, 2.0);
    for (double s : {0.5, 1.0, 3.0})
        CHECK(std::abs(complementary_numeric(A, s) - complementary(A, s)) <= 1e-6 * complementary(A, s));
}

TEST_CASE("complementary of power_r matches the closed form at 20 points") {
    Rng rng(40);
    for (int k = 0; k < 20; ++k) {
        const double p = rng.uniform(1.2, 4.0), r = rng.uniform(1.0, 3.0), s = std::exp(rng.uniform(-3.0, 3.0));
        const double rp = r * p, rpc = rp / (rp - 1.0);
        const double closed = std::pow(s, rpc) * std::pow(1.0 / rp, 1.0 / (rp - 1.0)) * (1.0 - 1.0 / rp);
        CHECK(complementary(YoungFunction::power_r(p, r), s) == doctest::Approx(closed).epsilon(1e-9));
        CHECK(complementary_function(YoungFunction::power_r(p, r))(s) == doctest::Approx(closed).epsilon(1e-9));
    }
}

TEST_CASE("memoised complementary function tracks the numeric transform") {
    const auto A = YoungFunction::power_log(2.0, 0.5);
    const auto Abar = complementary_function(A);
    for (double s = 1e-3; s < 1e5; s *= 3.7) {
        const double exact = complementary_numeric(A, s);
        CHECK(std::abs(Abar(s) - exact) <= 5e-5 * exact);
    }
}

TEST_CASE("Young inequality on a 50 x 50 grid") {
    for (const auto& A : bundled_kinds()) {
        const auto Abar = complementary_function(A);
        for (int i = 0; i < 50; ++i)
            for (int j = 0; j < 50; ++j) {
                const double s = std::exp(-4.0 + 8.0 * i / 49.0), t = std::exp(-4.0 + 8.0 * j / 49.0);
                CHECK(s * t <= (A(t) + Abar(s)) * (1 + 1e-9));
            }
    }
}

TEST_CASE("Young duality band t <= A^{-1}(t) Abar^{-1}(t) <= 2t") {
    for (const auto& A : bundled_kinds()) {
        const auto Abar = complementary_function(A);
        for (double t = 0.1; t <= 100.0 * 1.0001; t *= std::pow(1000.0, 1.0 / 30.0)) {
            const double prod = young_inverse(A, t) * young_inverse(Abar, t);
            CHECK(prod >= t * (1 - 1e-6));
            CHECK(prod <= 2.0 * t * (1 + 1e-6));
        }
    }
}

TEST_CASE("orlicz_norm with a power equals the power mean") {
    Rng rng(1);
    const auto start = std::chrono::steady_clock::now();
    for (int k = 0; k < 200; ++k) {
        const int dim = 1 + k % 2;
        const Grid g = make_grid(dim, dim == 1 ? 64 : 16, 1.0);
        const auto f = random_function(g, rng, -3.0, 3.0);
        const auto cubes = lattice_cubes(g, g.depth());
        const auto& q = cubes[static_cast<std::size_t>(rng.below(static_cast<int>(cubes.size())))];
        const double p = rng.uniform(1.0, 6.0);
        CHECK(std::abs(orlicz_norm(f, q, YoungFunction::power(p)) - s_average(f, q, p)) <= 1e-9 * s_average(f, q, p));
        // through the generic path as well
        const auto generic = YoungFunction::custom({1.0, 2.0}, {1.0, std::pow(2.0, p)});
        CHECK(std::abs(orlicz_norm(f, q, generic) - s_average(f, q, p)) <= 1e-9 * s_average(f, q, p));
    }
    CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() < 10.0);
}

TEST_CASE("orlicz_norm examples") {
    const Grid g = make_grid(1, 16, 1.0);
    GridFunction chi(g, 0.0);
    for (int i = 0; i < 5; ++i) chi[i] = 1.0;
    CHECK(orlicz_norm(chi, DyadicCube{}, YoungFunction::power(2.0)) == doctest::Approx(std::sqrt(5.0 / 16.0)));
    CHECK(orlicz_norm(GridFunction(g, 0.0), DyadicCube{}, YoungFunction::power(2.0)) == 0.0);

    // two-valued f under power_log(2, 0.5) against a dense lambda scan
    const auto A = YoungFunction::power_log(2.0, 0.5);
    const std::vector<double> v{3.0, 3.0, 3.0, 0.4, 0.4, 0.4, 0.4, 0.4};
    auto mean_a = [&](double lambda) {
        double s = 0.0;
        for (double x : v) s += A(x / lambda);
        return s / v.size();
    };
    const double lo = 0.5, hi = 5.0;
    const int steps = 1000000;
    double scan = hi;
    for (int k = 0; k <= steps; ++k) {
        const double lambda = lo + (hi - lo) * k / steps;
        if (mean_a(lambda) <= 1.0) {
            scan = lambda;
            break;
        }
    }
    CHECK(std::abs(orlicz_norm(v, A) - scan) < 1e-5);
    CHECK(mean_a(orlicz_norm(v, A)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("property: orlicz norms are homogeneous and monotone") {
    Rng rng(77);
    for (int k = 0; k < 100; ++k) {
        const auto A = bundled_kinds()[static_cast<std::size_t>(k % 6)];
        std::vector<double> v(1 + rng.below(40)), w(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = rng.uniform(0.0, 5.0);
            w[i] = v[i] + rng.uniform(0.0, 1.0);
        }
        const double c = std::exp(rng.uniform(-3.0, 3.0));
        std::vector<double> cv(v);
        for (double& x : cv) x *= c;
        CHECK(orlicz_norm(cv, A) == doctest::Approx(c * orlicz_norm(v, A)).epsilon(1e-9));
        CHECK(orlicz_norm(v, A) <= orlicz_norm(w, A) * (1 + 1e-10));
    }
}

TEST_CASE("maximal function examples") {
    const Grid g = make_grid(1, 256, 4.0);
    const auto one = maximal(GridFunction(g, 1.0));
    CHECK((one.values() - 1.0).abs().maxCoeff() < 1e-14);

    // chi_[0,1] on [-2, 2]: at the right edge the best window is [0, 2], value 1/2
    const auto chi = GridFunction::sample(g, [](double x, double) { return x > 0.0 && x < 1.0 ? 1.0 : 0.0; });
    const auto m = maximal(chi);
    CHECK(std::abs(m[255] - 0.5) <= g.cell_width());
    CHECK(std::abs(m[0] - 1.0 / 3.0) <= g.cell_width());

    Rng rng(5);
    const auto f = random_function(make_grid(2, 16, 1.0), rng, -1.0, 1.0);
    const auto mr = maximal_r(f, 2.5);
    const auto direct = maximal(f.pow(2.5)).map([](double x) { return std::pow(x, 0.4); });
    CHECK(((mr.values() - direct.values()).abs() / direct.values()).maxCoeff() < 1e-12);
}

TEST_CASE("maximal functions agree with brute-force window scans") {
    Rng rng(9);
    for (int dim : {1, 2}) {
        const Grid g = make_grid(dim, dim == 1 ? 64 : 16, 2.0);
        for (int trial = 0; trial < 5; ++trial) {
            const auto f = trial % 2 ? random_steps(g, rng) : random_function(g, rng, -1.0, 2.0);
            const auto fast = maximal(f);
            const auto slow = brute_maximal(f);
            CHECK((fast.values() - slow.values()).abs().maxCoeff() <= 1e-12 * (1.0 + slow.max_abs()));
            const auto p3 = YoungFunction::power(3.0);
            const auto exact = maximal_orlicz(f, p3);
            const auto slow3 = brute_maximal(f, &p3);
            CHECK((exact.values() - slow3.values()).abs().maxCoeff() <= 1e-10 * (1.0 + slow3.max_abs()));
        }
    }
    const Eigen::ArrayXd cube = Eigen::ArrayXd::LinSpaced(16, -1.0, 2.0);
    const auto on_cube = maximal_on_cube(cube, 2, 4);
    const auto ref = brute_maximal(GridFunction(make_grid(2, 4 * 2, 1.0), Eigen::ArrayXd::Zero(64)));
    (void)ref;
    const Grid g4 = make_grid(1, 16, 1.0);
    const auto line = maximal_on_cube(cube, 1, 16);
    CHECK((line - brute_maximal(GridFunction(g4, cube)).values()).abs().maxCoeff() < 1e-13);
    CHECK(on_cube.size() == 16);
    CHECK(on_cube.maxCoeff() == doctest::Approx(2.0));
}

TEST_CASE("pruned Orlicz maximal function against pruned scans") {
    Rng rng(12);
    const Grid g = make_grid(1, 64, 2.0);
    const auto f = random_steps(g, rng);
    const auto A = YoungFunction::power_log(2.0, 0.5);
    const auto MA = maximal_orlicz(f, A);
    const auto M = maximal_pruned(f);
    const auto brute = brute_maximal(f, &A);
    for (Index k = 0; k < f.size(); ++k) {
        CHECK(MA[k] <= brute[k] * (1 + 1e-9));
        CHECK(MA[k] >= M[k] * (1 - 1e-9));  // A(t) >= t for t >= 1
    }
    // the pruning defect on this instance
    CHECK(((brute.values() / MA.values()).maxCoeff()) < 2.0);
}

TEST_CASE("property: M_A dominates M pointwise for the bundled kinds") {
    Rng rng(13);
    for (int trial = 0; trial < 12; ++trial) {
        const Grid g = make_grid(1 + trial % 2, trial % 2 ? 16 : 128, 2.0);
        const auto f = random_steps(g, rng);
        const auto M = maximal_pruned(f);
        for (const auto& A : bundled_kinds()) {
            const auto MA = maximal_orlicz_pruned(f, A);
            CHECK(((M.values() - MA.values()) <= 1e-9 * (1.0 + M.values())).all());
        }
    }
}

TEST_CASE("iterated maximal function") {
    Rng rng(3);
    const Grid g = make_grid(1, 128, 2.0);
    const auto w = random_steps(g, rng);
    const auto m1 = iterated_maximal(w, 1);
    CHECK((m1.values() - maximal(w).values()).abs().maxCoeff() == 0.0);
    const auto m2 = iterated_maximal(w, 2);
    CHECK(((m2.values() - m1.values()) >= -1e-13 * m1.values()).all());
    CHECK(((m1.values() - w.values().abs()) >= -1e-13 * m1.values()).all());
    CHECK((iterated_maximal(GridFunction(g, 1.0), 3).values() - 1.0).abs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(iterated_maximal(w, 0), std::invalid_argument);
}

TEST_CASE("beta_p values") {
    CHECK(beta_p(YoungFunction::power(1.5), 2.0) == doctest::Approx(2.0).epsilon(1e-9));
    for (auto [p, r] : {std::pair{4.0, 2.0}, {3.0, 1.5}, {2.5, 2.0}}) {
        const double q = p / r;
        const auto B = YoungFunction::power((q + 1.0) / 2.0);
        CHECK(std::abs(beta_p(B, q) - 2.0 * r / (p - r)) < 1e-6);
    }
    for (double p : {1.5, 2.0, 3.0}) CHECK(std::isinf(beta_p(YoungFunction::power(p), p)));
    CHECK(std::isinf(beta_p(YoungFunction::power_log(2.0, 1.0), 2.0)));
    CHECK(beta_p(YoungFunction::power(1.5), 2.0, 4.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(beta_p(YoungFunction::power(1.5), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(beta_p(YoungFunction::power(1.5), 2.0, 0.5), std::invalid_argument);
}

TEST_CASE("beta_p of finite log bumps against a dense log-grid quadrature") {
    // int_1^inf A(t) t^{-q} dt / t for A = power_log(p, delta), q > p, and for Abar at p'
    auto dense = [](const YoungFunction& A, double q, double span) {
        const int n = 1000000;
        const double h = span / n;
        double s = 0.0;
        for (int k = 0; k < n; ++k) {
            const double u = (k + 0.5) * h;
            s += A(std::exp(u)) * std::exp(-q * u);
        }
        return s * h;
    };
    const auto A = YoungFunction::power_log(2.0, 1.0);
    CHECK(beta_p(A, 2.5) == doctest::Approx(dense(A, 2.5, 200.0)).epsilon(1e-6));
    const auto B = YoungFunction::power_log(1.5, 0.5);
    CHECK(beta_p(B, 3.0) == doctest::Approx(dense(B, 3.0, 120.0)).epsilon(1e-6));
    const auto Abar = complementary_function(YoungFunction::power_r(2.0, 1.5));
    CHECK(beta_p(Abar, 2.0) == doctest::Approx(dense(Abar, 2.0, 200.0)).epsilon(1e-6));
}

TEST_CASE("beta_p norm equivalence is reported, not asserted") {
    // beta_p(A) against int_1^inf (t^{p'} / Abar(t))^{p-1} dt/t for a log bump
    const double p = 2.0, pc = 2.0;
    const auto A = YoungFunction::power_log(pc, 1.0);
    const auto Abar = complementary_function(A);
    const double lhs = beta_p(Abar, p);
    const int n = 200000;
    const double span = 60.0, h = span / n;
    double rhs = 0.0;
    for (int k = 0; k < n; ++k) {
        const double t = std::exp((k + 0.5) * h);
        rhs += std::pow(std::pow(t, pc) / A(t), p - 1.0);
    }
    rhs *= h;
    MESSAGE("beta ratio " << lhs / rhs);
    CHECK(std::isfinite(lhs));
    CHECK(lhs / rhs > 0.0);
}

TEST_CASE("generalized Hoelder defect") {
    const Grid g = make_grid(1, 64, 1.0);
    const GridFunction one(g, 1.0);
    CHECK(holder_defect(one, one, DyadicCube{}, YoungFunction::power(2.0)) <= 2.0);
    auto left = GridFunction::sample(g, [](double x, double) { return x < 0.0 ? 1.0 : 0.0; });
    auto right = GridFunction::sample(g, [](double x, double) { return x >= 0.0 ? 1.0 : 0.0; });
    CHECK(holder_defect(left, right, DyadicCube{}, YoungFunction::power(2.0)) == 0.0);

    Rng rng(61);
    const std::vector<YoungFunction> kinds{YoungFunction::power(2.5), YoungFunction::power_log(2.0, 0.5),
                                           YoungFunction::power_r(1.5, 2.0)};
    std::vector<YoungFunction> bars;
    for (const auto& A : kinds) bars.push_back(complementary_function(A));
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const auto f = random_steps(g, rng), h = random_function(g, rng, -3.0, 3.0);
        const auto cubes = lattice_cubes(g, 4);
        const auto& q = cubes[static_cast<std::size_t>(rng.below(static_cast<int>(cubes.size())))];
        const std::size_t a = static_cast<std::size_t>(k % 3);
        worst = std::max(worst, holder_defect(f, h, q, kinds[a], bars[a]));
    }
    CHECK(worst <= 2.0);
}

TEST_CASE("L^{q,1} log L sphere norm") {
    const std::vector<double> zero(8, 0.0);
    CHECK(lorentz_logl_norm(zero, 2.0, 2.0) == 0.0);
    // constant Omega = c against Simpson quadrature of q |S|^{1/q} int_0^c log(e + t) dt
    for (double c : {0.5, 2.0, 7.0})
        for (double q : {1.5, 3.0}) {
            const std::vector<double> omega(32, c);
            const int n = 20000;
            double s = 0.0;
            for (int k = 0; k <= n; ++k) {
                const double t = c * k / n, wgt = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
                s += wgt * std::log(std::exp(1.0) + t);
            }
            s *= c / n / 3.0;
            CHECK(lorentz_logl_norm(omega, q, 2.0 * std::acos(-1.0)) ==
                  doctest::Approx(q * std::pow(2.0 * std::acos(-1.0), 1.0 / q) * s).epsilon(1e-8));
        }
    Rng rng(4);
    std::vector<double> omega(64), doubled(64);
    for (std::size_t k = 0; k < omega.size(); ++k) {
        omega[k] = rng.uniform(-2.0, 2.0);
        doubled[k] = 2.0 * omega[k];
    }
    CHECK(lorentz_logl_norm(doubled, 2.0, 2.0) > lorentz_logl_norm(omega, 2.0, 2.0));
    CHECK_THROWS_AS(lorentz_logl_norm(omega, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("M_Abar operator ratio grows slowly as delta decreases") {
    // ||M_Abar f||_{p'} / ||f||_{p'} for A = power_log(p, delta); log-log slope
    // against 1/delta stays below 1/p' + 0.15
    const double p = 2.0, pc = 2.0;
    const Grid g = make_grid(1, 256, 4.0);
    Rng rng(90);
    std::vector<GridFunction> corpus;
    for (int k = 0; k < 4; ++k) corpus.push_back(random_steps(g, rng));
    corpus.push_back(sparsedom::testing::bump(g, 0.0, 0.8));
    std::vector<double> xs, ys;
    for (double delta : {1.0, 0.5, 0.25, 0.125}) {
        const auto Abar = complementary_function(YoungFunction::power_log(p, delta));
        double worst = 0.0;
        for (const auto& f : corpus) {
            if (f.max_abs() == 0.0) continue;
            worst = std::max(worst, lp_norm(maximal_orlicz(f, Abar), pc) / lp_norm(f, pc));
        }
        xs.push_back(std::log(1.0 / delta));
        ys.push_back(std::log(worst));
    }
    const double slope = (ys.back() - ys.front()) / (xs.back() - xs.front());
    MESSAGE("M_Abar slope " << slope);
    CHECK(slope <= 1.0 / pc + 0.15);
}
