#include "doctest.h"
#include "support.hpp"

#include "sparsedom/analysis.hpp"
#include "sparsedom/weights.hpp"

using namespace sparsedom;
using sparsedom::testing::bump;
using sparsedom::testing::random_function;
using sparsedom::testing::random_steps;
using sparsedom::testing::random_weight;

namespace {

SparseFamily family_of(const Grid& g, std::vector<DyadicCube> cubes) {
    SparseFamily S;
    S.grid = g;
    S.cubes = std::move(cubes);
    return S;
}

// Random subfamily of the full lattice (not necessarily sparse).
SparseFamily random_family(const Grid& g, Rng& rng, int count) {
    const DyadicLattice lat(g);
    std::vector<DyadicCube> cubes;
    for (int k = 0; k < count; ++k) cubes.push_back(lat.cubes()[rng.below(static_cast<int>(lat.cubes().size()))]);
    return family_of(g, cubes);
}

// |Q| <|f|>_Q (<|g|^s>_Q)^{1/s} re-summed cell by cell.
double naive_form(const GridFunction& f, const GridFunction& g, const SparseFamily& S, double s) {
    double total = 0.0;
    for (const auto& q : S.cubes) {
        double fs = 0.0, gs = 0.0, count = 0.0;
        for (Index k = 0; k < f.size(); ++k)
            if (contains(f.grid(), q, k)) {
                fs += std::abs(f[k]);
                gs += std::pow(std::abs(g[k]), s);
                count += 1.0;
            }
        total += count * f.grid().cell_volume() * (fs / count) * std::pow(gs / count, 1.0 / s);
    }
    return total;
}

GridFunction edge_spike(const Grid& g, double a, double b, double spike_at) {
    const double h = g.cell_width();
    return GridFunction::sample(g, [&](double x, double) {
        return (x > a && x < b ? 1.0 : 0.0) + (std::abs(x - spike_at) < 0.5 * h ? 50.0 : 0.0);
    });
}

}  // namespace

TEST_CASE("sparse form against re-summation") {
    Rng rng(1);
    const Grid g = make_grid(1, 64, 2.0);
    const DyadicCube q{2, {1, 0}};
    GridFunction f = random_function(g, rng), h = random_function(g, rng);
    CHECK(sparse_form(f, h, family_of(g, {q}), 2.0) ==
          doctest::Approx(measure(g, q) * average(f, q) * s_average(h, q, 2.0)).epsilon(1e-14));
    const GridFunction one(g, 1.0);
    const auto disjoint = family_of(g, {DyadicCube{1, {0, 0}}, DyadicCube{3, {5, 0}}, DyadicCube{4, {14, 0}}});
    CHECK(sparse_form(one, one, disjoint, 1.7) == doctest::Approx(1.0 + 0.25 + 0.125));
    CHECK_THROWS_AS(sparse_form(one, one, disjoint, 0.5), std::invalid_argument);

    for (int trial = 0; trial < 50; ++trial) {
        const bool two_d = trial % 2;
        const Grid gg = two_d ? make_grid(2, 16, 1.0) : make_grid(1, 256, 3.0);
        const auto a = random_function(gg, rng, -1, 1), b = random_function(gg, rng, -1, 1);
        const auto S = random_family(gg, rng, 12);
        const double s = rng.uniform(1.0, 3.0);
        CHECK(sparse_form(a, b, S, s) == doctest::Approx(naive_form(a, b, S, s)).epsilon(1e-12));
    }
}

TEST_CASE("sparse form is monotone in S and s") {
    Rng rng(2);
    const Grid g = make_grid(1, 128, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_function(g, rng), b = random_function(g, rng, 0.1, 3.0);
        auto S = random_family(g, rng, 5);
        const double before = sparse_form(a, b, S, 1.5);
        S.cubes.push_back(DyadicLattice(g).cubes()[rng.below(200)]);
        CHECK(sparse_form(a, b, S, 1.5) >= before);
        CHECK(sparse_form(a, b, S, 2.5) >= sparse_form(a, b, S, 1.5) * (1 - 1e-14));
    }
}

TEST_CASE("sparse operator against direct evaluation") {
    Rng rng(3);
    const Grid g = make_grid(1, 64, 2.0);
    const DyadicCube q{2, {3, 0}};
    const auto f = random_function(g, rng);
    const auto single = sparse_operator(f, family_of(g, {q}), 1.0);
    for (Index k = 0; k < g.size(); ++k)
        CHECK(single[k] == doctest::Approx(contains(g, q, k) ? average(f, q) : 0.0).epsilon(1e-14));

    const auto S = random_family(g, rng, 9);
    const auto count = sparse_operator(GridFunction(g, 1.0), S, 1.0);
    for (Index k = 0; k < g.size(); ++k) {
        int c = 0;
        for (const auto& cube : S.cubes) c += contains(g, cube, k);
        CHECK(count[k] == doctest::Approx(c));
    }

    for (int trial = 0; trial < 30; ++trial) {
        const auto fr = random_function(g, rng);
        const auto Sr = random_family(g, rng, 8);
        const auto out = sparse_operator(fr, Sr, 2.0);
        for (Index k = 0; k < g.size(); ++k) {
            double expect = 0.0;
            for (const auto& cube : Sr.cubes) {
                if (!contains(g, cube, k)) continue;
                double s = 0.0, n = 0.0;
                for (Index m = 0; m < g.size(); ++m)
                    if (contains(g, cube, m)) {
                        s += fr[m] * fr[m];
                        n += 1.0;
                    }
                expect += std::sqrt(s / n);
            }
            CHECK(out[k] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    GridFunction neg(g, 1.0);
    neg[2] = -0.5;
    CHECK_THROWS_AS(sparse_operator(neg, S, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(sparse_operator(f, S, 0.5), std::invalid_argument);
}

TEST_CASE("domination ratio") {
    const auto H = KernelSpec::hilbert();
    std::vector<double> ratios;
    for (int n : {1 << 9, 1 << 10, 1 << 11}) {
        const Grid g = make_grid(1, n, 4.0);
        const DyadicLattice lat(g);
        const auto f = bump(g, 0.1, 0.5);
        const auto Tf = t_omega(f, H);
        const auto S = principal_pair_family(f, Tf, Weight::unit(g), lat, 2.0);
        const double r = domination_ratio(Tf, f, Tf, S, 2.0);
        CHECK(std::isfinite(r));
        ratios.push_back(r);
        CHECK(domination_ratio(Tf, f, Tf, with_ancestors(S), 2.0) <= r * (1 + 1e-12));
    }
    MESSAGE("domination ratio across N: " << ratios[0] << " " << ratios[1] << " " << ratios[2]);
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    CHECK(*hi / *lo <= 1.25);

    // g orthogonal to Tf
    const Grid g = make_grid(1, 256, 4.0);
    const auto f = bump(g, 0.0, 0.5);
    const auto Tf = t_omega(f, H);
    GridFunction orth = bump(g, 0.0, 0.6);
    orth -= Tf * (inner(orth, Tf) / inner(Tf, Tf));
    const auto S = stopping_family(f, DyadicLattice(g));
    CHECK(domination_ratio(Tf, f, orth, S, 2.0) < 1e-12);
    CHECK(std::isnan(domination_ratio(Tf, GridFunction(g, 0.0), orth, S, 2.0)));
    CHECK_THROWS_AS(domination_ratio(Tf, f, orth, S, 1.0), std::invalid_argument);
}

TEST_CASE("Rubio de Francia construction") {
    const Grid g = make_grid(1, 256, 4.0);
    const auto flat = rubio_de_francia(GridFunction(g, 1.0), Weight::unit(g), 2.0);
    CHECK((flat.Rh.values() - flat.Rh.values()[0]).abs().maxCoeff() < 1e-12);
    CHECK(flat.truncation_slack == std::ldexp(1.0, -19));
    CHECK(flat.op_norm_S == doctest::Approx(1.5));

    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const auto h = random_steps(g, rng, 3);
        if (h.max_abs() == 0.0) continue;
        const Weight v = trial % 2 ? random_weight(g, rng, 1.5) : random_a1_weight(g, trial, 0.5);
        const double p = rng.uniform(1.2, 4.0);
        const auto res = rubio_de_francia(h, v, p);
        CHECK(((res.Rh.values() - h.values()) >= 0.0).all());
        CHECK(lp_norm(res.Rh, v, p) <= 2.0 * lp_norm(h, v, p) * (1.0 + res.truncation_slack));
        CHECK(res.truncation_slack <= std::ldexp(1.0, -19));
    }
    const auto one_term = rubio_de_francia(bump(g, 0.0, 1.0), Weight::unit(g), 2.0, 1);
    CHECK((one_term.Rh.values() - bump(g, 0.0, 1.0).values()).abs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(rubio_de_francia(GridFunction(g, 1.0), Weight::unit(g), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(rubio_de_francia(GridFunction(g, 0.0), Weight::unit(g), 2.0), std::invalid_argument);
}

TEST_CASE("Rubio de Francia A_1 constant grows at most linearly in p'") {
    const Grid g = make_grid(1, 512, 4.0);
    const auto h = bump(g, 0.2, 0.4);
    const Weight v = power_weight(g, 0.4);
    std::vector<double> lx, ly;
    for (double p : {1.25, 1.5, 2.0, 4.0}) {
        const auto res = rubio_de_francia(GridFunction(g, h.values() + 1e-3), v, p);
        lx.push_back(std::log(p / (p - 1.0)));
        ly.push_back(std::log(res.a1_of_product));
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / 4, my = std::accumulate(ly.begin(), ly.end(), 0.0) / 4;
    double sxy = 0.0, sxx = 0.0;
    for (int k = 0; k < 4; ++k) {
        sxy += (lx[k] - mx) * (ly[k] - my);
        sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    MESSAGE("log-slope of [Rh v^{1/p}]_A1 against p': " << sxy / sxx);
    CHECK(sxy / sxx <= 1.2);
}

TEST_CASE("good lambda measurements") {
    const Grid g = make_grid(1, 1 << 11, 4.0);
    const auto H = KernelSpec::hilbert();
    const auto smooth = bump(g, 0.0, 0.8);
    const auto Tf = apply(H, smooth), Mf = maximal(smooth);
    CHECK(good_lambda_measure(Tf, Mf, 0.01, 0.99).lhs == 0.0);
    CHECK(good_lambda_measure(Tf, Mf, Tf.max_abs() / 3.0 * 1.01, 0.5).lhs == 0.0);

    const auto f = edge_spike(g, -0.8, 0.3, -0.9);
    const auto Te = apply(H, f), Me = maximal(f);
    const auto at_half = good_lambda_measure(Te, Me, 2.0, 0.5);
    CHECK(at_half.lhs > 0.0);
    CHECK(at_half.rhs_M > 0.0);
    for (double lam : {0.5, 1.0, 2.0, 2.2, 4.0}) {
        double prev = std::numeric_limits<double>::infinity();
        for (double eps : {0.5, 0.25, 0.125, 0.0625}) {
            const double lhs = good_lambda_measure(Te, Me, lam, eps).lhs;
            CHECK(lhs <= prev);
            prev = lhs;
        }
    }
    // the |Tf| > 3 lam part alone is monotone in lam
    double prev = std::numeric_limits<double>::infinity();
    for (double lam = 0.1; lam < 4.0; lam += 0.1) {
        const double m = distribution(Te, Weight::unit(g), 3.0 * lam);
        CHECK(m <= prev);
        prev = m;
    }
    CHECK(std::isnan(good_lambda_measure(Te, Me, 1e6, 0.5).ratio()));
    CHECK(good_lambda_measure(f, H, 2.0, 0.5).lhs == at_half.lhs);
    CHECK_THROWS_AS(good_lambda_measure(Te, Me, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(good_lambda_measure(Te, Me, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("ratio sentinels") {
    const Grid g = make_grid(1, 8, 1.0);
    CHECK(make_ratio("x", 1.0, 2.0, g).ratio == 0.5);
    CHECK(make_ratio("x", 0.0, 0.0, g).ratio == 0.0);
    CHECK(make_ratio("x", 0.0, 0.0, g).ok());
    CHECK(make_ratio("x", 1.0, 0.0, g).sentinel == Sentinel::zero_denominator);
    CHECK(std::isnan(make_ratio("x", 1.0, 0.0, g).ratio));
    CHECK(make_ratio("x", std::numeric_limits<double>::infinity(), 1.0, g).sentinel == Sentinel::non_finite);
    CHECK(make_ratio("x", 1.0, std::nan(""), g).sentinel == Sentinel::non_finite);
    CHECK(std::string(to_string(Sentinel::bump_condition)) == "bump_condition");

    const auto f = bump(g, 0.0, 0.3);
    const auto r = weak11_ratio(f, f, Weight::unit(g), std::numeric_limits<double>::infinity(), 1.0);
    CHECK(r.sentinel == Sentinel::infinite_a1);
}

TEST_CASE("ratio reports: trivial cases") {
    const Grid g = make_grid(1, 512, 4.0);
    const DyadicLattice lat(g);
    const auto H = KernelSpec::hilbert();
    const GridFunction zero(g, 0.0);
    const auto f = bump(g, 0.1, 0.5);
    const Weight one = Weight::unit(g);

    CHECK(cf_ratio(zero, one, 2.0, H, lat).squared.ratio == 0.0);
    const auto cf = cf_ratio(f, one, 2.0, H, lat);
    CHECK(cf.squared.ratio == doctest::Approx(cf.linear.ratio));
    CHECK(cf.squared.ratio == doctest::Approx(lp_norm(t_omega(f, H), 2.0) / lp_norm(maximal(f), 2.0)));

    const auto w11 = weak11_ratio(f, one, H, lat);
    CHECK(w11.denominator == doctest::Approx(lp_norm(f, 1.0)));
    CHECK(w11.meta.at("theta") == doctest::Approx(0.5));
    CHECK(w11.meta.at("s0_eps") == doctest::Approx(2.0));
    CHECK(weak11_ratio(zero, one, H, lat).ratio == 0.0);

    const Weight u = random_a1_weight(g, 3, 0.5);
    const auto saw = sawyer_ratio(f, u, one, H);
    const auto plain = make_ratio("x", weak_lp_norm(t_omega(f, H), u, 1.0), lp_norm(f, u, 1.0), g);
    CHECK(saw.ratio == doctest::Approx(plain.ratio).epsilon(1e-12));
    CHECK(sawyer_ratio(zero, u, one, H).ratio == 0.0);

    const std::vector<GridFunction> single{f}, same{f, f, f};
    const auto v1 = vector_valued_ratio(single, one, 1.5, 2.0, H);
    CHECK(v1.ratio == doctest::Approx(lp_norm(t_omega(f, H), 1.5) / lp_norm(maximal(f), 1.5)).epsilon(1e-12));
    CHECK(vector_valued_ratio(same, one, 1.5, 2.0, H).ratio == doctest::Approx(v1.ratio).epsilon(1e-12));
    CHECK_THROWS_AS(vector_valued_ratio(std::vector<GridFunction>{}, one, 1.5, 2.0, H), std::invalid_argument);
    CHECK_THROWS_AS(vector_valued_ratio(single, one, 1.5, 0.0, H), std::invalid_argument);

    const auto it = iterated_ratio(f, one, 1.5, H);
    CHECK(std::isfinite(it.upper.ratio));
    CHECK(it.upper.ratio == doctest::Approx(it.lower.ratio));

    const auto b = two_weight_bump_ratio(f, one, 2.0, YoungFunction::power_log(2.0, 0.5), H);
    CHECK(b.ok());
    const Weight bumped = bump_weight(one, YoungFunction::power_log(2.0, 0.5), 2.0);
    CHECK((bumped.values() - bumped.values()[0]).abs().maxCoeff() < 1e-9);
    CHECK(bumped.values()[0] >= 1.0 - 1e-9);
    CHECK(b.ratio <= lp_norm(t_omega(f, H), 2.0) / lp_norm(f, 2.0) * (1 + 1e-9));
    CHECK(b.aux == 0.5);
}

TEST_CASE("sparse A_{r,S} two-weight ratio") {
    const Grid g = make_grid(1, 64, 2.0);
    const DyadicCube q{1, {0, 0}};
    GridFunction f(g, 0.0);
    for (Index k : cells_of(g, q)) f[k] = 2.0;
    const Weight one = Weight::unit(g);
    const auto A = YoungFunction::power(3.0);  // Abar ~ t^{3/2}, so beta_{3/2}(Abar) diverges
    const auto rep = sparse_r_two_weight_ratio(f, one, 3.0, 1.0, YoungFunction::power_r(3.0, 1.5), family_of(g, {q}));
    CHECK(rep.ok());
    CHECK(rep.meta.at("beta") > 0.0);
    // single cube, r = 1, w = 1: ||<f>_Q chi_Q||_3 / ||f||_{L^3(M_A 1)} with M_A 1 = 1
    CHECK(rep.numerator == doctest::Approx(2.0 * std::cbrt(measure(g, q))));
    CHECK(rep.denominator == doctest::Approx(lp_norm(f, 3.0)).epsilon(1e-9));
    const auto pure = sparse_r_two_weight_ratio(f, one, 3.0, 1.0, A, family_of(g, {q}));
    CHECK(pure.sentinel == Sentinel::bump_condition);
    CHECK(pure.meta.at("beta") == -1.0);
    CHECK_THROWS_AS(sparse_r_two_weight_ratio(f, one, 2.0, 2.0, A, family_of(g, {q})), std::invalid_argument);
}

TEST_CASE("exponent choices and the Hoelder split") {
    Rng rng(19);
    const Grid g = make_grid(1, 512, 4.0);
    const DyadicLattice lat(g);
    std::vector<Weight> suite;
    for (double a : {0.0, 0.3, -0.3, 0.6}) suite.push_back(power_weight(g, a));
    for (std::uint64_t seed = 1; seed <= 4; ++seed) suite.push_back(random_a1_weight(g, seed, 0.5));
    const double tau = calibrate_tau(suite, lat);
    CHECK(tau >= 1.0);
    for (const auto& w : suite)
        for (double p : {1.1, 1.5, 2.0, 3.0, 8.0}) {
            const auto e = sr_exponents(p, tau, ainf_constant(w, lat));
            CHECK(e.ordered(p));
            const auto gfun = random_function(g, rng, -2.0, 2.0);
            for (int k = 0; k < 5; ++k) {
                const auto& q = lat.cubes()[rng.below(static_cast<int>(lat.cubes().size()))];
                const auto hs = holder_split(gfun, w, q, e.s, e.r);
                CHECK(hs.lhs <= hs.rhs * (1 + 1e-10));
            }
        }
    CHECK_THROWS_AS(sr_exponents(1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("reports are invariant under scaling of f and w") {
    Rng rng(23);
    const Grid g = make_grid(1, 256, 4.0);
    const DyadicLattice lat(g);
    const auto H = KernelSpec::hilbert();
    for (int trial = 0; trial < 3; ++trial) {
        const auto f = bump(g, rng.uniform(-0.3, 0.3), 0.4);
        const Weight w = random_a1_weight(g, 40 + trial, 0.5);
        const double c = rng.uniform(0.2, 7.0), d = rng.uniform(0.2, 7.0);
        const GridFunction cf_(g, f.values() * c);
        const Weight dw(GridFunction(g, w.values() * d));
        auto same = [](const RatioReport& a, const RatioReport& b) {
            CHECK(a.ratio == doctest::Approx(b.ratio).epsilon(1e-9));
        };
        same(cf_ratio(f, w, 2.0, H, lat).squared, cf_ratio(cf_, dw, 2.0, H, lat).squared);
        same(two_weight_bump_ratio(f, w, 2.0, YoungFunction::power_log(2.0, 0.5), H),
             two_weight_bump_ratio(cf_, dw, 2.0, YoungFunction::power_log(2.0, 0.5), H));
        same(iterated_ratio(f, w, 1.5, H).upper, iterated_ratio(cf_, dw, 1.5, H).upper);
        same(weak11_ratio(f, w, H, lat), weak11_ratio(cf_, dw, H, lat));
        same(sawyer_ratio(f, w, power_weight(g, 0.3), H), sawyer_ratio(cf_, dw, power_weight(g, 0.3), H));
        const std::vector<GridFunction> a{f, bump(g, 0.5, 0.3)}, b{cf_, GridFunction(g, bump(g, 0.5, 0.3).values() * c)};
        same(vector_valued_ratio(a, w, 1.5, 2.0, H), vector_valued_ratio(b, dw, 1.5, 2.0, H));
        const auto S = stopping_family(f, lat);
        same(sparse_r_two_weight_ratio(f, w, 3.0, 1.5, YoungFunction::power_r(3.0, 1.5), S),
             sparse_r_two_weight_ratio(cf_, dw, 3.0, 1.5, YoungFunction::power_r(3.0, 1.5), S));
    }
}
