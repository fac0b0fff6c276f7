#include "sparsedom/weights.hpp"

#include "sparsedom/diagnostics.hpp"
#include "sparsedom/random.hpp"
#include "sparsedom/young.hpp"

namespace sparsedom {

namespace {

constexpr double kWeightFloor = 1e-300;

// w^e with the weight raised to the floor first.
Eigen::ArrayXd clamped_power(const Weight& w, double e) {
    Eigen::ArrayXd out(w.values().size());
    std::uint64_t clamps = 0;
    for (Index k = 0; k < out.size(); ++k) {
        double x = w[k];
        if (x < kWeightFloor) {
            x = kWeightFloor;
            ++clamps;
        }
        out[k] = std::pow(x, e);
    }
    if (clamps) diagnostics().weight_clamps += clamps;
    return out;
}

template <typename Fn>
void for_each_window(const Grid& g, Fn&& fn) {
    const int n = g.cells_per_side();
    for (int len = 1; len <= n; ++len)
        for (int i = 0; i + len <= n; ++i) {
            if (g.dim() == 1) {
                fn(i, 0, len);
            } else {
                for (int j = 0; j + len <= n; ++j) fn(i, j, len);
            }
        }
}

template <typename Fn>
void for_each_cube(const DyadicLattice& lattice, CubeSweep sweep, Fn&& fn) {
    const Grid& g = lattice.grid();
    if (sweep == CubeSweep::all_windows) {
        for_each_window(g, fn);
        return;
    }
    for (const auto& q : lattice.cubes()) {
        const auto lo = lower_corner(g, q);
        fn(lo[0], lo[1], side_cells(g, q));
    }
}

double cells_in(const Grid& g, int len) { return g.dim() == 1 ? len : static_cast<double>(len) * len; }

}  // namespace

double ap_constant(const Weight& w, const DyadicLattice& lattice, double p, CubeSweep sweep) {
    require_same_grid(w.grid(), lattice.grid(), "ap_constant");
    if (!(p > 1.0)) throw std::invalid_argument("ap_constant: p must exceed 1");
    const Grid& g = lattice.grid();
    const double pc = p / (p - 1.0);
    const PrefixSums ws(g, w.values());
    const PrefixSums ds(g, clamped_power(w, 1.0 - pc));
    double best = 0.0;
    for_each_cube(lattice, sweep, [&](int i, int j, int len) {
        const double c = cells_in(g, len);
        const double val = ws.cube(i, j, len) / c * std::pow(ds.cube(i, j, len) / c, p - 1.0);
        best = std::max(best, val);
    });
    return std::max(best, 1.0);
}

double a1_constant(const Weight& w) {
    const GridFunction mw = maximal(w.function());
    return std::max(1.0, (mw.values() / w.values()).maxCoeff());
}

namespace {

double fujii_wilson_on(const Weight& w, int i0, int i1, int len) {
    const Grid& g = w.grid();
    Eigen::ArrayXd local(g.dim() == 1 ? len : len * len);
    if (g.dim() == 1) {
        local = w.values().segment(i0, len);
    } else {
        for (int a = 0; a < len; ++a)
            for (int b = 0; b < len; ++b) local[a * len + b] = w[g.flat(i0 + a, i1 + b)];
    }
    const Eigen::ArrayXd m = maximal_on_cube(local, g.dim(), len);
    return m.sum() / local.sum();
}

}  // namespace

double ainf_constant(const Weight& w, const DyadicLattice& lattice, CubeSweep sweep) {
    require_same_grid(w.grid(), lattice.grid(), "ainf_constant");
    double best = 1.0;
    for_each_cube(lattice, sweep,
                  [&](int i, int j, int len) { best = std::max(best, fujii_wilson_on(w, i, j, len)); });
    return best;
}

double reverse_holder_check(const Weight& w, const DyadicLattice& lattice, double delta) {
    require_same_grid(w.grid(), lattice.grid(), "reverse_holder_check");
    if (!(delta > 0.0)) throw std::invalid_argument("reverse_holder_check: delta must be positive");
    const Grid& g = lattice.grid();
    // normalise to avoid overflow of w^{1+delta}
    const double scale = w.values().maxCoeff();
    const Eigen::ArrayXd wn = w.values() / scale;
    const PrefixSums ws(g, wn);
    const PrefixSums hs(g, wn.pow(1.0 + delta));
    double best = 0.0;
    for_each_cube(lattice, CubeSweep::dyadic, [&](int i, int j, int len) {
        const double c = cells_in(g, len);
        const double val = std::pow(hs.cube(i, j, len) / c, 1.0 / (1.0 + delta)) / (ws.cube(i, j, len) / c);
        best = std::max(best, val);
    });
    return best;
}

double reverse_holder_margin(const Weight& w, const DyadicLattice& lattice) {
    constexpr double cap = 16.0;
    if (reverse_holder_check(w, lattice, cap) <= 2.0) return cap;
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (reverse_holder_check(w, lattice, mid) <= 2.0 ? lo : hi) = mid;
    }
    return lo;
}

double calibrate_tau(std::span<const Weight> suite, const DyadicLattice& lattice) {
    if (suite.empty()) throw std::invalid_argument("calibrate_tau: empty weight suite");
    std::vector<double> ainf;
    ainf.reserve(suite.size());
    for (const auto& w : suite) ainf.push_back(ainf_constant(w, lattice));
    auto worst = [&](double tau) {
        double m = 0.0;
        for (std::size_t k = 0; k < suite.size(); ++k)
            m = std::max(m, reverse_holder_check(suite[k], lattice, 1.0 / (tau * ainf[k])));
        return m;
    };
    constexpr double floor_tau = 1.0;
    if (worst(floor_tau) <= 2.0) return floor_tau;
    double lo = floor_tau, hi = 2.0 * floor_tau;
    while (worst(hi) > 2.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw std::runtime_error("calibrate_tau: no finite tau found");
    }
    for (int it = 0; it < 50 && hi / lo > 1.0 + 1e-9; ++it) {
        const double mid = std::sqrt(lo * hi);
        (worst(mid) <= 2.0 ? hi : lo) = mid;
    }
    return hi;
}

Weight power_weight(const Grid& grid, double a) {
    return Weight(GridFunction::sample(grid, [a](double x, double y) { return std::pow(std::hypot(x, y), a); }));
}

Weight dual_weight(const Weight& w, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("dual_weight: p must exceed 1");
    return Weight(GridFunction(w.grid(), clamped_power(w, 1.0 / (1.0 - p))));
}

GridFunction atomic_measure(const Grid& grid, std::span<const Atom> atoms) {
    GridFunction mu(grid, 0.0);
    const double h = grid.cell_width();
    const int n = grid.cells_per_side();
    auto cell_of = [&](double x) {
        return std::clamp(static_cast<int>(std::floor((x + 0.5 * grid.side_length()) / h)), 0, n - 1);
    };
    for (const auto& a : atoms) {
        std::vector<Index> cells;
        if (a.radius > 0.0)
            for (Index k = 0; k < grid.size(); ++k) {
                auto x = grid.point(k);
                if (std::hypot(x[0] - a.x, grid.dim() == 2 ? x[1] - a.y : 0.0) <= a.radius) cells.push_back(k);
            }
        if (cells.empty()) cells.push_back(grid.dim() == 1 ? grid.flat(cell_of(a.x)) : grid.flat(cell_of(a.x), cell_of(a.y)));
        const double density = a.mass / (static_cast<double>(cells.size()) * grid.cell_volume());
        for (Index k : cells) mu[k] += density;
    }
    return mu;
}

Weight a1_weight_from_atoms(const Grid& grid, std::span<const Atom> atoms, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("a1 weight: delta must lie in (0, 1)");
    if (atoms.empty()) throw std::invalid_argument("a1 weight: need at least one atom");
    const GridFunction m = maximal(atomic_measure(grid, atoms));
    return Weight(m.map([delta](double x) { return std::pow(x, delta); }));
}

std::vector<Atom> random_atoms(const Grid& grid, std::uint64_t seed) {
    Rng rng(seed * 0x9E3779B97F4A7C15ULL + 17);
    const double L = grid.side_length();
    const int count = 1 + rng.below(4);
    std::vector<Atom> atoms;
    for (int k = 0; k < count; ++k) {
        Atom a;
        a.x = rng.uniform(-0.4 * L, 0.4 * L);
        a.y = rng.uniform(-0.4 * L, 0.4 * L);
        a.mass = rng.uniform(0.5, 2.0) * 0.05 * std::pow(L, grid.dim());
        a.radius = rng.uniform(0.01, 0.05) * L;
        if (grid.dim() == 1) a.y = 0.0;
        atoms.push_back(a);
    }
    return atoms;
}

Weight random_a1_weight(const Grid& grid, std::uint64_t seed, double delta) {
    const auto atoms = random_atoms(grid, seed);
    return a1_weight_from_atoms(grid, atoms, delta);
}

WeightReport weight_report(const Weight& w, const DyadicLattice& lattice, std::span<const double> ps) {
    WeightReport r;
    for (double p : ps) r.ap[p] = ap_constant(w, lattice, p);
    r.a1 = a1_constant(w);
    r.ainf = ainf_constant(w, lattice);
    r.rh_delta = reverse_holder_margin(w, lattice);
    r.tau_calibrated = std::max(1.0, 1.0 / (r.rh_delta * r.ainf));
    return r;
}

ImprovedApBounds improved_ap_bounds(const Weight& w, const DyadicLattice& lattice, double p) {
    const double ap = ap_constant(w, lattice, p);
    const double pc = p / (p - 1.0);
    const Weight sigma = dual_weight(w, p);
    const double wi = ainf_constant(w, lattice);
    const double si = ainf_constant(sigma, lattice);
    ImprovedApBounds b;
    b.weak_power = std::pow(ap, std::min(2.0, pc));
    b.strong_power = std::pow(ap, pc);
    b.mixed = std::pow(ap, 1.0 / p) * (std::pow(wi, 1.0 / pc) + std::pow(si, 1.0 / p)) * std::min(wi, si);
    return b;
}

}  // namespace sparsedom
