#include "sparsedom/dyadic.hpp"

#include <functional>
#include <map>

namespace sparsedom {

bool contains(const Grid& g, const DyadicCube& q, Index cell) {
    const auto ij = g.unflat(cell);
    const auto lo = lower_corner(g, q);
    const int s = side_cells(g, q);
    if (ij[0] < lo[0] || ij[0] >= lo[0] + s) return false;
    return g.dim() == 1 || (ij[1] >= lo[1] && ij[1] < lo[1] + s);
}

bool is_ancestor_or_self(const DyadicCube& outer, const DyadicCube& inner) {
    if (outer.level > inner.level) return false;
    const int shift = inner.level - outer.level;
    return (inner.index[0] >> shift) == outer.index[0] && (inner.index[1] >> shift) == outer.index[1];
}

std::vector<Index> cells_of(const Grid& g, const DyadicCube& q) {
    const auto lo = lower_corner(g, q);
    const int s = side_cells(g, q);
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(cell_count(g, q)));
    if (g.dim() == 1) {
        for (int i = 0; i < s; ++i) out.push_back(lo[0] + i);
    } else {
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) out.push_back(g.flat(lo[0] + i, lo[1] + j));
    }
    return out;
}

std::vector<DyadicCube> children(const Grid& g, const DyadicCube& q) {
    std::vector<DyadicCube> out;
    if (q.level >= g.depth()) return out;
    const int l = q.level + 1;
    for (int a = 0; a < 2; ++a) {
        if (g.dim() == 1) {
            out.push_back({l, {2 * q.index[0] + a, 0}});
        } else {
            for (int b = 0; b < 2; ++b) out.push_back({l, {2 * q.index[0] + a, 2 * q.index[1] + b}});
        }
    }
    return out;
}

std::optional<DyadicCube> parent(const DyadicCube& q) {
    if (q.level == 0) return std::nullopt;
    return DyadicCube{q.level - 1, {q.index[0] >> 1, q.index[1] >> 1}};
}

int scale_index(const Grid& g, const DyadicCube& q) {
    return static_cast<int>(std::lround(std::log2(g.side_length()))) - q.level;
}

std::vector<DyadicCube> lattice_cubes(const Grid& grid, int max_level) {
    if (max_level < 0 || max_level > grid.depth())
        throw std::invalid_argument("lattice_cubes: max_level " + std::to_string(max_level) +
                                    " outside [0, " + std::to_string(grid.depth()) + "]");
    std::vector<DyadicCube> out;
    for (int l = 0; l <= max_level; ++l) {
        const int m = 1 << l;
        if (grid.dim() == 1) {
            for (int i = 0; i < m; ++i) out.push_back({l, {i, 0}});
        } else {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) out.push_back({l, {i, j}});
        }
    }
    return out;
}

DyadicLattice::DyadicLattice(const Grid& grid, int max_level)
    : grid_(grid), max_level_(max_level), cubes_(lattice_cubes(grid, max_level)) {}

namespace {

double cube_sum(const Grid& g, const Eigen::ArrayXd& v, const DyadicCube& q) {
    const auto lo = lower_corner(g, q);
    const int s = side_cells(g, q);
    if (g.dim() == 1) return v.segment(lo[0], s).sum();
    double acc = 0.0;
    for (int i = 0; i < s; ++i) acc += v.segment(g.flat(lo[0] + i, lo[1]), s).sum();
    return acc;
}

}  // namespace

double average(const GridFunction& f, const DyadicCube& q) {
    return cube_sum(f.grid(), f.values(), q) / static_cast<double>(cell_count(f.grid(), q));
}

double s_average(const GridFunction& f, const DyadicCube& q, double s) {
    if (!(s >= 1.0)) throw std::invalid_argument("s_average: s must be >= 1");
    const Eigen::ArrayXd p = f.values().abs().pow(s);
    return std::pow(cube_sum(f.grid(), p, q) / static_cast<double>(cell_count(f.grid(), q)), 1.0 / s);
}

double weighted_average(const GridFunction& f, const Weight& w, const DyadicCube& q) {
    require_same_grid(f.grid(), w.grid(), "weighted_average");
    const Eigen::ArrayXd fw = f.values() * w.values();
    return cube_sum(f.grid(), fw, q) / cube_sum(f.grid(), w.values(), q);
}

double weight_mass(const Weight& w, const DyadicCube& q) {
    return cube_sum(w.grid(), w.values(), q) * w.grid().cell_volume();
}

SparseCheck verify_sparse(const SparseFamily& S) {
    const Grid& g = S.grid;
    SparseCheck out{true, 1.0};
    if (S.major_subsets.size() != S.cubes.size()) return {false, 0.0};
    if (!(S.eta > 0.0 && S.eta <= 1.0)) out.ok = false;
    std::vector<char> used(static_cast<std::size_t>(g.size()), 0);
    for (std::size_t k = 0; k < S.cubes.size(); ++k) {
        const auto& q = S.cubes[k];
        if (q.level < 0 || q.level > g.depth()) return {false, 0.0};
        for (Index c : S.major_subsets[k]) {
            if (c < 0 || c >= g.size() || !contains(g, q, c) || used[c]) {
                out.ok = false;
                continue;
            }
            used[c] = 1;
        }
        const double frac = static_cast<double>(S.major_subsets[k].size()) /
                            static_cast<double>(cell_count(g, q));
        out.worst_eta = std::min(out.worst_eta, frac);
        if (S.eta * static_cast<double>(cell_count(g, q)) > static_cast<double>(S.major_subsets[k].size()) + 1e-9)
            out.ok = false;
    }
    if (S.cubes.empty()) out.worst_eta = 1.0;
    return out;
}

namespace {

// E_Q = cells of Q not covered by a deeper selected cube.
std::vector<std::vector<Index>> major_subsets_of(const Grid& g, const std::vector<DyadicCube>& cubes) {
    std::vector<std::size_t> order(cubes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cubes[a].level < cubes[b].level; });
    std::vector<Index> owner(static_cast<std::size_t>(g.size()), -1);
    for (std::size_t k : order)
        for (Index c : cells_of(g, cubes[k])) owner[c] = static_cast<Index>(k);
    std::vector<std::vector<Index>> out(cubes.size());
    for (Index c = 0; c < g.size(); ++c)
        if (owner[c] >= 0) out[owner[c]].push_back(c);
    return out;
}

double measured_eta(const Grid& g, const SparseFamily& S) {
    double worst = 1.0;
    for (std::size_t k = 0; k < S.cubes.size(); ++k)
        worst = std::min(worst, static_cast<double>(S.major_subsets[k].size()) /
                                    static_cast<double>(cell_count(g, S.cubes[k])));
    return worst;
}

SparseFamily principal_cubes(const DyadicLattice& lattice, const std::function<double(const DyadicCube&)>& tau,
                             double ratio) {
    const Grid& g = lattice.grid();
    SparseFamily S;
    S.grid = g;
    const DyadicCube root{0, {0, 0}};
    S.cubes.push_back(root);
    std::vector<std::pair<DyadicCube, double>> pending{{root, tau(root)}};
    while (!pending.empty()) {
        auto [F, tau_f] = pending.back();
        pending.pop_back();
        if (F.level >= lattice.max_level()) continue;
        std::vector<DyadicCube> stack = children(g, F);
        while (!stack.empty()) {
            DyadicCube q = stack.back();
            stack.pop_back();
            const double t = tau(q);
            if (t > ratio * tau_f) {
                S.cubes.push_back(q);
                pending.emplace_back(q, t);
            } else if (q.level < lattice.max_level()) {
                for (const auto& c : children(g, q)) stack.push_back(c);
            }
        }
    }
    std::sort(S.cubes.begin(), S.cubes.end());
    S.major_subsets = major_subsets_of(g, S.cubes);
    return S;
}

}  // namespace

SparseFamily stopping_family(const GridFunction& f, const DyadicLattice& lattice, double ratio) {
    require_same_grid(f.grid(), lattice.grid(), "stopping_family");
    if (!(ratio > 1.0)) throw std::invalid_argument("stopping_family: ratio must exceed 1");
    if (f.max_abs() == 0.0) throw std::invalid_argument("stopping_family: f is identically zero");
    const Grid& g = f.grid();
    const PrefixSums sums(g, f.values().abs());
    auto tau = [&](const DyadicCube& q) {
        const auto lo = lower_corner(g, q);
        return sums.cube(lo[0], lo[1], side_cells(g, q)) / static_cast<double>(cell_count(g, q));
    };
    SparseFamily S = principal_cubes(lattice, tau, ratio);
    S.eta = 1.0 - 1.0 / ratio;
    return S;
}

SparseFamily principal_pair_family(const GridFunction& f, const GridFunction& g, const Weight& w,
                                   const DyadicLattice& lattice, double sr, double ratio) {
    require_same_grid(f.grid(), lattice.grid(), "principal_pair_family");
    require_same_grid(g.grid(), lattice.grid(), "principal_pair_family");
    require_same_grid(w.grid(), lattice.grid(), "principal_pair_family");
    if (!(sr >= 1.0)) throw std::invalid_argument("principal_pair_family: sr must be >= 1");
    if (!(ratio > 1.0)) throw std::invalid_argument("principal_pair_family: ratio must exceed 1");
    const Grid& grid = f.grid();
    const PrefixSums fs(grid, f.values().abs());
    const PrefixSums gw(grid, g.values().abs().pow(sr) * w.values());
    const PrefixSums ws(grid, w.values());
    auto tau = [&](const DyadicCube& q) {
        const auto lo = lower_corner(grid, q);
        const int s = side_cells(grid, q);
        const double fa = fs.cube(lo[0], lo[1], s) / static_cast<double>(cell_count(grid, q));
        const double ga = std::pow(gw.cube(lo[0], lo[1], s) / ws.cube(lo[0], lo[1], s), 1.0 / sr);
        return fa * ga;
    };
    SparseFamily S = principal_cubes(lattice, tau, ratio);
    S.eta = measured_eta(grid, S);
    return S;
}

double carleson_sum(const GridFunction& f, const Weight& w, const SparseFamily& S) {
    require_same_grid(f.grid(), S.grid, "carleson_sum");
    require_same_grid(w.grid(), S.grid, "carleson_sum");
    const Grid& g = S.grid;
    const PrefixSums fs(g, f.values().abs());
    const PrefixSums ws(g, w.values());
    double acc = 0.0;
    for (const auto& q : S.cubes) {
        const auto lo = lower_corner(g, q);
        const int s = side_cells(g, q);
        acc += fs.cube(lo[0], lo[1], s) / static_cast<double>(cell_count(g, q)) *
               ws.cube(lo[0], lo[1], s) * g.cell_volume();
    }
    return acc;
}

SparseFamily with_ancestors(const SparseFamily& S) {
    std::vector<DyadicCube> all = S.cubes;
    for (const auto& q : S.cubes) {
        auto p = parent(q);
        while (p) {
            all.push_back(*p);
            p = parent(*p);
        }
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    SparseFamily out;
    out.grid = S.grid;
    out.cubes = std::move(all);
    out.major_subsets = major_subsets_of(out.grid, out.cubes);
    out.eta = measured_eta(out.grid, out);
    return out;
}

}  // namespace sparsedom
