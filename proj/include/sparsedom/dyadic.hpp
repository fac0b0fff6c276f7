#pragma once

// The dyadic lattice anchored at the box corner, cube averages, sparse
// families and the stopping-time constructions that produce them.

#include "sparsedom/grid.hpp"

#include <optional>
#include <vector>

namespace sparsedom {

/// Dyadic cube of the box: level 0 is the whole box; `index` is per axis.
struct DyadicCube {
    int level = 0;
    std::array<int, 2> index{0, 0};

    friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
    friend auto operator<=>(const DyadicCube&, const DyadicCube&) = default;
};

/// Side of Q measured in cells.
inline int side_cells(const Grid& g, const DyadicCube& q) { return g.cells_per_side() >> q.level; }

/// First cell of Q along each axis.
inline std::array<int, 2> lower_corner(const Grid& g, const DyadicCube& q) {
    const int s = side_cells(g, q);
    return {q.index[0] * s, g.dim() == 2 ? q.index[1] * s : 0};
}

/// Number of cells in Q.
inline Index cell_count(const Grid& g, const DyadicCube& q) {
    const Index s = side_cells(g, q);
    return g.dim() == 1 ? s : s * s;
}

/// Lebesgue measure of Q.
inline double measure(const Grid& g, const DyadicCube& q) {
    return static_cast<double>(cell_count(g, q)) * g.cell_volume();
}

bool contains(const Grid& g, const DyadicCube& q, Index cell);
bool is_ancestor_or_self(const DyadicCube& outer, const DyadicCube& inner);
std::vector<Index> cells_of(const Grid& g, const DyadicCube& q);
std::vector<DyadicCube> children(const Grid& g, const DyadicCube& q);
std::optional<DyadicCube> parent(const DyadicCube& q);

/// Dyadic scale index j with side length of Q = 2^j (physical units, rounded).
int scale_index(const Grid& g, const DyadicCube& q);

/// All dyadic cubes of levels 0..max_level.
std::vector<DyadicCube> lattice_cubes(const Grid& grid, int max_level);

/// Complete dyadic lattice of levels 0..max_level over a grid.
class DyadicLattice {
public:
    DyadicLattice(const Grid& grid, int max_level);
    /// Lattice that reaches single cells.
    explicit DyadicLattice(const Grid& grid) : DyadicLattice(grid, grid.depth()) {}

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] int max_level() const noexcept { return max_level_; }
    [[nodiscard]] bool reaches_cells() const noexcept { return max_level_ == grid_.depth(); }
    [[nodiscard]] const std::vector<DyadicCube>& cubes() const noexcept { return cubes_; }

private:
    Grid grid_;
    int max_level_;
    std::vector<DyadicCube> cubes_;
};

double average(const GridFunction& f, const DyadicCube& q);
/// (<|f|^s>_Q)^{1/s}; s >= 1.
double s_average(const GridFunction& f, const DyadicCube& q, double s);
/// sum_Q f w / sum_Q w.
double weighted_average(const GridFunction& f, const Weight& w, const DyadicCube& q);
/// w(Q).
double weight_mass(const Weight& w, const DyadicCube& q);

/// Cubes with disjoint major subsets E_Q (stored as flat cell indices).
struct SparseFamily {
    Grid grid;
    std::vector<DyadicCube> cubes;
    std::vector<std::vector<Index>> major_subsets;
    double eta = 0.5;

    [[nodiscard]] std::size_t size() const noexcept { return cubes.size(); }
};

struct SparseCheck {
    bool ok = false;
    double worst_eta = 0.0;
};

/// Both sparse conditions against `S.eta`; worst_eta = min |E_Q|/|Q|.
SparseCheck verify_sparse(const SparseFamily& S);

/// Principal cubes of tau(Q) = <|f|>_Q with stopping rule tau(Q) > ratio * tau(F).
SparseFamily stopping_family(const GridFunction& f, const DyadicLattice& lattice, double ratio = 2.0);

/// Principal cubes of tau(Q) = <|f|>_Q (w(Q)^{-1} int_Q |g|^sr w)^{1/sr}, rule tau(Q) > 2 tau(F).
SparseFamily principal_pair_family(const GridFunction& f, const GridFunction& g, const Weight& w,
                                   const DyadicLattice& lattice, double sr, double ratio = 2.0);

/// sum_{Q in S} <|f|>_Q w(Q).
double carleson_sum(const GridFunction& f, const Weight& w, const SparseFamily& S);

/// Every strict dyadic ancestor of a member is added; E_Q are recomputed as Q
/// minus its selected children (so disjointness holds, eta may drop).
SparseFamily with_ancestors(const SparseFamily& S);

}  // namespace sparsedom
