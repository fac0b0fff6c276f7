#pragma once

// Uniform grids over a centred box in R^n (n = 1, 2) and functions sampled at
// cell centres. Every integral in the toolkit is a midpoint sum over cells.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sparsedom {

using Index = std::ptrdiff_t;

class Grid {
public:
    Grid() = default;

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int cells_per_side() const noexcept { return n_; }
    [[nodiscard]] double side_length() const noexcept { return side_; }
    [[nodiscard]] int depth() const noexcept { return depth_; }

    [[nodiscard]] Index size() const noexcept {
        return dim_ == 1 ? Index{n_} : Index{n_} * n_;
    }
    [[nodiscard]] double cell_width() const noexcept { return side_ / n_; }
    [[nodiscard]] double cell_volume() const noexcept {
        return std::pow(cell_width(), dim_);
    }
    [[nodiscard]] double volume() const noexcept { return std::pow(side_, dim_); }

    /// Coordinate of the centre of cell i along one axis.
    [[nodiscard]] double center(int i) const noexcept {
        return -0.5 * side_ + (i + 0.5) * cell_width();
    }

    /// Row-major flat index; in 1D only `i0` is used.
    [[nodiscard]] Index flat(int i0, int i1 = 0) const noexcept {
        return dim_ == 1 ? Index{i0} : Index{i0} * n_ + i1;
    }
    [[nodiscard]] std::array<int, 2> unflat(Index k) const noexcept {
        if (dim_ == 1) return {static_cast<int>(k), 0};
        return {static_cast<int>(k / n_), static_cast<int>(k % n_)};
    }
    [[nodiscard]] std::array<double, 2> point(Index k) const noexcept {
        auto ij = unflat(k);
        return {center(ij[0]), dim_ == 1 ? 0.0 : center(ij[1])};
    }
    [[nodiscard]] double radius(Index k) const noexcept {
        auto x = point(k);
        return std::hypot(x[0], x[1]);
    }

    friend bool operator==(const Grid& a, const Grid& b) noexcept {
        return a.dim_ == b.dim_ && a.n_ == b.n_ && a.side_ == b.side_;
    }

    friend Grid make_grid(int dim, int cells_per_side, double side_length);

private:
    int dim_ = 1;
    int n_ = 8;
    int depth_ = 3;
    double side_ = 1.0;
};

inline bool is_power_of_two(long long n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

/// Grid whose cells tile [-side_length/2, side_length/2]^dim.
inline Grid make_grid(int dim, int cells_per_side, double side_length) {
    if (dim != 1 && dim != 2)
        throw std::invalid_argument("make_grid: dim must be 1 or 2, got " + std::to_string(dim));
    if (!is_power_of_two(cells_per_side))
        throw std::invalid_argument("make_grid: cells_per_side must be a power of two, got " +
                                    std::to_string(cells_per_side));
    if (cells_per_side < 8)
        throw std::invalid_argument("make_grid: cells_per_side must be at least 8");
    if (!(side_length > 0.0) || !std::isfinite(side_length))
        throw std::invalid_argument("make_grid: side_length must be positive");
    Grid g;
    g.dim_ = dim;
    g.n_ = cells_per_side;
    g.depth_ = static_cast<int>(std::lround(std::log2(cells_per_side)));
    g.side_ = side_length;
    return g;
}

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (!(a == b)) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

/// A real function sampled at the cell centres of a Grid.
template <typename Scalar>
class BasicGridFunction {
public:
    using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

    BasicGridFunction() = default;
    explicit BasicGridFunction(const Grid& grid, Scalar fill = Scalar(0))
        : grid_(grid), values_(Values::Constant(grid.size(), fill)) {}
    BasicGridFunction(const Grid& grid, Values values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw std::invalid_argument("GridFunction: value count " +
                                        std::to_string(values_.size()) + " != cell count " +
                                        std::to_string(grid_.size()));
    }

    /// Samples `fn(x, y)` at every cell centre (y = 0 in 1D).
    template <typename Fn>
    static BasicGridFunction sample(const Grid& grid, Fn&& fn) {
        Values v(grid.size());
        for (Index k = 0; k < grid.size(); ++k) {
            auto x = grid.point(k);
            v[k] = static_cast<Scalar>(fn(x[0], x[1]));
        }
        return {grid, std::move(v)};
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] const Values& values() const noexcept { return values_; }
    [[nodiscard]] Values& values() noexcept { return values_; }
    [[nodiscard]] Index size() const noexcept { return values_.size(); }
    Scalar operator[](Index k) const { return values_[k]; }
    Scalar& operator[](Index k) { return values_[k]; }

    [[nodiscard]] BasicGridFunction abs() const { return {grid_, values_.abs()}; }
    [[nodiscard]] BasicGridFunction pow(Scalar e) const { return {grid_, values_.abs().pow(e)}; }
    [[nodiscard]] Scalar max_abs() const { return values_.size() ? values_.abs().maxCoeff() : Scalar(0); }
    [[nodiscard]] Scalar integral() const { return values_.sum() * grid_.cell_volume(); }

    template <typename Fn>
    [[nodiscard]] BasicGridFunction map(Fn&& fn) const {
        Values v(values_.size());
        for (Index k = 0; k < values_.size(); ++k) v[k] = static_cast<Scalar>(fn(values_[k]));
        return {grid_, std::move(v)};
    }

    BasicGridFunction& operator+=(const BasicGridFunction& o) {
        require_same_grid(grid_, o.grid_, "GridFunction +=");
        values_ += o.values_;
        return *this;
    }
    BasicGridFunction& operator-=(const BasicGridFunction& o) {
        require_same_grid(grid_, o.grid_, "GridFunction -=");
        values_ -= o.values_;
        return *this;
    }
    BasicGridFunction& operator*=(Scalar c) {
        values_ *= c;
        return *this;
    }

    friend BasicGridFunction operator+(BasicGridFunction a, const BasicGridFunction& b) { return a += b; }
    friend BasicGridFunction operator-(BasicGridFunction a, const BasicGridFunction& b) { return a -= b; }
    friend BasicGridFunction operator*(Scalar c, BasicGridFunction a) { return a *= c; }
    friend BasicGridFunction operator*(BasicGridFunction a, Scalar c) { return a *= c; }
    friend BasicGridFunction operator*(const BasicGridFunction& a, const BasicGridFunction& b) {
        require_same_grid(a.grid_, b.grid_, "GridFunction *");
        return {a.grid_, a.values_ * b.values_};
    }
    friend BasicGridFunction operator/(const BasicGridFunction& a, const BasicGridFunction& b) {
        require_same_grid(a.grid_, b.grid_, "GridFunction /");
        return {a.grid_, a.values_ / b.values_};
    }

private:
    Grid grid_;
    Values values_;
};

using GridFunction = BasicGridFunction<double>;

/// A GridFunction whose values are all strictly positive (and finite).
class Weight {
public:
    Weight() = default;
    explicit Weight(GridFunction fn) : fn_(std::move(fn)) {
        for (Index k = 0; k < fn_.size(); ++k)
            if (!(fn_[k] > 0.0) || !std::isfinite(fn_[k]))
                throw std::invalid_argument("Weight: value at cell " + std::to_string(k) +
                                            " is not strictly positive and finite");
    }
    static Weight unit(const Grid& grid) { return Weight(GridFunction(grid, 1.0)); }

    [[nodiscard]] const GridFunction& function() const noexcept { return fn_; }
    [[nodiscard]] const Grid& grid() const noexcept { return fn_.grid(); }
    [[nodiscard]] const GridFunction::Values& values() const noexcept { return fn_.values(); }
    double operator[](Index k) const { return fn_[k]; }
    [[nodiscard]] double mass() const { return fn_.integral(); }

private:
    GridFunction fn_;
};

/// (sum |f|^p w dV)^{1/p}.
template <typename Scalar>
Scalar lp_norm(const BasicGridFunction<Scalar>& f, const Weight& w, Scalar p) {
    require_same_grid(f.grid(), w.grid(), "lp_norm");
    if (!(p > 0)) throw std::invalid_argument("lp_norm: p must be positive");
    const auto& v = f.values();
    Scalar s = (v.abs().pow(p) * w.values().template cast<Scalar>()).sum() *
               static_cast<Scalar>(f.grid().cell_volume());
    return std::pow(s, Scalar(1) / p);
}

template <typename Scalar>
Scalar lp_norm(const BasicGridFunction<Scalar>& f, Scalar p) {
    return lp_norm(f, Weight::unit(f.grid()), p);
}

/// w-measure of {|f| > t}.
template <typename Scalar>
Scalar distribution(const BasicGridFunction<Scalar>& f, const Weight& w, Scalar t) {
    require_same_grid(f.grid(), w.grid(), "distribution");
    if (t < 0) throw std::invalid_argument("distribution: t must be non-negative");
    Scalar s = 0;
    for (Index k = 0; k < f.size(); ++k)
        if (std::abs(f[k]) > t) s += w[k];
    return s * static_cast<Scalar>(f.grid().cell_volume());
}

/// sup_t t * w({|f| > t})^{1/p}, evaluated at every achieved level under the
/// strict and non-strict superlevel conventions.
template <typename Scalar>
Scalar weak_lp_norm(const BasicGridFunction<Scalar>& f, const Weight& w, Scalar p) {
    require_same_grid(f.grid(), w.grid(), "weak_lp_norm");
    if (!(p > 0)) throw std::invalid_argument("weak_lp_norm: p must be positive");
    const Index n = f.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        Scalar fa = std::abs(f[a]), fb = std::abs(f[b]);
        return fa != fb ? fa > fb : a < b;
    });
    const Scalar vol = static_cast<Scalar>(f.grid().cell_volume());
    Scalar best = 0, above = 0;  // above = w-measure of {|f| > current level}
    Index i = 0;
    while (i < n) {
        const Scalar t = std::abs(f[order[i]]);
        if (t == 0) break;
        Scalar level_mass = 0;
        Index j = i;
        for (; j < n && std::abs(f[order[j]]) == t; ++j) level_mass += w[order[j]];
        const Scalar strict = t * std::pow(above * vol, Scalar(1) / p);
        const Scalar closed = t * std::pow((above + level_mass) * vol, Scalar(1) / p);
        best = std::max({best, strict, closed});
        above += level_mass;
        i = j;
    }
    return best;
}

/// Inner product sum f g dV.
template <typename Scalar>
Scalar inner(const BasicGridFunction<Scalar>& f, const BasicGridFunction<Scalar>& g) {
    require_same_grid(f.grid(), g.grid(), "inner");
    return (f.values() * g.values()).sum() * static_cast<Scalar>(f.grid().cell_volume());
}

/// True when every non-zero sample lies in [-L/4, L/4]^dim.
inline bool supported_in_central_half(const GridFunction& f) {
    const double q = 0.25 * f.grid().side_length();
    for (Index k = 0; k < f.size(); ++k) {
        if (f[k] == 0.0) continue;
        auto x = f.grid().point(k);
        if (std::abs(x[0]) > q || std::abs(x[1]) > q) return false;
    }
    return true;
}

/// Summed-area table: O(1) sums over any axis-aligned box of cells.
class PrefixSums {
public:
    explicit PrefixSums(const GridFunction& f) : PrefixSums(f.grid(), f.values()) {}
    PrefixSums(const Grid& grid, const Eigen::ArrayXd& values) : dim_(grid.dim()), n_(grid.cells_per_side()) {
        if (dim_ == 1) {
            s_.assign(static_cast<std::size_t>(n_ + 1), 0.0);
            for (int i = 0; i < n_; ++i) s_[i + 1] = s_[i] + values[i];
        } else {
            const int m = n_ + 1;
            s_.assign(static_cast<std::size_t>(m) * m, 0.0);
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j)
                    s_[(i + 1) * m + j + 1] = values[Index{i} * n_ + j] + s_[i * m + j + 1] +
                                              s_[(i + 1) * m + j] - s_[i * m + j];
        }
    }

    /// Sum over cells [i0, i0+len0) x [i1, i1+len1) (second range ignored in 1D).
    [[nodiscard]] double box(int i0, int len0, int i1 = 0, int len1 = 1) const noexcept {
        if (dim_ == 1) return s_[i0 + len0] - s_[i0];
        const int m = n_ + 1;
        const int a = i0, b = i0 + len0, c = i1, d = i1 + len1;
        return s_[b * m + d] - s_[a * m + d] - s_[b * m + c] + s_[a * m + c];
    }
    /// Sum over the cube of side `len` with lower corner (i0, i1).
    [[nodiscard]] double cube(int i0, int i1, int len) const noexcept {
        return dim_ == 1 ? box(i0, len) : box(i0, len, i1, len);
    }

private:
    int dim_;
    int n_;
    std::vector<double> s_;
};

}  // namespace sparsedom
