#pragma once

// Discretised rough singular integrals T_Omega, the critical Bochner-Riesz
// multiplier, the annular kernel pieces K_j and the Calderon-Zygmund
// decomposition.

#include "sparsedom/dyadic.hpp"
#include "sparsedom/grid.hpp"

#include <string>
#include <vector>

namespace sparsedom {

class KernelSpec {
public:
    enum class Kind { rough_omega, bochner_riesz };

    /// Omega sampled on the sphere: in 1D two values {Omega(-1), Omega(+1)};
    /// in 2D `samples[k]` sits at angle 2 pi k / size. The sample mean is
    /// subtracted so the kernel has zero average.
    static KernelSpec rough_omega(int dim, std::vector<double> samples);
    /// Omega = sign on S^0, i.e. the kernel 1/x.
    static KernelSpec hilbert();
    /// Fourier multiplier (1 - |xi|^2)_+^{(n-1)/2}; grid frequencies span
    /// [-xi_max, xi_max]. 1D (the ball multiplier) only when `unsafe_1d`.
    static KernelSpec bochner_riesz(double xi_max = 2.0, bool unsafe_1d = false);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] const std::vector<double>& samples() const noexcept { return samples_; }
    [[nodiscard]] bool zero_average() const noexcept { return zero_average_; }
    /// Mean removed from the raw samples at construction.
    [[nodiscard]] double mean_correction() const noexcept { return mean_correction_; }
    [[nodiscard]] double xi_max() const noexcept { return xi_max_; }
    [[nodiscard]] bool unsafe_1d() const noexcept { return unsafe_1d_; }
    /// ||Omega||_inf (1 for Bochner-Riesz).
    [[nodiscard]] double sup_norm() const;

    /// Omega at the nearest sample of the direction of (dx, dy).
    [[nodiscard]] double omega_at(double dx, double dy) const;
    /// Omega(x') / |x|^n; 0 at the origin.
    [[nodiscard]] double kernel(double dx, double dy) const;
    /// The kernel of the transpose: Omega~(x) = Omega(-x).
    [[nodiscard]] KernelSpec reflected() const;

    [[nodiscard]] std::string describe() const;

private:
    Kind kind_ = Kind::rough_omega;
    int dim_ = 1;
    std::vector<double> samples_;
    bool zero_average_ = true;
    double mean_correction_ = 0.0;
    double xi_max_ = 2.0;
    bool unsafe_1d_ = false;
    bool reflected_ = false;
};

/// Kernel values on every grid offset d in [-(N-1), N-1]^dim.
struct OffsetKernel {
    Grid grid;
    std::vector<double> values;

    [[nodiscard]] int reach() const noexcept { return grid.cells_per_side() - 1; }
    [[nodiscard]] int width() const noexcept { return 2 * grid.cells_per_side() - 1; }
    [[nodiscard]] double at(int d0, int d1 = 0) const {
        const int r = reach();
        return grid.dim() == 1 ? values[d0 + r] : values[static_cast<std::size_t>(d0 + r) * width() + (d1 + r)];
    }
};

/// Omega(x') / |x|^n on offsets, diagonal omitted.
OffsetKernel kernel_table(const KernelSpec& K, const Grid& grid);

/// (K * f)(x) = sum_y K(x - y) f(y) dV.
GridFunction apply_offset_kernel(const OffsetKernel& K, const GridFunction& f);

/// Principal-value rough singular integral sum_{y != x} K(x - y) f(y) dV.
/// 2D grids evaluate the same sum as a zero-padded FFT convolution.
GridFunction t_omega(const GridFunction& f, const KernelSpec& K);
/// The same sum by explicit double loop.
GridFunction t_omega_direct(const GridFunction& f, const KernelSpec& K);

/// (1 - |xi|^2)_+^{(n-1)/2} applied through the discrete Fourier transform.
GridFunction bochner_riesz_critical(const GridFunction& f, double xi_max = 2.0, bool unsafe_1d = false);

/// Dispatch on the kernel kind.
GridFunction apply(const KernelSpec& K, const GridFunction& f);

/// Smooth cutoff: 1 on [0, 1], 0 on [2, inf), C-infinity in between.
double smooth_cutoff(double t);

/// K_j(x) = K(x) (phi(2^{1-j}|x|) - phi(2^{2-j}|x|)) at a point.
double kj_value(const KernelSpec& K, int j, double x, double y = 0.0);

/// K_j sampled on grid offsets.
OffsetKernel kj_piece(const KernelSpec& K, const Grid& grid, int j);

struct BadPiece {
    DyadicCube cube;
    std::vector<double> values;  // b_Q on the cells of Q, in cells_of() order
};

struct CZDecomposition {
    GridFunction good;
    std::vector<BadPiece> bad_pieces;
    double alpha = 0.0;
    double omega_norm = 1.0;

    [[nodiscard]] double height() const noexcept { return alpha / omega_norm; }
    /// b_Q extended by zero to the whole grid.
    [[nodiscard]] GridFunction piece_function(std::size_t k) const;
};

/// Maximal dyadic cubes whose average exceeds alpha / omega_norm. The lattice
/// must reach single cells; f >= 0 with <f>_root <= alpha / omega_norm.
CZDecomposition cz_decompose(const GridFunction& f, double alpha, double omega_norm, const DyadicLattice& lattice);

/// Sum of the bad pieces whose cube has side 2^j.
GridFunction bj_group(const CZDecomposition& dec, int j);

/// Worst observed slack of each decomposition certificate (all <= 0 when valid).
struct CZCheck {
    double reconstruction_error = 0.0;  // max |f - good - sum b_Q|
    double max_piece_mean = 0.0;        // max |int b_Q| / |Q|
    double good_excess = 0.0;           // max(good) - 2^n h  and  -min(good)
    double piece_l1_excess = 0.0;       // max ||b_Q||_1 / (2^{n+1} h |Q|) - 1
    double stopping_excess = 0.0;       // violations of h < <f>_Q <= 2^n h
    bool support_ok = true;

    [[nodiscard]] bool ok(double tol = 1e-12) const {
        return support_ok && reconstruction_error <= tol && max_piece_mean <= tol && good_excess <= tol &&
               piece_l1_excess <= tol && stopping_excess <= tol;
    }
};
CZCheck verify_cz(const CZDecomposition& dec, const GridFunction& f);

/// int_0^inf min(A, u) u^{-1+theta} du/u by quadrature (0 < theta < 1).
double min_integral(double A, double theta);

}  // namespace sparsedom
