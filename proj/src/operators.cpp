#include "sparsedom/operators.hpp"

#include "sparsedom/diagnostics.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <numbers>
#include <sstream>

namespace sparsedom {

namespace {

using cplx = std::complex<double>;

void require_rough(const KernelSpec& K, const char* where) {
    if (K.kind() != KernelSpec::Kind::rough_omega)
        throw std::invalid_argument(std::string(where) + ": kernel must be rough_omega");
}

void require_dim(const KernelSpec& K, const Grid& g, const char* where) {
    if (K.dim() != g.dim())
        throw std::invalid_argument(std::string(where) + ": kernel dimension " + std::to_string(K.dim()) +
                                    " does not match grid dimension " + std::to_string(g.dim()));
}

// In-place 2D transform of a row-major n x n array.
void fft2(std::vector<cplx>& a, int n, bool inverse) {
    Eigen::FFT<double> fft;
    std::vector<cplx> in(n), out(n);
    for (int pass = 0; pass < 2; ++pass) {
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) in[c] = pass == 0 ? a[r * n + c] : a[c * n + r];
            if (inverse)
                fft.inv(out, in);
            else
                fft.fwd(out, in);
            for (int c = 0; c < n; ++c) (pass == 0 ? a[r * n + c] : a[c * n + r]) = out[c];
        }
    }
}

// Signed frequency index of DFT bin k.
int signed_bin(int k, int n) { return k < n / 2 ? k : k - n; }

constexpr double kGaussNodes[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                   0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                   0.9445750230732326, 0.9894009349916499};
constexpr double kGaussWeights[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                     0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                     0.0622535239386479, 0.0271524594117541};

template <typename Fn>
double gauss16(Fn&& fn, double a, double b) {
    const double m = 0.5 * (a + b), r = 0.5 * (b - a);
    double s = 0.0;
    for (int k = 0; k < 8; ++k) s += kGaussWeights[k] * (fn(m - r * kGaussNodes[k]) + fn(m + r * kGaussNodes[k]));
    return s * r;
}

}  // namespace

KernelSpec KernelSpec::rough_omega(int dim, std::vector<double> samples) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("rough_omega: dim must be 1 or 2");
    if (dim == 1 && samples.size() != 2)
        throw std::invalid_argument("rough_omega: 1D needs exactly two samples {Omega(-1), Omega(+1)}");
    if (dim == 2 && samples.size() < 4) throw std::invalid_argument("rough_omega: 2D needs at least 4 samples");
    for (double v : samples)
        if (!std::isfinite(v)) throw std::invalid_argument("rough_omega: non-finite sample");
    KernelSpec K;
    K.kind_ = Kind::rough_omega;
    K.dim_ = dim;
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    for (double& v : samples) v -= mean;
    K.mean_correction_ = mean;
    if (mean != 0.0) ++diagnostics().omega_mean_corrections;
    const double residual =
        std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    K.zero_average_ = std::abs(residual) <= 1e-12;
    K.samples_ = std::move(samples);
    return K;
}

KernelSpec KernelSpec::hilbert() { return rough_omega(1, {-1.0, 1.0}); }

KernelSpec KernelSpec::bochner_riesz(double xi_max, bool unsafe_1d) {
    if (!(xi_max > 0.0) || !std::isfinite(xi_max)) throw std::invalid_argument("bochner_riesz: xi_max must be positive");
    KernelSpec K;
    K.kind_ = Kind::bochner_riesz;
    K.dim_ = unsafe_1d ? 1 : 2;
    K.xi_max_ = xi_max;
    K.unsafe_1d_ = unsafe_1d;
    return K;
}

double KernelSpec::sup_norm() const {
    if (kind_ == Kind::bochner_riesz) return 1.0;
    double m = 0.0;
    for (double v : samples_) m = std::max(m, std::abs(v));
    return m;
}

double KernelSpec::omega_at(double dx, double dy) const {
    if (reflected_) {
        dx = -dx;
        dy = -dy;
    }
    if (dim_ == 1) return dx < 0.0 ? samples_[0] : samples_[1];
    const int m = static_cast<int>(samples_.size());
    double angle = std::atan2(dy, dx);
    if (angle < 0.0) angle += 2.0 * std::numbers::pi;
    const long k = std::lround(angle / (2.0 * std::numbers::pi) * m);
    return samples_[static_cast<std::size_t>(((k % m) + m) % m)];
}

double KernelSpec::kernel(double dx, double dy) const {
    const double r = std::hypot(dx, dy);
    if (r == 0.0) return 0.0;
    return omega_at(dx, dy) / std::pow(r, dim_);
}

KernelSpec KernelSpec::reflected() const {
    KernelSpec K = *this;
    K.reflected_ = !reflected_;
    return K;
}

std::string KernelSpec::describe() const {
    std::ostringstream os;
    if (kind_ == Kind::bochner_riesz) {
        os << "bochner_riesz(xi_max=" << xi_max_ << (unsafe_1d_ ? ", 1d" : "") << ")";
    } else {
        os << "rough_omega(dim=" << dim_ << ", samples=" << samples_.size();
        if (reflected_) os << ", reflected";
        os << ")";
    }
    return os.str();
}

OffsetKernel kernel_table(const KernelSpec& K, const Grid& grid) {
    require_rough(K, "kernel_table");
    require_dim(K, grid, "kernel_table");
    OffsetKernel T{grid, {}};
    const int r = T.reach(), w = T.width();
    const double h = grid.cell_width();
    if (grid.dim() == 1) {
        T.values.resize(static_cast<std::size_t>(w));
        for (int d = -r; d <= r; ++d) T.values[d + r] = K.kernel(d * h, 0.0);
    } else {
        T.values.resize(static_cast<std::size_t>(w) * w);
        for (int a = -r; a <= r; ++a)
            for (int b = -r; b <= r; ++b) T.values[static_cast<std::size_t>(a + r) * w + (b + r)] = K.kernel(a * h, b * h);
    }
    return T;
}

namespace {

GridFunction convolve_direct(const OffsetKernel& K, const GridFunction& f) {
    const Grid& g = f.grid();
    const int n = g.cells_per_side();
    GridFunction out(g, 0.0);
    const double dv = g.cell_volume();
    if (g.dim() == 1) {
        for (int y = 0; y < n; ++y) {
            const double fy = f[y];
            if (fy == 0.0) continue;
            for (int x = 0; x < n; ++x) out[x] += K.at(x - y) * fy;
        }
    } else {
        for (int y0 = 0; y0 < n; ++y0)
            for (int y1 = 0; y1 < n; ++y1) {
                const double fy = f[g.flat(y0, y1)];
                if (fy == 0.0) continue;
                for (int x0 = 0; x0 < n; ++x0)
                    for (int x1 = 0; x1 < n; ++x1) out[g.flat(x0, x1)] += K.at(x0 - y0, x1 - y1) * fy;
            }
    }
    out *= dv;
    return out;
}

GridFunction convolve_fft2(const OffsetKernel& K, const GridFunction& f) {
    const Grid& g = f.grid();
    const int n = g.cells_per_side(), p = 2 * n, r = K.reach();
    std::vector<cplx> kf(static_cast<std::size_t>(p) * p, 0.0), ff(kf.size(), 0.0);
    for (int a = -r; a <= r; ++a)
        for (int b = -r; b <= r; ++b) kf[((a + p) % p) * p + (b + p) % p] = K.at(a, b);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ff[i * p + j] = f[g.flat(i, j)];
    fft2(kf, p, false);
    fft2(ff, p, false);
    for (std::size_t k = 0; k < kf.size(); ++k) ff[k] *= kf[k];
    fft2(ff, p, true);
    GridFunction out(g, 0.0);
    const double dv = g.cell_volume();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[g.flat(i, j)] = ff[i * p + j].real() * dv;
    return out;
}

void check_t_input(const GridFunction& f, const KernelSpec& K, const char* where) {
    require_rough(K, where);
    require_dim(K, f.grid(), where);
    if (!K.zero_average()) throw std::invalid_argument(std::string(where) + ": Omega must have zero average");
    if (!supported_in_central_half(f)) ++diagnostics().support_warnings;
}

}  // namespace

GridFunction apply_offset_kernel(const OffsetKernel& K, const GridFunction& f) {
    require_same_grid(K.grid, f.grid(), "apply_offset_kernel");
    if (f.grid().dim() == 2) return convolve_fft2(K, f);
    return convolve_direct(K, f);
}

GridFunction t_omega(const GridFunction& f, const KernelSpec& K) {
    check_t_input(f, K, "t_omega");
    return apply_offset_kernel(kernel_table(K, f.grid()), f);
}

GridFunction t_omega_direct(const GridFunction& f, const KernelSpec& K) {
    check_t_input(f, K, "t_omega_direct");
    return convolve_direct(kernel_table(K, f.grid()), f);
}

GridFunction bochner_riesz_critical(const GridFunction& f, double xi_max, bool unsafe_1d) {
    const Grid& g = f.grid();
    if (!(xi_max > 0.0)) throw std::invalid_argument("bochner_riesz_critical: xi_max must be positive");
    if (g.dim() != 2 && !(g.dim() == 1 && unsafe_1d))
        throw std::invalid_argument("bochner_riesz_critical: grid must be 2D (1D requires the unsafe-1d flag)");
    const int n = g.cells_per_side();
    const double scale = xi_max / (n / 2);
    std::vector<cplx> a(static_cast<std::size_t>(g.size()));
    for (Index k = 0; k < g.size(); ++k) a[k] = f[k];
    if (g.dim() == 1) {
        Eigen::FFT<double> fft;
        std::vector<cplx> spec;
        fft.fwd(spec, a);
        for (int k = 0; k < n; ++k) {
            const double xi = std::abs(signed_bin(k, n) * scale);
            spec[k] *= xi < 1.0 ? 1.0 : 0.0;
        }
        fft.inv(a, spec);
    } else {
        fft2(a, n, false);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double x0 = signed_bin(i, n) * scale, x1 = signed_bin(j, n) * scale;
                a[i * n + j] *= std::sqrt(std::max(0.0, 1.0 - (x0 * x0 + x1 * x1)));
            }
        fft2(a, n, true);
    }
    GridFunction out(g, 0.0);
    double im = 0.0;
    for (Index k = 0; k < g.size(); ++k) {
        out[k] = a[k].real();
        im = std::max(im, std::abs(a[k].imag()));
    }
    if (im > 1e-10 * std::max(f.max_abs(), 1e-300)) ++diagnostics().fft_imaginary_warnings;
    return out;
}

GridFunction apply(const KernelSpec& K, const GridFunction& f) {
    if (K.kind() == KernelSpec::Kind::bochner_riesz) return bochner_riesz_critical(f, K.xi_max(), K.unsafe_1d());
    return t_omega(f, K);
}

namespace {

// Transition 0 -> 1 on [0, 1]; psi(s) + psi(1 - s) = 1.
double rise(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

// phi(t1) - phi(2 t1) without cancellation near the edges of the annulus.
double annulus_cut(double t1) {
    return t1 <= 1.0 ? rise(2.0 * t1 - 1.0) : rise(2.0 - t1);
}

}  // namespace

double smooth_cutoff(double t) { return rise(2.0 - t); }

double kj_value(const KernelSpec& K, int j, double x, double y) {
    require_rough(K, "kj_value");
    const double r = std::hypot(x, y);
    if (r == 0.0) return 0.0;
    const double cut = annulus_cut(std::ldexp(r, 1 - j));
    return cut == 0.0 ? 0.0 : K.kernel(x, y) * cut;
}

OffsetKernel kj_piece(const KernelSpec& K, const Grid& grid, int j) {
    require_rough(K, "kj_piece");
    require_dim(K, grid, "kj_piece");
    const double h = grid.cell_width();
    const double far = (grid.cells_per_side() - 1) * h * std::sqrt(static_cast<double>(grid.dim()));
    if (std::ldexp(1.0, j) <= h)
        throw std::invalid_argument("kj_piece: annulus for j=" + std::to_string(j) + " is below the cell width");
    if (std::ldexp(1.0, j - 2) >= far)
        throw std::invalid_argument("kj_piece: annulus for j=" + std::to_string(j) + " lies outside the grid");
    OffsetKernel T{grid, {}};
    const int r = T.reach(), w = T.width();
    if (grid.dim() == 1) {
        T.values.resize(static_cast<std::size_t>(w));
        for (int d = -r; d <= r; ++d) T.values[d + r] = kj_value(K, j, d * h);
    } else {
        T.values.resize(static_cast<std::size_t>(w) * w);
        for (int a = -r; a <= r; ++a)
            for (int b = -r; b <= r; ++b) T.values[static_cast<std::size_t>(a + r) * w + (b + r)] = kj_value(K, j, a * h, b * h);
    }
    return T;
}

GridFunction CZDecomposition::piece_function(std::size_t k) const {
    const Grid& g = good.grid();
    GridFunction out(g, 0.0);
    const auto cells = cells_of(g, bad_pieces.at(k).cube);
    for (std::size_t i = 0; i < cells.size(); ++i) out[cells[i]] = bad_pieces[k].values[i];
    return out;
}

CZDecomposition cz_decompose(const GridFunction& f, double alpha, double omega_norm, const DyadicLattice& lattice) {
    require_same_grid(f.grid(), lattice.grid(), "cz_decompose");
    if (!(alpha > 0.0)) throw std::invalid_argument("cz_decompose: alpha must be positive");
    if (!(omega_norm > 0.0)) throw std::invalid_argument("cz_decompose: omega_norm must be positive");
    if (!lattice.reaches_cells()) throw std::invalid_argument("cz_decompose: lattice must reach single cells");
    if ((f.values() < 0.0).any()) throw std::invalid_argument("cz_decompose: f must be non-negative");
    const Grid& g = f.grid();
    const double height = alpha / omega_norm;
    const DyadicCube root{};
    if (average(f, root) > height)
        throw std::invalid_argument("cz_decompose: root average exceeds alpha / omega_norm; height too small for the grid");

    CZDecomposition dec{f, {}, alpha, omega_norm};
    std::vector<DyadicCube> stack{root};
    while (!stack.empty()) {
        const DyadicCube q = stack.back();
        stack.pop_back();
        const double avg = average(f, q);
        if (avg > height) {
            const auto cells = cells_of(g, q);
            BadPiece piece{q, std::vector<double>(cells.size())};
            for (std::size_t i = 0; i < cells.size(); ++i) {
                piece.values[i] = f[cells[i]] - avg;
                dec.good[cells[i]] = avg;
            }
            dec.bad_pieces.push_back(std::move(piece));
        } else if (q.level < g.depth()) {
            auto kids = children(g, q);
            stack.insert(stack.end(), kids.rbegin(), kids.rend());
        }
    }
    std::sort(dec.bad_pieces.begin(), dec.bad_pieces.end(),
              [](const BadPiece& a, const BadPiece& b) { return a.cube < b.cube; });
    return dec;
}

GridFunction bj_group(const CZDecomposition& dec, int j) {
    const Grid& g = dec.good.grid();
    GridFunction out(g, 0.0);
    for (const auto& piece : dec.bad_pieces) {
        if (scale_index(g, piece.cube) != j) continue;
        const auto cells = cells_of(g, piece.cube);
        for (std::size_t i = 0; i < cells.size(); ++i) out[cells[i]] += piece.values[i];
    }
    return out;
}

CZCheck verify_cz(const CZDecomposition& dec, const GridFunction& f) {
    const Grid& g = f.grid();
    require_same_grid(g, dec.good.grid(), "verify_cz");
    const double height = dec.height();
    const double two_n = std::ldexp(1.0, g.dim());
    CZCheck c;
    GridFunction rebuilt = dec.good;
    std::vector<int> owner_count(static_cast<std::size_t>(g.size()), 0);
    for (const auto& piece : dec.bad_pieces) {
        const auto cells = cells_of(g, piece.cube);
        if (cells.size() != piece.values.size()) {
            c.support_ok = false;
            continue;
        }
        double sum = 0.0, l1 = 0.0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            rebuilt[cells[i]] += piece.values[i];
            if (++owner_count[cells[i]] > 1) c.support_ok = false;
            sum += piece.values[i];
            l1 += std::abs(piece.values[i]);
        }
        const double vol = measure(g, piece.cube);
        c.max_piece_mean = std::max(c.max_piece_mean, std::abs(sum) * g.cell_volume() / vol / height);
        c.piece_l1_excess = std::max(c.piece_l1_excess, l1 * g.cell_volume() / (2.0 * two_n * height * vol) - 1.0);
        const double avg = average(f, piece.cube);
        c.stopping_excess = std::max(c.stopping_excess, (avg - two_n * height) / height);
        if (!(avg > height)) c.stopping_excess = std::max(c.stopping_excess, 1.0);
    }
    if (dec.bad_pieces.empty()) c.piece_l1_excess = 0.0;
    const double fscale = std::max(1.0, f.max_abs());
    c.reconstruction_error = (rebuilt.values() - f.values()).abs().maxCoeff() / fscale;
    c.good_excess = std::max((dec.good.values().maxCoeff() - two_n * height) / height,
                             -dec.good.values().minCoeff() / height);
    if (dec.bad_pieces.empty()) c.piece_l1_excess = std::min(c.piece_l1_excess, 0.0);
    return c;
}

double min_integral(double A, double theta) {
    if (!(A > 0.0)) throw std::invalid_argument("min_integral: A must be positive");
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("min_integral: theta must lie in (0, 1)");
    // u = e^s: integrand min(A, e^s) e^{s (theta - 1)} ds, kinked at s = log A.
    const double s0 = std::log(A);
    auto fn = [&](double s) { return std::min(A, std::exp(s)) * std::exp(s * (theta - 1.0)); };
    constexpr double panel = 0.25;
    const double left_span = 40.0 / theta, right_span = 40.0 / (1.0 - theta);
    double total = 0.0;
    for (double a = s0 - left_span; a < s0; a += panel) total += gauss16(fn, a, std::min(a + panel, s0));
    for (double a = s0; a < s0 + right_span; a += panel) total += gauss16(fn, a, a + panel);
    return total;
}

}  // namespace sparsedom
