#pragma once

// Young functions, Luxemburg-type cube norms and the maximal operators built
// on them (M, M_r, M_A), plus the B_p integral and the L^{q,1} log L norm.

#include "sparsedom/dyadic.hpp"
#include "sparsedom/grid.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sparsedom {

/// A convex, strictly increasing profile with A(0) = 0, optionally composed
/// with a power of its argument: value(t) = base(t^arg_power).
class YoungFunction {
public:
    enum class Kind { power, power_log, power_r, scaled_power, custom };

    /// t^p
    static YoungFunction power(double p);
    /// t^p (1 + log+ t)^{p - 1 + delta}
    static YoungFunction power_log(double p, double delta);
    /// t^{p r}
    static YoungFunction power_r(double p, double r);
    /// c t^q; the complementary function of a pure power has this form.
    static YoungFunction scaled_power(double q, double c);
    /// Tabulated profile, log-log linear between nodes, power-law outside.
    /// `t` strictly increasing and positive, `values` strictly increasing and positive.
    static YoungFunction custom(std::vector<double> t, std::vector<double> values);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double p() const noexcept { return p_; }
    [[nodiscard]] double delta() const noexcept { return delta_; }
    [[nodiscard]] double r() const noexcept { return r_; }
    [[nodiscard]] double arg_power() const noexcept { return arg_power_; }

    double operator()(double t) const;

    /// t -> A(t^e). With e = 1/p this is A_p(t) = A(t^{1/p}).
    [[nodiscard]] YoungFunction compose_power(double e) const;

    /// (c, q) with A(t) = c t^q when A is a pure power, else nothing.
    [[nodiscard]] std::optional<std::pair<double, double>> pure_power() const;

    [[nodiscard]] std::string describe() const;
    /// Exact identity of the profile (hex floats, hashed table contents).
    [[nodiscard]] std::string fingerprint() const;

private:
    struct Table {
        std::vector<double> log_t, log_a;
    };

    Kind kind_ = Kind::power;
    double p_ = 1.0, delta_ = 0.0, r_ = 1.0, coef_ = 1.0;
    double arg_power_ = 1.0;
    std::shared_ptr<const Table> table_;

    double base(double t) const;
};

/// sup_{t>0} (s t - A(t)); closed form for pure powers.
double complementary(const YoungFunction& A, double s);
/// Golden-section search on the concave objective, relative 1e-10 in t.
double complementary_numeric(const YoungFunction& A, double s);
/// The complementary function as a Young function: closed form for pure
/// powers, otherwise an adaptively refined log-log table (cached per profile).
YoungFunction complementary_function(const YoungFunction& A);
/// A^{-1}(t) by monotone bisection (relative 1e-13).
double young_inverse(const YoungFunction& A, double t);

/// Axis-aligned cube of cells: lower corner and side (cells).
struct CubeWindow {
    std::array<int, 2> lo{0, 0};
    int side = 1;
};
CubeWindow window_of(const Grid& g, const DyadicCube& q);

/// inf{lambda > 0 : mean A(|v|/lambda) <= 1} over the given samples.
double orlicz_norm(std::span<const double> abs_values, const YoungFunction& A);
double orlicz_norm(const GridFunction& f, const CubeWindow& q, const YoungFunction& A);
double orlicz_norm(const GridFunction& f, const DyadicCube& q, const YoungFunction& A);

/// Uncentred Hardy-Littlewood maximal function over every cube window of the grid.
GridFunction maximal(const GridFunction& f);
/// M_r f = M(|f|^r)^{1/r}.
GridFunction maximal_r(const GridFunction& f, double r);
/// M_A f. Pure powers go through the exact all-window path; other kinds use
/// the pruned window set (see pruned_window_lengths).
GridFunction maximal_orlicz(const GridFunction& f, const YoungFunction& A);
/// Lebesgue maximal function restricted to the pruned window set.
GridFunction maximal_pruned(const GridFunction& f);
/// Orlicz maximal function restricted to the pruned window set (any kind).
GridFunction maximal_orlicz_pruned(const GridFunction& f, const YoungFunction& A);

struct Lebesgue {};
using MaximalSpec = std::variant<Lebesgue, double, YoungFunction>;
GridFunction maximal(const GridFunction& f, const MaximalSpec& spec);

/// M applied k times.
GridFunction iterated_maximal(const GridFunction& w, int k);
GridFunction iterated_maximal(const Weight& w, int k);

/// Maximal function of a single cube of samples (row-major, side^dim values),
/// windows confined to that cube; values are taken in absolute value.
Eigen::ArrayXd maximal_on_cube(const Eigen::ArrayXd& values, int dim, int side);

/// Side lengths 2^k - 1, 2^k, 2^k + 1 within [1, n]; positions step max(1, L/4).
std::vector<int> pruned_window_lengths(int n);

/// int_c^inf A(t) t^{-p} dt/t; +infinity when the partial integrals diverge.
double beta_p(const YoungFunction& A, double p, double c_lower = 1.0);

/// <|fg|>_Q / (||f||_{A,Q} ||g||_{Abar,Q}); 0 when either norm vanishes.
double holder_defect(const GridFunction& f, const GridFunction& g, const DyadicCube& q, const YoungFunction& A);
double holder_defect(const GridFunction& f, const GridFunction& g, const DyadicCube& q, const YoungFunction& A,
                     const YoungFunction& A_bar);

/// q int_0^inf log(e + t) |{|Omega| > t}|^{1/q} dt for uniformly spaced sphere samples
/// whose total measure is `sphere_measure` (2 in 1D, 2 pi in 2D).
double lorentz_logl_norm(std::span<const double> omega_samples, double q, double sphere_measure);

}  // namespace sparsedom
