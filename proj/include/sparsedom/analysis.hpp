#pragma once

// Sparse forms and operators, the Rubio de Francia construction, the good-lambda
// probe and the ratio measurements of the weighted inequalities.

#include "sparsedom/dyadic.hpp"
#include "sparsedom/grid.hpp"
#include "sparsedom/operators.hpp"
#include "sparsedom/young.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sparsedom {

/// sum_Q |Q| <|f|>_Q <g>_{s,Q}.
double sparse_form(const GridFunction& f, const GridFunction& g, const SparseFamily& S, double s);

/// A_{r,S} f = sum_Q <f^r>_Q^{1/r} chi_Q; f >= 0, r >= 1.
GridFunction sparse_operator(const GridFunction& f, const SparseFamily& S, double r);

/// |<T_out, g>| / (s' sparse_form(f, g, S, s)); NaN when the form vanishes.
double domination_ratio(const GridFunction& T_out, const GridFunction& f, const GridFunction& g,
                        const SparseFamily& S, double s);

struct RdFResult {
    GridFunction Rh;
    int terms_used = 0;
    double op_norm_S = 0.0;
    double a1_of_product = 0.0;
    double truncation_slack = 0.0;
};

/// S h = v^{-1/p} M(h v^{1/p}).
GridFunction rdf_step(const GridFunction& h, const Weight& v, double p);

/// Truncated series sum_k S^k h / (2 ||S||)^k. ||S|| is estimated as 1.5 times the
/// largest observed ||S u|| / ||u|| over the probes, h and the iterates S^k h.
RdFResult rubio_de_francia(const GridFunction& h, const Weight& v, double p, int terms = 20,
                           std::span<const GridFunction> probes = {});

struct GoodLambda {
    double lhs = 0.0;    // |{|Tf| > 3 lam, Mf <= eps lam}|
    double rhs_M = 0.0;  // |{Mf > lam}|
    [[nodiscard]] double ratio() const {
        return rhs_M > 0.0 ? lhs / rhs_M : std::numeric_limits<double>::quiet_NaN();
    }
};

GoodLambda good_lambda_measure(const GridFunction& f, const KernelSpec& K, double lam, double eps,
                               const std::optional<Weight>& w = std::nullopt);
GoodLambda good_lambda_measure(const GridFunction& Tf, const GridFunction& Mf, double lam, double eps,
                               const std::optional<Weight>& w = std::nullopt);

enum class Sentinel { none, zero_denominator, non_finite, infinite_a1, bump_condition };
const char* to_string(Sentinel s);

/// One named measurement numerator / denominator with its sweep coordinates.
struct RatioReport {
    std::string name;
    double p = std::numeric_limits<double>::quiet_NaN();
    double aux = std::numeric_limits<double>::quiet_NaN();  // r, delta or q
    std::string weight_id;
    std::uint64_t seed = 0;
    int N = 0;
    int dim = 1;
    double numerator = 0.0;
    double denominator = 0.0;
    double ratio = std::numeric_limits<double>::quiet_NaN();
    Sentinel sentinel = Sentinel::none;
    std::map<std::string, double> meta;

    [[nodiscard]] bool ok() const noexcept { return sentinel == Sentinel::none; }
};

/// Fills ratio and sentinel from numerator and denominator.
RatioReport make_ratio(std::string name, double numerator, double denominator, const Grid& grid);

/// ||Tf||_{L^p(w)} / ([w]_{A_inf}^2 ||Mf||_{L^p(w)}) and the variant with [w]_{A_inf}^1.  p > 0.
struct CfRatios {
    RatioReport squared;
    RatioReport linear;
};
CfRatios cf_ratio(const GridFunction& f, const Weight& w, double p, const KernelSpec& K, const DyadicLattice& lattice);
CfRatios cf_ratio(const GridFunction& Tf, const GridFunction& Mf, const Weight& w, double p, double ainf);

/// The weight M_{A_p} w with A_p(t) = A(t^{1/p}).
Weight bump_weight(const Weight& w, const YoungFunction& A, double p);

/// ||Tf||_{L^p(w)} / ||f||_{L^p(M_{A_p} w)}.
RatioReport two_weight_bump_ratio(const GridFunction& f, const Weight& w, double p, const YoungFunction& A,
                                  const KernelSpec& K);
RatioReport two_weight_bump_ratio(const GridFunction& f, const GridFunction& Tf, const Weight& w, double p,
                                  const YoungFunction& A);
/// With `mw` = bump_weight(w, A, p) already computed.
RatioReport two_weight_bump_ratio(const GridFunction& f, const GridFunction& Tf, const Weight& w, const Weight& mw,
                                  double p, const YoungFunction& A);

/// ||Tf||_{L^p(w)} / ||f||_{L^p(M^k w)} for k = floor(p) + 1 (`upper`) and k = floor(p) (`lower`).
struct IteratedRatios {
    RatioReport upper;
    RatioReport lower;
};
IteratedRatios iterated_ratio(const GridFunction& f, const Weight& w, double p, const KernelSpec& K);
IteratedRatios iterated_ratio(const GridFunction& f, const GridFunction& Tf, const Weight& w, double p);

/// ||Tf||_{L^{1,inf}(w)} / (||f||_{L^1(w)} [w]_{A_1} [w]_{A_inf} log2([w]_{A_inf} + 1)).
/// meta carries theta = a/(1+a) and s0*eps = log2(a+1)/(1-theta), a = [w]_{A_inf}.
RatioReport weak11_ratio(const GridFunction& f, const Weight& w, const KernelSpec& K, const DyadicLattice& lattice);
RatioReport weak11_ratio(const GridFunction& f, const GridFunction& Tf, const Weight& w, double a1, double ainf);

/// ||T(fv)/v||_{L^{1,inf}(uv)} / ||f||_{L^1(uv)}.
RatioReport sawyer_ratio(const GridFunction& f, const Weight& u, const Weight& v, const KernelSpec& K);

/// ||(sum_j |Tf_j|^q)^{1/q}||_{L^p(w)} / ||(sum_j (Mf_j)^q)^{1/q}||_{L^p(w)}.
RatioReport vector_valued_ratio(std::span<const GridFunction> fs, const Weight& w, double p, double q,
                                const KernelSpec& K);
RatioReport vector_valued_ratio(std::span<const GridFunction> Tfs, std::span<const GridFunction> Mfs,
                                const Weight& w, double p, double q);

/// ||A_{r,S} f||_{L^p(w)} / ||f||_{L^p(M_{A_p} w)}; meta["beta"] = beta_{p'}(Abar).
/// The sentinel is bump_condition when that integral diverges.
RatioReport sparse_r_two_weight_ratio(const GridFunction& f, const Weight& w, double p, double r,
                                      const YoungFunction& A, const SparseFamily& S);
RatioReport sparse_r_two_weight_ratio(const GridFunction& f, const Weight& w, const Weight& mw, double p, double r,
                                      const YoungFunction& A, const SparseFamily& S);

/// s = 1 + 1/(8 p tau [w]_{A_inf}), r = 1 + 1/(4p).
struct SrExponents {
    double s = 1.0, r = 1.0;
    /// s r < 1 + 1/(2p) < p'
    [[nodiscard]] bool ordered(double p) const { return s * r < 1.0 + 0.5 / p && 1.0 + 0.5 / p < p / (p - 1.0); }
};
SrExponents sr_exponents(double p, double tau, double ainf);

/// Both sides of <|g w|^s>^{1/s} <= <|g|^{sr} w>^{1/sr} <w^{(s-1/r) r'}>^{1/(s r')} on Q.
struct HolderSplit {
    double lhs = 0.0, rhs = 0.0;
};
HolderSplit holder_split(const GridFunction& g, const Weight& w, const DyadicCube& q, double s, double r);

}  // namespace sparsedom
