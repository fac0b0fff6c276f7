#include "sparsedom/analysis.hpp"

#include "sparsedom/weights.hpp"

namespace sparsedom {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double conjugate(double p) { return p / (p - 1.0); }

void require_nonnegative(const GridFunction& f, const char* where) {
    if ((f.values() < 0.0).any()) throw std::invalid_argument(std::string(where) + ": f must be non-negative");
}

void require_p(double p, const char* where) {
    if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument(std::string(where) + ": p must exceed 1");
}

// Pointwise (sum_j |F_j|^q)^{1/q}.
GridFunction lq_combine(std::span<const GridFunction> fs, double q) {
    GridFunction out(fs.front().grid(), 0.0);
    for (const auto& f : fs) {
        require_same_grid(out.grid(), f.grid(), "vector_valued_ratio");
        out.values() += f.values().abs().pow(q);
    }
    out.values() = out.values().pow(1.0 / q);
    return out;
}

}  // namespace

double sparse_form(const GridFunction& f, const GridFunction& g, const SparseFamily& S, double s) {
    require_same_grid(f.grid(), g.grid(), "sparse_form");
    require_same_grid(f.grid(), S.grid, "sparse_form");
    if (!(s >= 1.0)) throw std::invalid_argument("sparse_form: s must be at least 1");
    const GridFunction af = f.abs();
    double total = 0.0;
    for (const auto& q : S.cubes) total += measure(f.grid(), q) * average(af, q) * s_average(g, q, s);
    return total;
}

GridFunction sparse_operator(const GridFunction& f, const SparseFamily& S, double r) {
    require_same_grid(f.grid(), S.grid, "sparse_operator");
    if (!(r >= 1.0)) throw std::invalid_argument("sparse_operator: r must be at least 1");
    require_nonnegative(f, "sparse_operator");
    GridFunction out(f.grid(), 0.0);
    for (const auto& q : S.cubes) {
        const double a = s_average(f, q, r);
        for (Index c : cells_of(f.grid(), q)) out[c] += a;
    }
    return out;
}

double domination_ratio(const GridFunction& T_out, const GridFunction& f, const GridFunction& g,
                        const SparseFamily& S, double s) {
    if (!(s > 1.0)) throw std::invalid_argument("domination_ratio: s must exceed 1");
    const double den = conjugate(s) * sparse_form(f, g, S, s);
    if (!(den > 0.0) || !std::isfinite(den)) return kNaN;
    return std::abs(inner(T_out, g)) / den;
}

GridFunction rdf_step(const GridFunction& h, const Weight& v, double p) {
    require_same_grid(h.grid(), v.grid(), "rdf_step");
    const Eigen::ArrayXd root = v.values().pow(1.0 / p);
    const GridFunction m = maximal(GridFunction(h.grid(), h.values() * root));
    return GridFunction(h.grid(), m.values() / root);
}

RdFResult rubio_de_francia(const GridFunction& h, const Weight& v, double p, int terms,
                           std::span<const GridFunction> probes) {
    require_p(p, "rubio_de_francia");
    require_nonnegative(h, "rubio_de_francia");
    if (terms < 1) throw std::invalid_argument("rubio_de_francia: terms must be positive");
    const double hn = lp_norm(h, v, p);
    if (!(hn > 0.0)) throw std::invalid_argument("rubio_de_francia: h must not vanish identically");

    std::vector<GridFunction> iterates{h};
    double worst = 1.0;
    for (int k = 1; k < terms; ++k) {
        iterates.push_back(rdf_step(iterates.back(), v, p));
        worst = std::max(worst, lp_norm(iterates.back(), v, p) / lp_norm(iterates[k - 1], v, p));
    }
    worst = std::max(worst, lp_norm(rdf_step(iterates.back(), v, p), v, p) / lp_norm(iterates.back(), v, p));
    for (const auto& u : probes) {
        const double un = lp_norm(u, v, p);
        if (un > 0.0) worst = std::max(worst, lp_norm(rdf_step(u.abs(), v, p), v, p) / un);
    }

    RdFResult res;
    res.op_norm_S = 1.5 * worst;
    res.terms_used = terms;
    res.truncation_slack = std::ldexp(1.0, 1 - terms);
    res.Rh = GridFunction(h.grid(), 0.0);
    double scale = 1.0;
    for (const auto& u : iterates) {
        res.Rh.values() += u.values() * scale;
        scale /= 2.0 * res.op_norm_S;
    }
    const Eigen::ArrayXd product = res.Rh.values() * v.values().pow(1.0 / p);
    if ((product > 0.0).all())
        res.a1_of_product = a1_constant(Weight(GridFunction(h.grid(), product)));
    else
        res.a1_of_product = std::numeric_limits<double>::infinity();
    return res;
}

GoodLambda good_lambda_measure(const GridFunction& Tf, const GridFunction& Mf, double lam, double eps,
                               const std::optional<Weight>& w) {
    require_same_grid(Tf.grid(), Mf.grid(), "good_lambda_measure");
    if (!(lam > 0.0)) throw std::invalid_argument("good_lambda_measure: lam must be positive");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("good_lambda_measure: eps must lie in (0, 1)");
    if (w) require_same_grid(Tf.grid(), w->grid(), "good_lambda_measure");
    GoodLambda out;
    for (Index k = 0; k < Tf.size(); ++k) {
        const double mass = w ? (*w)[k] : 1.0;
        if (std::abs(Tf[k]) > 3.0 * lam && Mf[k] <= eps * lam) out.lhs += mass;
        if (Mf[k] > lam) out.rhs_M += mass;
    }
    out.lhs *= Tf.grid().cell_volume();
    out.rhs_M *= Tf.grid().cell_volume();
    return out;
}

GoodLambda good_lambda_measure(const GridFunction& f, const KernelSpec& K, double lam, double eps,
                               const std::optional<Weight>& w) {
    return good_lambda_measure(apply(K, f), maximal(f), lam, eps, w);
}

const char* to_string(Sentinel s) {
    switch (s) {
        case Sentinel::none: return "none";
        case Sentinel::zero_denominator: return "zero_denominator";
        case Sentinel::non_finite: return "non_finite";
        case Sentinel::infinite_a1: return "infinite_a1";
        case Sentinel::bump_condition: return "bump_condition";
    }
    return "unknown";
}

RatioReport make_ratio(std::string name, double numerator, double denominator, const Grid& grid) {
    RatioReport r;
    r.name = std::move(name);
    r.N = grid.cells_per_side();
    r.dim = grid.dim();
    r.numerator = numerator;
    r.denominator = denominator;
    if (!std::isfinite(numerator) || !std::isfinite(denominator)) {
        r.sentinel = Sentinel::non_finite;
    } else if (numerator == 0.0 && denominator >= 0.0) {
        r.ratio = 0.0;
    } else if (!(denominator > 0.0)) {
        r.sentinel = Sentinel::zero_denominator;
    } else {
        r.ratio = numerator / denominator;
    }
    return r;
}

CfRatios cf_ratio(const GridFunction& Tf, const GridFunction& Mf, const Weight& w, double p, double ainf) {
    if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("cf_ratio: p must be positive");
    const double num = lp_norm(Tf, w, p);
    const double mf = lp_norm(Mf, w, p);
    CfRatios out{make_ratio("cf", num, ainf * ainf * mf, Tf.grid()), make_ratio("cf_linear", num, ainf * mf, Tf.grid())};
    for (auto* r : {&out.squared, &out.linear}) {
        r->p = p;
        r->meta["ainf"] = ainf;
    }
    return out;
}

CfRatios cf_ratio(const GridFunction& f, const Weight& w, double p, const KernelSpec& K, const DyadicLattice& lattice) {
    return cf_ratio(apply(K, f), maximal(f), w, p, ainf_constant(w, lattice));
}

Weight bump_weight(const Weight& w, const YoungFunction& A, double p) {
    require_p(p, "bump_weight");
    return Weight(maximal_orlicz(w.function(), A.compose_power(1.0 / p)));
}

RatioReport two_weight_bump_ratio(const GridFunction& f, const GridFunction& Tf, const Weight& w, double p,
                                  const YoungFunction& A) {
    return two_weight_bump_ratio(f, Tf, w, bump_weight(w, A, p), p, A);
}

RatioReport two_weight_bump_ratio(const GridFunction& f, const GridFunction& Tf, const Weight& w, const Weight& mw,
                                  double p, const YoungFunction& A) {
    require_same_grid(w.grid(), mw.grid(), "two_weight_bump_ratio");
    RatioReport r = make_ratio("bump", lp_norm(Tf, w, p), lp_norm(f, mw, p), f.grid());
    r.p = p;
    r.aux = A.kind() == YoungFunction::Kind::power_log ? A.delta() : A.r();
    r.meta["bump_" + std::string(A.kind() == YoungFunction::Kind::power_log ? "delta" : "r")] = r.aux;
    return r;
}

RatioReport two_weight_bump_ratio(const GridFunction& f, const Weight& w, double p, const YoungFunction& A,
                                  const KernelSpec& K) {
    return two_weight_bump_ratio(f, apply(K, f), w, p, A);
}

IteratedRatios iterated_ratio(const GridFunction& f, const GridFunction& Tf, const Weight& w, double p) {
    require_p(p, "iterated_ratio");
    const int k = static_cast<int>(std::floor(p));
    const double num = lp_norm(Tf, w, p);
    const GridFunction lower_w = iterated_maximal(w, k);
    const GridFunction upper_w = maximal(lower_w);
    IteratedRatios out{make_ratio("iterated", num, lp_norm(f, Weight(upper_w), p), f.grid()),
                       make_ratio("iterated_lower", num, lp_norm(f, Weight(lower_w), p), f.grid())};
    out.upper.p = out.lower.p = p;
    out.upper.aux = k + 1;
    out.lower.aux = k;
    return out;
}

IteratedRatios iterated_ratio(const GridFunction& f, const Weight& w, double p, const KernelSpec& K) {
    return iterated_ratio(f, apply(K, f), w, p);
}

RatioReport weak11_ratio(const GridFunction& f, const GridFunction& Tf, const Weight& w, double a1, double ainf) {
    const double lw = lp_norm(f, w, 1.0);
    const double den = lw * a1 * ainf * std::log2(ainf + 1.0);
    RatioReport r = make_ratio("weak11", weak_lp_norm(Tf, w, 1.0), den, f.grid());
    if (!std::isfinite(a1)) r.sentinel = Sentinel::infinite_a1;
    r.p = 1.0;
    const double theta = ainf / (1.0 + ainf);
    r.meta["a1"] = a1;
    r.meta["ainf"] = ainf;
    r.meta["theta"] = theta;
    r.meta["s0_eps"] = std::log2(ainf + 1.0) / (1.0 - theta);
    return r;
}

RatioReport weak11_ratio(const GridFunction& f, const Weight& w, const KernelSpec& K, const DyadicLattice& lattice) {
    return weak11_ratio(f, apply(K, f), w, a1_constant(w), ainf_constant(w, lattice));
}

RatioReport sawyer_ratio(const GridFunction& f, const Weight& u, const Weight& v, const KernelSpec& K) {
    require_same_grid(f.grid(), u.grid(), "sawyer_ratio");
    require_same_grid(f.grid(), v.grid(), "sawyer_ratio");
    const GridFunction tfv = apply(K, f * v.function());
    const GridFunction q(f.grid(), tfv.values() / v.values());
    const Weight uv(u.function() * v.function());
    RatioReport r = make_ratio("sawyer", weak_lp_norm(q, uv, 1.0), lp_norm(f, uv, 1.0), f.grid());
    r.p = 1.0;
    return r;
}

RatioReport vector_valued_ratio(std::span<const GridFunction> Tfs, std::span<const GridFunction> Mfs,
                                const Weight& w, double p, double q) {
    if (Tfs.empty() || Tfs.size() != Mfs.size())
        throw std::invalid_argument("vector_valued_ratio: need a non-empty family");
    if (!(q > 0.0)) throw std::invalid_argument("vector_valued_ratio: q must be positive");
    if (!(p > 0.0)) throw std::invalid_argument("vector_valued_ratio: p must be positive");
    RatioReport r = make_ratio("vector", lp_norm(lq_combine(Tfs, q), w, p), lp_norm(lq_combine(Mfs, q), w, p),
                               Tfs.front().grid());
    r.p = p;
    r.aux = q;
    r.meta["family_size"] = static_cast<double>(Tfs.size());
    return r;
}

RatioReport vector_valued_ratio(std::span<const GridFunction> fs, const Weight& w, double p, double q,
                                const KernelSpec& K) {
    if (fs.empty()) throw std::invalid_argument("vector_valued_ratio: empty family");
    std::vector<GridFunction> tfs, mfs;
    for (const auto& f : fs) {
        tfs.push_back(apply(K, f));
        mfs.push_back(maximal(f));
    }
    return vector_valued_ratio(tfs, mfs, w, p, q);
}

RatioReport sparse_r_two_weight_ratio(const GridFunction& f, const Weight& w, double p, double r,
                                      const YoungFunction& A, const SparseFamily& S) {
    return sparse_r_two_weight_ratio(f, w, bump_weight(w, A, p), p, r, A, S);
}

RatioReport sparse_r_two_weight_ratio(const GridFunction& f, const Weight& w, const Weight& mw, double p, double r,
                                      const YoungFunction& A, const SparseFamily& S) {
    if (!(r >= 1.0)) throw std::invalid_argument("sparse_r_two_weight_ratio: r must be at least 1");
    if (!(p > r)) throw std::invalid_argument("sparse_r_two_weight_ratio: p must exceed r");
    const double beta = beta_p(complementary_function(A), conjugate(p));
    const GridFunction ars = sparse_operator(f, S, r);
    RatioReport rep = make_ratio("sparse_r", lp_norm(ars, w, p), lp_norm(f, mw, p), f.grid());
    if (rep.ok() && !std::isfinite(beta)) rep.sentinel = Sentinel::bump_condition;
    rep.p = p;
    rep.aux = r;
    rep.meta["beta"] = std::isfinite(beta) ? beta : -1.0;
    rep.meta["family_size"] = static_cast<double>(S.size());
    return rep;
}

SrExponents sr_exponents(double p, double tau, double ainf) {
    require_p(p, "sr_exponents");
    if (!(tau > 0.0) || !(ainf >= 1.0)) throw std::invalid_argument("sr_exponents: need tau > 0 and ainf >= 1");
    return {1.0 + 1.0 / (8.0 * p * tau * ainf), 1.0 + 1.0 / (4.0 * p)};
}

HolderSplit holder_split(const GridFunction& g, const Weight& w, const DyadicCube& q, double s, double r) {
    require_same_grid(g.grid(), w.grid(), "holder_split");
    if (!(s >= 1.0 && r > 1.0)) throw std::invalid_argument("holder_split: need s >= 1 and r > 1");
    const double rc = conjugate(r);
    const double e = (s - 1.0 / r) * rc;
    double a = 0.0, b = 0.0, c = 0.0;
    const auto cells = cells_of(g.grid(), q);
    for (Index k : cells) {
        const double gk = std::abs(g[k]), wk = w[k];
        a += std::pow(gk * wk, s);
        b += std::pow(gk, s * r) * wk;
        c += std::pow(wk, e);
    }
    const double n = static_cast<double>(cells.size());
    return {std::pow(a / n, 1.0 / s), std::pow(b / n, 1.0 / (s * r)) * std::pow(c / n, 1.0 / (s * rc))};
}

}  // namespace sparsedom
