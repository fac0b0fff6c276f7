#include "sparsedom/young.hpp"

#include "sliding_max.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <limits>
#include <map>
#include <mutex>

namespace sparsedom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

YoungFunction YoungFunction::power(double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("YoungFunction::power: p must be >= 1");
    YoungFunction a;
    a.kind_ = Kind::power;
    a.p_ = p;
    return a;
}

YoungFunction YoungFunction::power_log(double p, double delta) {
    if (!(p > 1.0)) throw std::invalid_argument("YoungFunction::power_log: p must be > 1");
    if (!(delta >= 0.0)) throw std::invalid_argument("YoungFunction::power_log: delta must be >= 0");
    YoungFunction a;
    a.kind_ = Kind::power_log;
    a.p_ = p;
    a.delta_ = delta;
    return a;
}

YoungFunction YoungFunction::power_r(double p, double r) {
    if (!(p >= 1.0 && r >= 1.0)) throw std::invalid_argument("YoungFunction::power_r: p, r must be >= 1");
    YoungFunction a;
    a.kind_ = Kind::power_r;
    a.p_ = p;
    a.r_ = r;
    return a;
}

YoungFunction YoungFunction::scaled_power(double q, double c) {
    if (!(q >= 1.0 && c > 0.0)) throw std::invalid_argument("YoungFunction::scaled_power: need q >= 1, c > 0");
    YoungFunction a;
    a.kind_ = Kind::scaled_power;
    a.p_ = q;
    a.coef_ = c;
    return a;
}

YoungFunction YoungFunction::custom(std::vector<double> t, std::vector<double> values) {
    if (t.size() < 2 || t.size() != values.size())
        throw std::invalid_argument("YoungFunction::custom: need at least two (t, A(t)) nodes");
    auto table = std::make_shared<Table>();
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(t[k] > 0.0 && values[k] > 0.0))
            throw std::invalid_argument("YoungFunction::custom: nodes must be positive");
        if (k > 0 && !(t[k] > t[k - 1] && values[k] > values[k - 1]))
            throw std::invalid_argument("YoungFunction::custom: nodes must be strictly increasing");
        table->log_t.push_back(std::log(t[k]));
        table->log_a.push_back(std::log(values[k]));
    }
    YoungFunction a;
    a.kind_ = Kind::custom;
    a.table_ = std::move(table);
    return a;
}

double YoungFunction::base(double t) const {
    if (t <= 0.0) return 0.0;
    switch (kind_) {
        case Kind::power:
            return std::pow(t, p_);
        case Kind::power_r:
            return std::pow(t, p_ * r_);
        case Kind::scaled_power:
            return coef_ * std::pow(t, p_);
        case Kind::power_log: {
            const double tp = std::pow(t, p_);
            return t <= 1.0 ? tp : tp * std::pow(1.0 + std::log(t), p_ - 1.0 + delta_);
        }
        case Kind::custom: {
            const auto& lt = table_->log_t;
            const auto& la = table_->log_a;
            const double x = std::log(t);
            const std::size_t n = lt.size();
            std::size_t k;
            if (x <= lt.front()) {
                k = 0;
            } else if (x >= lt.back()) {
                k = n - 2;
            } else {
                k = static_cast<std::size_t>(std::upper_bound(lt.begin(), lt.end(), x) - lt.begin()) - 1;
            }
            const double slope = (la[k + 1] - la[k]) / (lt[k + 1] - lt[k]);
            return std::exp(la[k] + slope * (x - lt[k]));
        }
    }
    return 0.0;
}

double YoungFunction::operator()(double t) const {
    if (t <= 0.0) return 0.0;
    return base(arg_power_ == 1.0 ? t : std::pow(t, arg_power_));
}

YoungFunction YoungFunction::compose_power(double e) const {
    if (!(e > 0.0)) throw std::invalid_argument("YoungFunction::compose_power: exponent must be positive");
    YoungFunction a = *this;
    a.arg_power_ *= e;
    return a;
}

std::optional<std::pair<double, double>> YoungFunction::pure_power() const {
    switch (kind_) {
        case Kind::power:
            return std::pair{1.0, p_ * arg_power_};
        case Kind::power_r:
            return std::pair{1.0, p_ * r_ * arg_power_};
        case Kind::scaled_power:
            return std::pair{coef_, p_ * arg_power_};
        default:
            return std::nullopt;
    }
}

std::string YoungFunction::fingerprint() const {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%d:%a:%a:%a:%a:%a", static_cast<int>(kind_), p_, delta_, r_, coef_, arg_power_);
    std::string s = buf;
    if (table_) {
        std::uint64_t h = 1469598103934665603ULL;
        auto mix = [&h](double x) {
            unsigned char bytes[sizeof x];
            std::memcpy(bytes, &x, sizeof x);
            for (unsigned char b : bytes) h = (h ^ b) * 1099511628211ULL;
        };
        for (double x : table_->log_t) mix(x);
        for (double x : table_->log_a) mix(x);
        std::snprintf(buf, sizeof buf, ":%zu:%016llx", table_->log_t.size(), static_cast<unsigned long long>(h));
        s += buf;
    }
    return s;
}

std::string YoungFunction::describe() const {
    char buf[160];
    switch (kind_) {
        case Kind::power:
            std::snprintf(buf, sizeof buf, "power(p=%g)", p_);
            break;
        case Kind::power_log:
            std::snprintf(buf, sizeof buf, "power_log(p=%g,delta=%g)", p_, delta_);
            break;
        case Kind::power_r:
            std::snprintf(buf, sizeof buf, "power_r(p=%g,r=%g)", p_, r_);
            break;
        case Kind::scaled_power:
            std::snprintf(buf, sizeof buf, "scaled_power(q=%g,c=%g)", p_, coef_);
            break;
        case Kind::custom:
            std::snprintf(buf, sizeof buf, "custom(%zu nodes)", table_->log_t.size());
            break;
    }
    std::string s = buf;
    if (arg_power_ != 1.0) {
        std::snprintf(buf, sizeof buf, "[t^%g]", arg_power_);
        s += buf;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Complementary functions

double complementary_numeric(const YoungFunction& A, double s) {
    if (s < 0.0) throw std::invalid_argument("complementary: s must be non-negative");
    if (s == 0.0) return 0.0;
    auto phi = [&](double t) { return s * t - A(t); };
    double hi = 1.0;
    while (A(hi) < 2.0 * s * hi) {
        hi *= 2.0;
        if (hi > 1e300) return kInf;
    }
    double lo = hi;
    do {
        lo *= 0.5;
        if (lo < 1e-300) return 0.0;
    } while (!(phi(lo) < phi(2.0 * lo)));
    // maximiser lies in (lo, 4 lo); golden section on log t (phi is unimodal there)
    constexpr double g = 0.6180339887498949;
    double a = std::log(lo), b = std::log(std::min(4.0 * lo, hi));
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = phi(std::exp(c)), fd = phi(std::exp(d));
    while (b - a > 1e-12) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = phi(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = phi(std::exp(d));
        }
    }
    return std::max(0.0, std::max(fc, fd));
}

double complementary(const YoungFunction& A, double s) {
    if (s < 0.0) throw std::invalid_argument("complementary: s must be non-negative");
    if (auto pp = A.pure_power()) {
        const auto [c, q] = *pp;
        if (s == 0.0) return 0.0;
        if (q == 1.0) return s <= c ? 0.0 : kInf;
        const double t_star = std::pow(s / (c * q), 1.0 / (q - 1.0));
        return (1.0 - 1.0 / q) * s * t_star;
    }
    return complementary_numeric(A, s);
}

YoungFunction complementary_function(const YoungFunction& A) {
    if (auto pp = A.pure_power()) {
        const auto [c, q] = *pp;
        if (!(q > 1.0)) throw std::invalid_argument("complementary_function: exponent must exceed 1");
        const double qc = q / (q - 1.0);
        const double cc = (1.0 - 1.0 / q) * std::pow(c * q, -1.0 / (q - 1.0));
        return YoungFunction::scaled_power(qc, cc);
    }
    static std::mutex mu;
    static std::map<std::string, YoungFunction> cache;
    const std::string key = A.fingerprint();
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    // memo table on [1e-8, 1e8]: 20 nodes per decade, then bisect every interval
    // whose log-log midpoint misses the numeric transform by more than 1e-8
    std::vector<double> t, v;
    auto push = [&](double s, double val) {
        if (val > 0.0 && std::isfinite(val) && (v.empty() || (s > t.back() && val > v.back()))) {
            t.push_back(s);
            v.push_back(val);
        }
    };
    auto refine = [&](auto&& self, double s0, double v0, double s1, double v1, int depth) -> void {
        const double sm = std::sqrt(s0 * s1), vm = complementary_numeric(A, sm);
        const double guess = std::sqrt(v0 * v1);
        if (depth < 24 && std::abs(guess - vm) > 1e-8 * vm) {
            self(self, s0, v0, sm, vm, depth + 1);
            push(sm, vm);
            self(self, sm, vm, s1, v1, depth + 1);
        }
    };
    double s_prev = 0.0, v_prev = 0.0;
    for (int k = -160; k <= 160; ++k) {
        const double s = std::pow(10.0, k / 20.0);
        const double val = complementary_numeric(A, s);
        if (!(val > 0.0) || !std::isfinite(val)) continue;
        if (s_prev > 0.0) refine(refine, s_prev, v_prev, s, val, 0);
        push(s, val);
        s_prev = s;
        v_prev = val;
    }
    YoungFunction out = YoungFunction::custom(std::move(t), std::move(v));
    std::lock_guard lock(mu);
    cache.emplace(key, out);
    return out;
}

double young_inverse(const YoungFunction& A, double t) {
    if (t < 0.0) throw std::invalid_argument("young_inverse: t must be non-negative");
    if (t == 0.0) return 0.0;
    double lo = 1.0, hi = 1.0;
    while (A(hi) < t) hi *= 2.0;
    while (A(lo) >= t) lo *= 0.5;
    double a = std::log(lo), b = std::log(hi);
    for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
        const double m = 0.5 * (a + b);
        (A(std::exp(m)) < t ? a : b) = m;
    }
    return std::exp(0.5 * (a + b));
}

// ---------------------------------------------------------------------------
// Cube norms

CubeWindow window_of(const Grid& g, const DyadicCube& q) { return {lower_corner(g, q), side_cells(g, q)}; }

double orlicz_norm(std::span<const double> v, const YoungFunction& A) {
    if (v.empty()) return 0.0;
    double vmax = 0.0;
    for (double x : v) vmax = std::max(vmax, std::abs(x));
    if (vmax == 0.0) return 0.0;
    const double n = static_cast<double>(v.size());
    if (auto pp = A.pure_power()) {
        const auto [c, q] = *pp;
        double acc = 0.0;
        for (double x : v) acc += std::pow(std::abs(x) / vmax, q);
        return vmax * std::pow(c * acc / n, 1.0 / q);
    }
    auto mean_a = [&](double lambda) {
        double acc = 0.0;
        for (double x : v) acc += A(std::abs(x) / lambda);
        return acc / n;
    };
    double hi = vmax;
    double g_hi = mean_a(hi);
    while (g_hi > 1.0) {
        hi *= 2.0;
        g_hi = mean_a(hi);
    }
    double lo = hi;
    double g_lo = g_hi;
    while (g_lo <= 1.0) {
        lo *= 0.5;
        g_lo = mean_a(lo);
        if (lo < 1e-300) return 0.0;
    }
    // Illinois iteration on h(x) = log mean A(|v| e^{-x}), bracketed; h decreasing.
    double xa = std::log(lo), xb = std::log(hi);
    double ha = std::log(g_lo), hb = g_hi > 0.0 ? std::log(g_hi) : -745.0;
    int side = 0;
    for (int it = 0; it < 200 && xb - xa > 1e-11; ++it) {
        double x = (xa * hb - xb * ha) / (hb - ha);
        if (!(x > xa && x < xb) || it % 8 == 7) x = 0.5 * (xa + xb);
        const double gx = mean_a(std::exp(x));
        const double hx = gx > 0.0 ? std::log(gx) : -745.0;
        if (hx == 0.0) return std::exp(x);
        if (hx > 0.0) {
            xa = x;
            ha = hx;
            if (side == -1) hb *= 0.5;
            side = -1;
        } else {
            xb = x;
            hb = hx;
            if (side == 1) ha *= 0.5;
            side = 1;
        }
    }
    return std::exp(0.5 * (xa + xb));
}

namespace {

void gather(const GridFunction& f, const CubeWindow& q, std::vector<double>& buf) {
    const Grid& g = f.grid();
    buf.clear();
    if (g.dim() == 1) {
        for (int i = 0; i < q.side; ++i) buf.push_back(std::abs(f[q.lo[0] + i]));
    } else {
        for (int i = 0; i < q.side; ++i)
            for (int j = 0; j < q.side; ++j) buf.push_back(std::abs(f[g.flat(q.lo[0] + i, q.lo[1] + j)]));
    }
}

void check_window(const Grid& g, const CubeWindow& q) {
    const int n = g.cells_per_side();
    if (q.side < 1 || q.lo[0] < 0 || q.lo[0] + q.side > n ||
        (g.dim() == 2 && (q.lo[1] < 0 || q.lo[1] + q.side > n)))
        throw std::invalid_argument("cube window outside the grid");
}

}  // namespace

double orlicz_norm(const GridFunction& f, const CubeWindow& q, const YoungFunction& A) {
    check_window(f.grid(), q);
    std::vector<double> buf;
    gather(f, q, buf);
    return orlicz_norm(buf, A);
}

double orlicz_norm(const GridFunction& f, const DyadicCube& q, const YoungFunction& A) {
    return orlicz_norm(f, window_of(f.grid(), q), A);
}

// ---------------------------------------------------------------------------
// Maximal functions

Eigen::ArrayXd maximal_on_cube(const Eigen::ArrayXd& values, int dim, int side) {
    const Index n = side;
    const Eigen::ArrayXd v = values.abs();
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(v.size());
    detail::SlidingMax q(static_cast<std::size_t>(n));
    if (dim == 1) {
        std::vector<double> s(static_cast<std::size_t>(n + 1), 0.0), avg(static_cast<std::size_t>(n)),
            cover(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) s[i + 1] = s[i] + v[i];
        for (Index len = 1; len <= n; ++len) {
            const Index count = n - len + 1;
            const double inv = 1.0 / static_cast<double>(len);
            for (Index i = 0; i < count; ++i) avg[i] = (s[i + len] - s[i]) * inv;
            detail::window_cover_max(avg, count, len, n, cover, q);
            for (Index x = 0; x < n; ++x) out[x] = std::max(out[x], cover[x]);
        }
        return out;
    }
    const Index m = n + 1;
    std::vector<double> s(static_cast<std::size_t>(m * m), 0.0);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            s[(i + 1) * m + j + 1] = v[i * n + j] + s[i * m + j + 1] + s[(i + 1) * m + j] - s[i * m + j];
    std::vector<double> avg(static_cast<std::size_t>(n * n)), rows(static_cast<std::size_t>(n * n)),
        line(static_cast<std::size_t>(n)), col(static_cast<std::size_t>(n)), colout(static_cast<std::size_t>(n));
    for (Index len = 1; len <= n; ++len) {
        const Index count = n - len + 1;
        const double inv = 1.0 / static_cast<double>(len * len);
        for (Index i = 0; i < count; ++i)
            for (Index j = 0; j < count; ++j)
                avg[i * n + j] = (s[(i + len) * m + j + len] - s[i * m + j + len] - s[(i + len) * m + j] +
                                  s[i * m + j]) * inv;
        // cover along the second axis for each window row i
        for (Index i = 0; i < count; ++i) {
            const double* row = avg.data() + i * n;
            detail::window_cover_max(row, count, len, n, line, q);
            std::copy(line.begin(), line.end(), rows.begin() + i * n);
        }
        // then along the first axis for each output column y
        for (Index y = 0; y < n; ++y) {
            for (Index i = 0; i < count; ++i) col[i] = rows[i * n + y];
            detail::window_cover_max(col, count, len, n, colout, q);
            for (Index x = 0; x < n; ++x) out[x * n + y] = std::max(out[x * n + y], colout[x]);
        }
    }
    return out;
}

GridFunction maximal(const GridFunction& f) {
    const Grid& g = f.grid();
    return {g, maximal_on_cube(f.values(), g.dim(), g.cells_per_side())};
}

GridFunction maximal_r(const GridFunction& f, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("maximal_r: r must be positive");
    if (r == 1.0) return maximal(f);
    return maximal(f.pow(r)).map([r](double x) { return std::pow(x, 1.0 / r); });
}

std::vector<int> pruned_window_lengths(int n) {
    std::vector<int> out;
    for (int p = 1; p <= n; p *= 2)
        for (int len : {p - 1, p, p + 1})
            if (len >= 1 && len <= n) out.push_back(len);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

std::vector<int> window_positions(int n, int len) {
    const int step = std::max(1, len / 4);
    std::vector<int> pos;
    for (int i = 0; i + len <= n; i += step) pos.push_back(i);
    if (pos.back() != n - len) pos.push_back(n - len);
    return pos;
}

}  // namespace

GridFunction maximal_orlicz_pruned(const GridFunction& f, const YoungFunction& A) {
    const Grid& g = f.grid();
    const int n = g.cells_per_side();
    GridFunction out(g, 0.0);
    const auto pp = A.pure_power();
    std::optional<PrefixSums> sums;
    if (pp) sums.emplace(g, f.values().abs().pow(pp->second));
    std::vector<double> buf;
    for (int len : pruned_window_lengths(n)) {
        const auto pos = window_positions(n, len);
        const double cells = g.dim() == 1 ? len : static_cast<double>(len) * len;
        auto norm_at = [&](int i0, int i1) {
            if (pp) return std::pow(pp->first * sums->cube(i0, i1, len) / cells, 1.0 / pp->second);
            gather(f, CubeWindow{{i0, i1}, len}, buf);
            return orlicz_norm(buf, A);
        };
        if (g.dim() == 1) {
            for (int i : pos) {
                const double val = norm_at(i, 0);
                for (int x = i; x < i + len; ++x) out[x] = std::max(out[x], val);
            }
        } else {
            for (int i : pos)
                for (int j : pos) {
                    const double val = norm_at(i, j);
                    for (int x = i; x < i + len; ++x)
                        for (int y = j; y < j + len; ++y) {
                            const Index k = g.flat(x, y);
                            out[k] = std::max(out[k], val);
                        }
                }
        }
    }
    return out;
}

GridFunction maximal_pruned(const GridFunction& f) { return maximal_orlicz_pruned(f, YoungFunction::power(1.0)); }

GridFunction maximal_orlicz(const GridFunction& f, const YoungFunction& A) {
    if (auto pp = A.pure_power()) {
        const auto [c, q] = *pp;
        return std::pow(c, 1.0 / q) * maximal_r(f, q);
    }
    return maximal_orlicz_pruned(f, A);
}

GridFunction maximal(const GridFunction& f, const MaximalSpec& spec) {
    return std::visit(
        [&](const auto& s) -> GridFunction {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Lebesgue>) return maximal(f);
            else if constexpr (std::is_same_v<S, double>) return maximal_r(f, s);
            else return maximal_orlicz(f, s);
        },
        spec);
}

GridFunction iterated_maximal(const GridFunction& w, int k) {
    if (k < 1) throw std::invalid_argument("iterated_maximal: k must be >= 1");
    GridFunction out = maximal(w);
    for (int i = 1; i < k; ++i) out = maximal(out);
    return out;
}

GridFunction iterated_maximal(const Weight& w, int k) { return iterated_maximal(w.function(), k); }

// ---------------------------------------------------------------------------
// B_p integral

namespace {

// 16-point Gauss-Legendre on [a, b]
template <typename Fn>
double gauss16(Fn&& fn, double a, double b) {
    static constexpr std::array<double, 8> x{0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                             0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                             0.9445750230732326, 0.9894009349916499};
    static constexpr std::array<double, 8> w{0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                             0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                             0.0622535239386479, 0.0271524594117541};
    const double m = 0.5 * (a + b), h = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < 8; ++i) acc += w[i] * (fn(m - h * x[i]) + fn(m + h * x[i]));
    return acc * h;
}

}  // namespace

double beta_p(const YoungFunction& A, double p, double c_lower) {
    if (!(p > 1.0)) throw std::invalid_argument("beta_p: p must exceed 1");
    if (!(c_lower >= 1.0)) throw std::invalid_argument("beta_p: lower limit must be >= 1");
    // substitute t = e^u: int_{log c}^inf A(e^u) e^{-p u} du
    auto integrand = [&](double u) { return A(std::exp(u)) * std::exp(-p * u); };
    const double u0 = std::log(c_lower);
    constexpr double panel = 0.25;
    double sum = 0.0;
    double u = u0;
    std::vector<double> checkpoints;  // partial sums at span 64 * 2^k
    double next_check = 64.0;
    while (true) {
        const double piece = gauss16(integrand, u, u + panel);
        sum += piece;
        u += panel;
        if (!std::isfinite(sum)) return kInf;
        if (sum > 0.0 && piece <= 1e-14 * sum) return sum;
        if (u - u0 >= next_check) {
            checkpoints.push_back(sum);
            next_check *= 2.0;
            const std::size_t k = checkpoints.size();
            if (k >= 4) {
                const double i1 = checkpoints[k - 3] - checkpoints[k - 4];
                const double i2 = checkpoints[k - 2] - checkpoints[k - 3];
                const double i3 = checkpoints[k - 1] - checkpoints[k - 2];
                if (i2 >= 0.99 * i1 && i3 >= 0.99 * i2) return kInf;
                if (u - u0 >= 65536.0) {
                    const double ratio = i3 / i2;
                    return ratio < 1.0 ? sum + i3 * ratio / (1.0 - ratio) : kInf;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------

double holder_defect(const GridFunction& f, const GridFunction& g, const DyadicCube& q, const YoungFunction& A,
                     const YoungFunction& A_bar) {
    require_same_grid(f.grid(), g.grid(), "holder_defect");
    const double nf = orlicz_norm(f, q, A);
    const double ng = orlicz_norm(g, q, A_bar);
    if (nf == 0.0 || ng == 0.0) return 0.0;
    return average((f * g).abs(), q) / (nf * ng);
}

double holder_defect(const GridFunction& f, const GridFunction& g, const DyadicCube& q, const YoungFunction& A) {
    return holder_defect(f, g, q, A, complementary_function(A));
}

double lorentz_logl_norm(std::span<const double> omega, double q, double sphere_measure) {
    if (!(q > 1.0)) throw std::invalid_argument("lorentz_logl_norm: q must exceed 1");
    if (!(sphere_measure > 0.0)) throw std::invalid_argument("lorentz_logl_norm: sphere measure must be positive");
    if (omega.empty()) return 0.0;
    std::vector<double> v;
    v.reserve(omega.size());
    for (double x : omega) v.push_back(std::abs(x));
    std::sort(v.begin(), v.end(), std::greater<>());
    const double mu = sphere_measure / static_cast<double>(v.size());
    auto antiderivative = [](double t) {
        const double e = std::exp(1.0) + t;
        return e * std::log(e) - e;
    };
    // on (v[k], v[k-1]) the distribution equals k * mu
    double acc = 0.0;
    for (std::size_t k = 1; k <= v.size(); ++k) {
        const double upper = v[k - 1];
        const double lower = k < v.size() ? v[k] : 0.0;
        if (upper <= lower) continue;
        acc += std::pow(static_cast<double>(k) * mu, 1.0 / q) * (antiderivative(upper) - antiderivative(lower));
    }
    return q * acc;
}

}  // namespace sparsedom
