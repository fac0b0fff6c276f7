#include "sparsedom/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <istream>
#include <ostream>
#include <sstream>

namespace sparsedom::io {

namespace {

std::runtime_error io_error(const std::string& what) { return std::runtime_error("io: " + what); }

double parse_double(const std::string& text, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw io_error(where + ": not a number: '" + text + "'");
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) throw io_error(where + ": trailing characters in '" + text + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

template <typename T>
void put(std::ostream& os, T v) {
    static_assert(std::endian::native == std::endian::little, "binary grid format assumes a little-endian host");
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw io_error("binary grid: truncated input");
    return v;
}

double number_or_nan(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_grid_csv(std::ostream& os, const GridFunction& f) {
    const Grid& g = f.grid();
    os << "dim,cells_per_side,side_length\n"
       << g.dim() << ',' << g.cells_per_side() << ',' << format_double(g.side_length()) << '\n';
    for (Index k = 0; k < f.size(); ++k) os << format_double(f[k]) << '\n';
}

GridFunction read_grid_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "dim,cells_per_side,side_length")
        throw io_error("grid csv: missing header line 'dim,cells_per_side,side_length'");
    if (!std::getline(is, line)) throw io_error("grid csv: missing grid parameters");
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw io_error("grid csv line 2: expected three fields");
    const Grid g = make_grid(std::stoi(fields[0]), std::stoi(fields[1]), parse_double(fields[2], "grid csv line 2"));
    GridFunction f(g, 0.0);
    for (Index k = 0; k < g.size(); ++k) {
        if (!std::getline(is, line)) throw io_error("grid csv: expected " + std::to_string(g.size()) + " values");
        f[k] = parse_double(line, "grid csv line " + std::to_string(k + 3));
    }
    while (std::getline(is, line))
        if (!line.empty()) throw io_error("grid csv: more values than cells");
    return f;
}

void write_grid_binary(std::ostream& os, const GridFunction& f) {
    const Grid& g = f.grid();
    os.write("SDGF", 4);
    put<std::uint32_t>(os, 1);
    put<std::int32_t>(os, g.dim());
    put<std::int32_t>(os, g.cells_per_side());
    put<double>(os, g.side_length());
    for (Index k = 0; k < f.size(); ++k) put<double>(os, f[k]);
}

GridFunction read_grid_binary(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "SDGF", 4) != 0) throw io_error("binary grid: bad magic");
    if (get<std::uint32_t>(is) != 1) throw io_error("binary grid: unsupported version");
    const int dim = get<std::int32_t>(is);
    const int n = get<std::int32_t>(is);
    const double L = get<double>(is);
    GridFunction f(make_grid(dim, n, L), 0.0);
    for (Index k = 0; k < f.size(); ++k) f[k] = get<double>(is);
    if (is.peek() != std::char_traits<char>::eof()) throw io_error("binary grid: trailing bytes");
    return f;
}

void save_grid(const std::filesystem::path& path, const GridFunction& f) {
    const bool csv = path.extension() == ".csv";
    std::ofstream os(path, csv ? std::ios::out : std::ios::binary);
    if (!os) throw io_error("cannot write " + path.string());
    csv ? write_grid_csv(os, f) : write_grid_binary(os, f);
}

GridFunction load_grid(const std::filesystem::path& path) {
    const bool csv = path.extension() == ".csv";
    std::ifstream is(path, csv ? std::ios::in : std::ios::binary);
    if (!is) throw io_error("cannot read " + path.string());
    return csv ? read_grid_csv(is) : read_grid_binary(is);
}

GridFunction resample(const GridFunction& f, const Grid& target) {
    const Grid& g = f.grid();
    if (g.dim() != target.dim() || g.side_length() != target.side_length())
        throw std::invalid_argument("resample: dimension or side length differs");
    const int n = g.cells_per_side(), m = target.cells_per_side();
    if (n == m) return f;
    GridFunction out(target, 0.0);
    if (n > m) {
        const int b = n / m;
        const double share = 1.0 / (g.dim() == 1 ? b : static_cast<double>(b) * b);
        for (Index k = 0; k < f.size(); ++k) {
            const auto c = g.unflat(k);
            out[g.dim() == 1 ? target.flat(c[0] / b) : target.flat(c[0] / b, c[1] / b)] += share * f[k];
        }
    } else {
        const int b = m / n;
        for (Index k = 0; k < out.size(); ++k) {
            const auto c = target.unflat(k);
            out[k] = f[g.dim() == 1 ? g.flat(c[0] / b) : g.flat(c[0] / b, c[1] / b)];
        }
    }
    return out;
}

json to_json(const SparseFamily& S) {
    json cubes = json::array();
    for (std::size_t k = 0; k < S.size(); ++k) {
        const auto& q = S.cubes[k];
        const double local = k < S.major_subsets.size()
                                 ? static_cast<double>(S.major_subsets[k].size()) / static_cast<double>(cell_count(S.grid, q))
                                 : std::numeric_limits<double>::quiet_NaN();
        json idx = S.grid.dim() == 1 ? json::array({q.index[0]}) : json::array({q.index[0], q.index[1]});
        cubes.push_back({{"level", q.level}, {"index", idx}, {"eta_local", number_or_null(local)}});
    }
    return {{"grid", {{"dim", S.grid.dim()}, {"cells_per_side", S.grid.cells_per_side()}, {"side_length", S.grid.side_length()}}},
            {"eta", S.eta},
            {"cubes", cubes}};
}

SparseFamily family_from_json(const json& j) {
    const auto& gj = j.at("grid");
    SparseFamily S;
    S.grid = make_grid(gj.at("dim").get<int>(), gj.at("cells_per_side").get<int>(), gj.at("side_length").get<double>());
    S.eta = j.value("eta", 0.5);
    for (const auto& c : j.at("cubes")) {
        DyadicCube q;
        q.level = c.at("level").get<int>();
        const auto& idx = c.at("index");
        if (static_cast<int>(idx.size()) != S.grid.dim()) throw io_error("sparse family: index arity must match dim");
        q.index[0] = idx[0].get<int>();
        if (S.grid.dim() == 2) q.index[1] = idx[1].get<int>();
        const int per_side = 1 << q.level;
        if (q.level < 0 || q.level > S.grid.depth() || q.index[0] < 0 || q.index[0] >= per_side || q.index[1] < 0 ||
            q.index[1] >= (S.grid.dim() == 2 ? per_side : 1))
            throw io_error("sparse family: cube outside the lattice");
        S.cubes.push_back(q);
    }
    return S;
}

YoungFunction young_from_json(const json& j, std::optional<double> default_p) {
    const std::string kind = j.at("kind").get<std::string>();
    auto p_of = [&] {
        if (j.contains("p")) return j.at("p").get<double>();
        if (default_p) return *default_p;
        throw io_error("young function '" + kind + "': missing p");
    };
    if (kind == "power") return YoungFunction::power(p_of());
    if (kind == "power_log") return YoungFunction::power_log(p_of(), j.at("delta").get<double>());
    if (kind == "power_r") return YoungFunction::power_r(p_of(), j.at("r").get<double>());
    if (kind == "scaled_power") return YoungFunction::scaled_power(j.at("q").get<double>(), j.value("c", 1.0));
    if (kind == "custom")
        return YoungFunction::custom(j.at("t").get<std::vector<double>>(), j.at("values").get<std::vector<double>>());
    throw io_error("unknown young function kind '" + kind + "'");
}

json to_json(const YoungFunction& A) {
    using K = YoungFunction::Kind;
    switch (A.kind()) {
        case K::power: return {{"kind", "power"}, {"p", A.p()}};
        case K::power_log: return {{"kind", "power_log"}, {"p", A.p()}, {"delta", A.delta()}};
        case K::power_r: return {{"kind", "power_r"}, {"p", A.p()}, {"r", A.r()}};
        default: return {{"kind", "other"}, {"describe", A.describe()}};
    }
}

std::vector<double> read_omega_csv(const std::filesystem::path& path, int samples) {
    if (samples < 4) throw io_error("omega csv: sphere_samples must be at least 4");
    std::ifstream is(path);
    if (!is) throw io_error("cannot read " + path.string());
    std::vector<std::pair<double, double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto f = split(line, ',');
        if (f.size() != 2) throw io_error(path.string() + ":" + std::to_string(lineno) + ": expected 'angle,value'");
        if (lineno == 1 && f[0] == "angle") continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        double a = std::fmod(parse_double(f[0], where), 2.0 * std::numbers::pi);
        if (a < 0.0) a += 2.0 * std::numbers::pi;
        rows.emplace_back(a, parse_double(f[1], where));
    }
    if (rows.empty()) throw io_error(path.string() + ": no samples");
    std::vector<double> out(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) {
        const double a = 2.0 * std::numbers::pi * k / samples;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [ang, val] : rows) {
            double d = std::abs(ang - a);
            d = std::min(d, 2.0 * std::numbers::pi - d);
            if (d < best) {
                best = d;
                out[k] = val;
            }
        }
    }
    return out;
}

KernelSpec kernel_from_json(const json& j, const std::filesystem::path& base) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "hilbert") return KernelSpec::hilbert();
    if (kind == "bochner_riesz") return KernelSpec::bochner_riesz(j.value("xi_max", 2.0), j.value("unsafe_1d", false));
    if (kind != "rough_omega") throw io_error("unknown kernel kind '" + kind + "'");
    const int dim = j.value("dim", 2);
    if (j.contains("omega_csv")) {
        std::filesystem::path p = j.at("omega_csv").get<std::string>();
        if (p.is_relative()) p = base / p;
        return KernelSpec::rough_omega(dim, read_omega_csv(p, j.value("sphere_samples", 256)));
    }
    return KernelSpec::rough_omega(dim, j.at("omega").get<std::vector<double>>());
}

std::string csv_header() { return "name,p,r_or_delta_or_q,weight_id,seed,N,numerator,denominator,ratio"; }

std::string csv_row(const RatioReport& r) {
    std::string id = r.weight_id;
    if (id.find_first_of(",\"\n") != std::string::npos) {
        std::string quoted = "\"";
        for (char c : id) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
        id = quoted + "\"";
    }
    return r.name + ',' + format_double(r.p) + ',' + format_double(r.aux) + ',' + id + ',' + std::to_string(r.seed) +
           ',' + std::to_string(r.N) + ',' + format_double(r.numerator) + ',' + format_double(r.denominator) + ',' +
           format_double(r.ratio);
}

json to_json(const RatioReport& r) {
    json meta = json::object();
    for (const auto& [k, v] : r.meta) meta[k] = number_or_null(v);
    return {{"name", r.name},
            {"p", number_or_null(r.p)},
            {"aux", number_or_null(r.aux)},
            {"weight_id", r.weight_id},
            {"seed", r.seed},
            {"N", r.N},
            {"dim", r.dim},
            {"numerator", number_or_null(r.numerator)},
            {"denominator", number_or_null(r.denominator)},
            {"ratio", number_or_null(r.ratio)},
            {"sentinel", to_string(r.sentinel)},
            {"meta", meta}};
}

RatioReport report_from_json(const json& j) {
    RatioReport r;
    r.name = j.at("name").get<std::string>();
    r.p = number_or_nan(j.at("p"));
    r.aux = number_or_nan(j.at("aux"));
    r.weight_id = j.at("weight_id").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.N = j.at("N").get<int>();
    r.dim = j.value("dim", 1);
    r.numerator = number_or_nan(j.at("numerator"));
    r.denominator = number_or_nan(j.at("denominator"));
    r.ratio = number_or_nan(j.at("ratio"));
    const std::string s = j.value("sentinel", "none");
    for (Sentinel c : {Sentinel::none, Sentinel::zero_denominator, Sentinel::non_finite, Sentinel::infinite_a1,
                       Sentinel::bump_condition})
        if (s == to_string(c)) r.sentinel = c;
    if (j.contains("meta"))
        for (const auto& [k, v] : j.at("meta").items()) r.meta[k] = number_or_nan(v);
    return r;
}

json to_json(const WeightReport& r) {
    json ap = json::object();
    for (const auto& [p, v] : r.ap) ap[format_double(p)] = number_or_null(v);
    return {{"ap", ap}, {"a1", number_or_null(r.a1)}, {"ainf", number_or_null(r.ainf)}, {"rh_delta", number_or_null(r.rh_delta)}};
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) h = (h ^ c) * 1099511628211ULL;
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace sparsedom::io
