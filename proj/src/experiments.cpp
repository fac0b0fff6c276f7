#include "sparsedom/experiments.hpp"

#include "sparsedom/diagnostics.hpp"
#include "sparsedom/random.hpp"

#include <fstream>
#include <sstream>

namespace sparsedom::experiments {

namespace {

using io::json;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + (k + 1) * 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 31;
    return z * 0x94D049BB133111EBULL;
}

using Box = std::array<double, 4>;  // x0, x1, y0, y1

double in_box(const Box& b, double x, double y, int dim) {
    return x > b[0] && x < b[1] && (dim == 1 || (y > b[2] && y < b[3])) ? 1.0 : 0.0;
}

GridFunction bump_function(const Grid& g, Rng& rng) {
    const double q = 0.25 * g.side_length();
    const double rad = q * rng.uniform(0.25, 0.6);
    const double cx = rng.uniform(-(q - rad), q - rad);
    const double cy = g.dim() == 2 ? rng.uniform(-(q - rad), q - rad) : 0.0;
    const double amp = rng.uniform(0.5, 2.0) * std::exp(1.0);
    return GridFunction::sample(g, [&](double x, double y) {
        const double r2 = ((x - cx) * (x - cx) + (g.dim() == 2 ? (y - cy) * (y - cy) : 0.0)) / (rad * rad);
        return r2 < 1.0 ? amp * std::exp(-1.0 / (1.0 - r2)) : 0.0;
    });
}

Box random_box(Rng& rng, double q) {
    Box b{};
    for (int a = 0; a < 2; ++a) {
        const double lo = rng.uniform(-q, 0.6 * q);
        b[2 * a] = lo;
        b[2 * a + 1] = std::min(q, lo + rng.uniform(0.1 * q, 0.6 * q));
    }
    return b;
}

GridFunction step_function(const Grid& g, Rng& rng) {
    const double q = 0.25 * g.side_length();
    std::vector<std::pair<Box, double>> pieces;
    for (int k = 0; k < 3; ++k) {
        const Box b = random_box(rng, q);
        pieces.emplace_back(b, rng.uniform(0.5, 2.0));
    }
    return GridFunction::sample(g, [&](double x, double y) {
        double v = 0.0;
        for (const auto& [b, level] : pieces) v += level * in_box(b, x, y, g.dim());
        return v;
    });
}

// Indicator with a sharp edge plus a one-cell spike away from it.
GridFunction edge_spike_function(const Grid& g, Rng& rng) {
    const double q = 0.25 * g.side_length();
    const Box b{rng.uniform(-0.8 * q, -0.4 * q), rng.uniform(0.1 * q, 0.5 * q), -0.5 * q, 0.5 * q};
    const double sx = rng.uniform(-0.95 * q, -0.88 * q);
    const double h = g.cell_width();
    return GridFunction::sample(g, [&](double x, double y) {
        const bool spike = std::abs(x - sx) < 0.5 * h && (g.dim() == 1 || std::abs(y + 0.9 * q) < 0.5 * h);
        return in_box(b, x, y, g.dim()) + (spike ? 50.0 : 0.0);
    });
}

struct Level {
    Grid grid;
    DyadicLattice lattice;
    std::vector<NamedWeight> weights;
    std::vector<NamedFunction> fs;
    std::vector<GridFunction> Tf, Mf;
    std::vector<double> ainf, a1;
};

using Task = std::function<std::vector<RatioReport>()>;

RatioReport stamped(RatioReport r, const std::string& weight_id, std::uint64_t fid) {
    r.weight_id = weight_id;
    r.seed = fid;
    return r;
}

double conjugate(double p) { return p / (p - 1.0); }

std::map<std::string, std::uint64_t> diagnostics_snapshot() {
    const auto& d = diagnostics();
    return {{"weight_clamps", d.weight_clamps.load()},
            {"support_warnings", d.support_warnings.load()},
            {"omega_mean_corrections", d.omega_mean_corrections.load()},
            {"fft_imaginary_warnings", d.fft_imaginary_warnings.load()}};
}

void add_tasks(const ExperimentConfig& c, const KernelSpec& K, const Level& L, std::vector<Task>& tasks,
               std::vector<std::pair<std::string, json>>& families, std::mutex& families_mu,
               const std::optional<SparseFamily>& fixture) {
    const std::string& e = c.experiment;
    const std::size_t nf = L.fs.size(), nw = L.weights.size();

    if (e == "dominate") {
        for (std::size_t i = 0; i < nf; ++i)
            for (double s : c.s)
                tasks.push_back([&, i, s] {
                    const GridFunction& f = L.fs[i].f;
                    const GridFunction& g = L.Tf[i];
                    const bool use_fixture = fixture && fixture->grid.dim() == L.grid.dim() &&
                                             fixture->grid.cells_per_side() == L.grid.cells_per_side() &&
                                             fixture->grid.side_length() == L.grid.side_length();
                    const SparseFamily S = use_fixture ? *fixture
                                                       : principal_pair_family(f, g, Weight::unit(L.grid), L.lattice, s);
                    RatioReport r = make_ratio("dominate", std::abs(inner(L.Tf[i], g)),
                                               conjugate(s) * sparse_form(f, g, S, s), L.grid);
                    r.aux = s;
                    r.meta["family_size"] = static_cast<double>(S.size());
                    if (!use_fixture) r.meta["eta_verified"] = verify_sparse(S).worst_eta;
                    if (c.export_families && !use_fixture) {
                        std::ostringstream name;
                        name << "N" << L.grid.cells_per_side() << "_f" << L.fs[i].id << "_s" << io::format_double(s)
                             << ".json";
                        std::lock_guard lock(families_mu);
                        families.emplace_back(name.str(), io::to_json(S));
                    }
                    return std::vector{stamped(r, "unit", L.fs[i].id)};
                });
        return;
    }
    if (e == "goodlambda") {
        for (std::size_t i = 0; i < nf; ++i)
            tasks.push_back([&, i] {
                const GridFunction& Tf = L.Tf[i];
                const GridFunction& Mf = L.Mf[i];
                std::vector<double> lams = c.lambda;
                const bool automatic = lams.empty();
                if (automatic) {
                    // the level with the largest joint set at the coarsest eps
                    const double eps_max = *std::max_element(c.eps.begin(), c.eps.end());
                    double best = -1.0, best_lam = 0.0;
                    for (int k = 1; k < 40; ++k) {
                        const double lam = Tf.max_abs() / 3.0 * k / 40.0;
                        const auto m = good_lambda_measure(Tf, Mf, lam, eps_max);
                        if (m.rhs_M > 0.0 && m.lhs > best) {
                            best = m.lhs;
                            best_lam = lam;
                        }
                    }
                    lams = {best_lam > 0.0 ? best_lam : Tf.max_abs() / 3.0};
                }
                std::vector<RatioReport> out;
                for (double lam : lams)
                    for (double eps : c.eps) {
                        const auto m = good_lambda_measure(Tf, Mf, lam, eps);
                        RatioReport r = make_ratio("goodlambda", m.lhs, m.rhs_M, L.grid);
                        r.aux = eps;
                        r.meta["lambda"] = lam;
                        r.meta["lambda_auto"] = automatic ? 1.0 : 0.0;
                        out.push_back(stamped(r, "lebesgue", L.fs[i].id));
                    }
                return out;
            });
        return;
    }

    for (std::size_t w = 0; w < nw; ++w) {
        const NamedWeight& W = L.weights[w];
        if ((e == "weak11" || e == "sawyer") && !W.a1_type) continue;
        if (e == "bump") {
            for (double p : c.p) {
                std::vector<YoungFunction> bumps;
                for (double d : c.delta) bumps.push_back(YoungFunction::power_log(p, d));
                for (double r : c.r) bumps.push_back(YoungFunction::power_r(p, r));
                for (const auto& A : bumps)
                    tasks.push_back([&, w, p, A] {
                        const Weight mw = bump_weight(L.weights[w].w, A, p);
                        std::vector<RatioReport> out;
                        for (std::size_t i = 0; i < L.fs.size(); ++i)
                            out.push_back(stamped(two_weight_bump_ratio(L.fs[i].f, L.Tf[i], L.weights[w].w, mw, p, A),
                                                  L.weights[w].id, L.fs[i].id));
                        return out;
                    });
            }
            continue;
        }
        if (e == "sparse-r") {
            for (double p : c.p)
                tasks.push_back([&, w, p] {
                    const YoungFunction A = c.young ? io::young_from_json(*c.young, p) : YoungFunction::power_log(p, 1.0);
                    const Weight mw = bump_weight(L.weights[w].w, A, p);
                    std::vector<RatioReport> out;
                    for (std::size_t i = 0; i < L.fs.size(); ++i) {
                        const SparseFamily S = stopping_family(L.fs[i].f, L.lattice);
                        for (double r : c.r)
                            if (p > r)
                                out.push_back(stamped(sparse_r_two_weight_ratio(L.fs[i].f, L.weights[w].w, mw, p, r, A, S),
                                                      L.weights[w].id, L.fs[i].id));
                    }
                    return out;
                });
            continue;
        }
        if (e == "vector") {
            for (double p : c.p)
                for (double q : c.q)
                    tasks.push_back([&, w, p, q] {
                        std::vector<GridFunction> tfs, mfs;
                        for (std::size_t i = 0; i < L.fs.size(); ++i) {
                            tfs.push_back(L.Tf[i]);
                            mfs.push_back(L.Mf[i]);
                        }
                        return std::vector{stamped(vector_valued_ratio(tfs, mfs, L.weights[w].w, p, q), L.weights[w].id, 0)};
                    });
            continue;
        }
        for (std::size_t i = 0; i < nf; ++i) {
            const std::uint64_t fid = L.fs[i].id;
            if (e == "cf") {
                for (double p : c.p)
                    tasks.push_back([&, w, i, p, fid] {
                        const auto r = cf_ratio(L.Tf[i], L.Mf[i], L.weights[w].w, p, L.ainf[w]);
                        return std::vector{stamped(r.squared, L.weights[w].id, fid), stamped(r.linear, L.weights[w].id, fid)};
                    });
            } else if (e == "iterated") {
                for (double p : c.p)
                    tasks.push_back([&, w, i, p, fid] {
                        const auto r = iterated_ratio(L.fs[i].f, L.Tf[i], L.weights[w].w, p);
                        return std::vector{stamped(r.upper, L.weights[w].id, fid), stamped(r.lower, L.weights[w].id, fid)};
                    });
            } else if (e == "weak11") {
                tasks.push_back([&, w, i, fid] {
                    return std::vector{stamped(weak11_ratio(L.fs[i].f, L.Tf[i], L.weights[w].w, L.a1[w], L.ainf[w]),
                                               L.weights[w].id, fid)};
                });
            } else if (e == "sawyer") {
                for (double a : c.v_powers)
                    tasks.push_back([&, w, i, a, fid] {
                        const Weight v = power_weight(L.grid, a);
                        RatioReport r = sawyer_ratio(L.fs[i].f, L.weights[w].w, v, K);
                        r.aux = a;
                        r.meta["v_power"] = a;
                        return std::vector{stamped(r, L.weights[w].id + "|v=power:" + io::format_double(a), fid)};
                    });
            } else if (e == "rdf") {
                for (double p : c.p)
                    tasks.push_back([&, w, i, p, fid] {
                        const Weight& v = L.weights[w].w;
                        const GridFunction& h = L.fs[i].f;
                        std::vector<GridFunction> probes;
                        for (const auto& nfun : L.fs) probes.push_back(nfun.f);
                        const RdFResult res = rubio_de_francia(h, v, p, c.rdf_terms, probes);
                        const double excess = (res.Rh.values() - h.values()).minCoeff();
                        RatioReport norm = make_ratio("rdf_norm", lp_norm(res.Rh, v, p),
                                                      2.0 * lp_norm(h, v, p) * (1.0 + res.truncation_slack), L.grid);
                        RatioReport a1 = make_ratio("rdf_a1", res.a1_of_product, conjugate(p), L.grid);
                        for (auto* r : {&norm, &a1}) {
                            r->p = p;
                            r->meta["op_norm_S"] = res.op_norm_S;
                            r->meta["truncation_slack"] = res.truncation_slack;
                            r->meta["terms_used"] = res.terms_used;
                            r->meta["min_excess"] = excess;
                        }
                        return std::vector{stamped(norm, L.weights[w].id, fid), stamped(a1, L.weights[w].id, fid)};
                    });
            }
        }
    }
}

}  // namespace

std::vector<NamedWeight> make_weights(const Grid& grid, const WeightFamily& spec) {
    std::vector<NamedWeight> out;
    for (double a : spec.powers) out.push_back({"power:" + io::format_double(a), power_weight(grid, a), a <= 0.0});
    for (int k = 0; k < spec.random_count; ++k) {
        const std::uint64_t seed = spec.random_seed + static_cast<std::uint64_t>(k);
        out.push_back({"a1:" + std::to_string(seed), random_a1_weight(grid, seed, spec.random_delta), true});
    }
    for (double eps : spec.adversarial) {
        const std::vector<Atom> atom{{0.0, 0.0, 0.05 * std::pow(grid.side_length(), grid.dim()), 0.0}};
        out.push_back({"adv:" + io::format_double(eps), a1_weight_from_atoms(grid, atom, 1.0 - eps), true});
    }
    for (const auto& path : spec.files)
        out.push_back({"file:" + path.filename().string(), Weight(io::resample(io::load_grid(path), grid)), false});
    return out;
}

std::vector<NamedFunction> make_functions(const Grid& grid, const FunctionFamily& spec, std::uint64_t seed) {
    std::vector<NamedFunction> out;
    for (int k = 0; k < spec.count; ++k) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
        const bool even = k % 2 == 0;
        GridFunction f = spec.kind == "bumps"        ? bump_function(grid, rng)
                         : spec.kind == "steps"      ? step_function(grid, rng)
                         : spec.kind == "edge_spike" ? edge_spike_function(grid, rng)
                         : even                      ? bump_function(grid, rng)
                                                     : step_function(grid, rng);
        out.push_back({static_cast<std::uint64_t>(k), std::move(f)});
    }
    for (const auto& path : spec.files)
        out.push_back({out.size(), io::resample(io::load_grid(path), grid)});
    return out;
}

RunResult run(const ExperimentConfig& c, int threads) {
    const auto before = diagnostics_snapshot();
    RunResult res;
    const KernelSpec K = io::kernel_from_json(c.kernel, c.base_dir);
    std::optional<SparseFamily> fixture;
    if (!c.family_fixture.empty()) {
        std::ifstream is(c.family_fixture);
        if (!is) throw std::runtime_error("cannot read family fixture " + c.family_fixture.string());
        fixture = io::family_from_json(json::parse(is));
    }
    std::mutex families_mu;

    for (int n : c.resolutions) {
        const Grid g = make_grid(c.dim, n, c.side_length);
        Level L{g, DyadicLattice(g), {}, {}, {}, {}, {}, {}};
        const bool weighted = c.experiment != "dominate" && c.experiment != "goodlambda";
        if (weighted) L.weights = make_weights(g, c.weights);

        if (c.experiment == "constants") {
            std::vector<json> rows(L.weights.size());
            parallel_for(L.weights.size(), threads, [&](std::size_t w) {
                const auto rep = weight_report(L.weights[w].w, L.lattice, c.p);
                json improved = json::object();
                for (double p : c.p) {
                    const auto b = improved_ap_bounds(L.weights[w].w, L.lattice, p);
                    improved[io::format_double(p)] = {{"weak_power", b.weak_power}, {"strong_power", b.strong_power}, {"mixed", b.mixed}};
                }
                json row = {{"weight_id", L.weights[w].id}, {"N", n}, {"dim", c.dim}};
                const json body = io::to_json(rep);
                for (const auto& [k, v] : body.items()) row[k] = v;
                row["tau_calibrated"] = rep.tau_calibrated;
                row["improved"] = improved;
                rows[w] = std::move(row);
            });
            for (auto& r : rows) res.constants.push_back(std::move(r));
            continue;
        }

        L.fs = make_functions(g, c.functions, c.seed);
        if (c.experiment == "vector") {
            FunctionFamily fam = c.functions;
            fam.count = c.family_size;
            L.fs = make_functions(g, fam, c.seed);
        }
        L.Tf.resize(L.fs.size());
        L.Mf.resize(L.fs.size());
        parallel_for(L.fs.size(), threads, [&](std::size_t i) {
            if (c.experiment != "sawyer") L.Tf[i] = apply(K, L.fs[i].f);
            L.Mf[i] = maximal(L.fs[i].f);
        });
        const bool needs_constants = c.experiment == "cf" || c.experiment == "weak11";
        L.ainf.assign(L.weights.size(), 1.0);
        L.a1.assign(L.weights.size(), 1.0);
        if (needs_constants)
            parallel_for(L.weights.size(), threads, [&](std::size_t w) {
                L.ainf[w] = ainf_constant(L.weights[w].w, L.lattice);
                if (c.experiment == "weak11") L.a1[w] = a1_constant(L.weights[w].w);
            });

        std::vector<Task> tasks;
        add_tasks(c, K, L, tasks, res.families, families_mu, fixture);
        std::vector<std::vector<RatioReport>> out(tasks.size());
        parallel_for(tasks.size(), threads, [&](std::size_t t) { out[t] = tasks[t](); });
        for (auto& chunk : out)
            for (auto& r : chunk) res.reports.push_back(std::move(r));
    }
    std::sort(res.families.begin(), res.families.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const auto after = diagnostics_snapshot();
    for (const auto& [k, v] : after) res.diagnostics[k] = v - before.at(k);
    return res;
}

std::string jsonl(const ExperimentConfig& c, const RunResult& res) {
    const std::string hash = c.hash();
    std::string out;
    auto emit = [&](const json& body) {
        json row = {{"experiment", c.experiment}, {"config_hash", hash}};
        for (const auto& [k, v] : body.items()) row[k] = v;
        out += row.dump();
        out += '\n';
    };
    for (const auto& row : res.constants) emit(row);
    for (const auto& r : res.reports) emit(io::to_json(r));
    return out;
}

std::string csv(const ExperimentConfig& c, const RunResult& res) {
    std::string out;
    if (c.experiment == "constants") {
        out = "weight_id,N";
        for (double p : c.p) out += ",ap_" + io::format_double(p);
        out += ",a1,ainf,rh_delta\n";
        for (const auto& row : res.constants) {
            out += row["weight_id"].get<std::string>() + "," + std::to_string(row["N"].get<int>());
            for (double p : c.p) out += "," + io::format_double(row["ap"][io::format_double(p)].get<double>());
            for (const char* k : {"a1", "ainf", "rh_delta"})
                out += "," + (row[k].is_null() ? std::string("nan") : io::format_double(row[k].get<double>()));
            out += "\n";
        }
        return out;
    }
    out = io::csv_header() + "\n";
    for (const auto& r : res.reports) out += io::csv_row(r) + "\n";
    return out;
}

void write_outputs(const ExperimentConfig& c, const RunResult& res, const std::filesystem::path& dir,
                   double wall_seconds, int threads) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::filesystem::path& p, const std::string& text) {
        std::ofstream os(p, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + p.string());
        os << text;
    };
    write(dir / (c.experiment + ".jsonl"), jsonl(c, res));
    write(dir / (c.experiment + ".csv"), csv(c, res));
    if (!res.families.empty()) {
        std::filesystem::create_directories(dir / "families");
        for (const auto& [name, j] : res.families) write(dir / "families" / name, j.dump(1) + "\n");
    }
    json by_kind = json::object();
    std::size_t sentinels = 0;
    for (const auto& r : res.reports)
        if (!r.ok()) {
            ++sentinels;
            by_kind[to_string(r.sentinel)] = by_kind.value(to_string(r.sentinel), 0) + 1;
        }
    json diag = json::object();
    for (const auto& [k, v] : res.diagnostics) diag[k] = v;
    const json manifest = {{"experiment", c.experiment},
                           {"config_hash", c.hash()},
                           {"version", kVersion},
                           {"wall_time_s", wall_seconds},
                           {"threads", threads},
                           {"rows", res.reports.size() + res.constants.size()},
                           {"sentinels", {{"count", sentinels}, {"by_kind", by_kind}}},
                           {"diagnostics", diag},
                           {"config", c.resolved}};
    write(dir / "manifest.json", manifest.dump(2) + "\n");
}

namespace {

struct Keyed {
    std::string experiment;
    std::map<std::string, std::vector<std::pair<int, double>>> groups;
};

double value_of(const json& v) { return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>(); }

Keyed read_keyed(const std::string& text, const std::string& label) {
    Keyed k;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const std::exception& e) {
            throw std::invalid_argument(label + ":" + std::to_string(lineno) + ": not a JSON object");
        }
        const std::string exp = row.value("experiment", "");
        if (k.experiment.empty()) k.experiment = exp;
        if (exp != k.experiment) throw std::invalid_argument(label + ":" + std::to_string(lineno) + ": mixed experiments");
        const int n = row.value("N", 0);
        if (row.contains("name")) {
            const RatioReport r = io::report_from_json(row);
            const std::string key = r.name + "|p=" + io::format_double(r.p) + "|aux=" + io::format_double(r.aux) + "|" +
                                    r.weight_id + "|f=" + std::to_string(r.seed) + "|dim=" + std::to_string(r.dim);
            k.groups[key].emplace_back(n, r.ratio);
        } else {
            const std::string base = "constants|" + row.value("weight_id", "") + "|dim=" + std::to_string(row.value("dim", 1));
            for (const auto& [p, v] : row.at("ap").items()) k.groups[base + "|ap_" + p].emplace_back(n, value_of(v));
            for (const char* f : {"a1", "ainf"}) k.groups[base + "|" + f].emplace_back(n, value_of(row.at(f)));
        }
    }
    for (auto& [key, v] : k.groups) std::stable_sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.first < b.first; });
    return k;
}

double drift_of(double a, double b) {
    if (std::isnan(a) && std::isnan(b)) return 0.0;
    if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::infinity();
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

Comparison compare_reports(const std::string& jsonl_a, const std::string& jsonl_b) {
    const Keyed a = read_keyed(jsonl_a, "report A"), b = read_keyed(jsonl_b, "report B");
    if (a.experiment != b.experiment)
        throw std::invalid_argument("compare: mismatched experiments '" + a.experiment + "' and '" + b.experiment + "'");
    Comparison c;
    c.experiment = a.experiment;
    for (const auto& [key, va] : a.groups) {
        const auto it = b.groups.find(key);
        if (it == b.groups.end()) {
            c.unmatched.push_back("only in A: " + key);
            continue;
        }
        const auto& vb = it->second;
        for (std::size_t i = 0; i < std::max(va.size(), vb.size()); ++i) {
            if (i >= va.size() || i >= vb.size()) {
                c.unmatched.push_back("unpaired resolution: " + key);
                continue;
            }
            Drift d{key, va[i].first, vb[i].first, va[i].second, vb[i].second, drift_of(va[i].second, vb[i].second)};
            c.max_drift = std::max(c.max_drift, d.drift);
            c.rows.push_back(d);
        }
    }
    for (const auto& [key, vb] : b.groups)
        if (!a.groups.count(key)) c.unmatched.push_back("only in B: " + key);
    return c;
}

Comparison compare_files(const std::filesystem::path& a, const std::filesystem::path& b) {
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream is(p, std::ios::binary);
        if (!is) throw std::invalid_argument("compare: cannot read " + p.string());
        std::stringstream ss;
        ss << is.rdbuf();
        return ss.str();
    };
    return compare_reports(slurp(a), slurp(b));
}

}  // namespace sparsedom::experiments
