#include "sparsedom/experiments.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>

namespace ex = sparsedom::experiments;

namespace {

struct Options {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out = "out";
    std::map<std::string, std::vector<double>> lists;
    std::vector<std::string> sets;
    bool quiet = false;
};

constexpr const char* kListFlags[] = {"p", "q", "r", "delta", "s", "eps", "lambda", "v-powers"};

void add_run_options(CLI::App* app, Options& o) {
    app->add_option("--config", o.config, "YAML or JSON experiment file");
    app->add_option("--seed", o.seed, "RNG seed");
    app->add_option("--threads", o.threads, "worker threads (default: SPARSEDOM_THREADS or 1)");
    app->add_option("--out", o.out, "output directory")->capture_default_str();
    for (const char* name : kListFlags)
        app->add_option(std::string("--") + name, o.lists[name], std::string("override the ") + name + " list");
    app->add_option("--N", o.lists["resolutions"], "override the resolutions list");
    app->add_option("--set", o.sets, "scalar override KEY=VALUE, e.g. grid.side_length=8");
    app->add_flag("--quiet", o.quiet, "no summary on stdout");
}

int thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SPARSEDOM_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring SPARSEDOM_THREADS=" << env << "\n";
    }
    return 1;
}

int run_experiment(const std::string& name, const Options& o) {
    ex::Overrides ov;
    ov.seed = o.seed;
    for (const auto& [k, v] : o.lists)
        if (!v.empty()) ov.lists[k == "v-powers" ? "v_powers" : k] = v;
    ov.assignments = o.sets;
    ex::ExperimentConfig cfg;
    try {
        cfg = ex::load_config(name, o.config ? std::optional<std::filesystem::path>(*o.config) : std::nullopt, ov);
    } catch (const ex::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    const int threads = thread_count(o.threads);
    const auto t0 = std::chrono::steady_clock::now();
    const ex::RunResult res = ex::run(cfg, threads);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ex::write_outputs(cfg, res, o.out, wall, threads);
    if (o.quiet) return 0;
    if (name == "constants") {
        for (const auto& row : res.constants) std::cout << row.dump() << "\n";
    } else {
        std::size_t sentinels = 0;
        for (const auto& r : res.reports) sentinels += !r.ok();
        std::cout << name << ": " << res.reports.size() << " reports (" << sentinels << " sentinel) in " << wall
                  << " s -> " << o.out << "\n";
    }
    return 0;
}

int run_compare(const std::string& a, const std::string& b, double tol, bool verbose) {
    ex::Comparison c;
    try {
        c = ex::compare_files(a, b);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cout << "experiment " << c.experiment << ": " << c.rows.size() << " pairs, max drift "
              << sparsedom::io::format_double(c.max_drift) << " (tolerance " << sparsedom::io::format_double(tol)
              << ")\n";
    for (const auto& d : c.rows)
        if (verbose || d.drift > tol)
            std::cout << (d.drift > tol ? "DRIFT " : "      ") << d.key << " N " << d.n_a << "->" << d.n_b << ": "
                      << sparsedom::io::format_double(d.a) << " -> " << sparsedom::io::format_double(d.b) << " ("
                      << sparsedom::io::format_double(d.drift) << ")\n";
    for (const auto& u : c.unmatched) std::cout << "UNMATCHED " << u << "\n";
    return c.within(tol) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dyadic sparse-domination experiment runner"};
    app.set_version_flag("--version", ex::kVersion);
    app.require_subcommand(1);

    Options opts;
    std::string chosen;
    for (const auto& name : ex::experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        add_run_options(sub, opts);
        sub->callback([&chosen, name] { chosen = name; });
    }
    auto* run = app.add_subcommand("run", "run the named experiment");
    std::string run_name;
    run->add_option("experiment", run_name, "experiment name")->required()->check(CLI::IsMember(ex::experiment_names()));
    add_run_options(run, opts);
    run->callback([&] { chosen = run_name; });

    auto* cmp = app.add_subcommand("compare", "per-key ratio drift between two JSONL reports");
    std::string file_a, file_b;
    double tolerance = 0.3;
    bool verbose = false;
    cmp->add_option("report_a", file_a)->required()->check(CLI::ExistingFile);
    cmp->add_option("report_b", file_b)->required()->check(CLI::ExistingFile);
    cmp->add_option("--tolerance", tolerance, "largest accepted relative drift")->capture_default_str();
    cmp->add_flag("-v,--verbose", verbose, "print every pair");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (cmp->parsed()) return run_compare(file_a, file_b, tolerance, verbose);
        return run_experiment(chosen, opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
