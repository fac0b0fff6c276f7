#pragma once

// Experiment configuration, input corpora, the sweep runner and report comparison.

#include "sparsedom/analysis.hpp"
#include "sparsedom/io.hpp"
#include "sparsedom/weights.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sparsedom::experiments {

inline constexpr const char* kVersion = "0.3.0";

/// Names accepted as experiments (everything but `compare`).
const std::vector<std::string>& experiment_names();

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct WeightFamily {
    std::vector<double> powers;         // |x|^a
    int random_count = 0;               // random A_1 weights, seeds random_seed .. random_seed + count - 1
    std::uint64_t random_seed = 1;
    double random_delta = 0.5;
    std::vector<double> adversarial;    // eps': (M delta_0)^{1 - eps'}
    std::vector<std::filesystem::path> files;  // grid files, resampled to each resolution
};

struct FunctionFamily {
    std::string kind = "bumps";  // bumps | steps | edge_spike | mixed
    int count = 3;
    std::vector<std::filesystem::path> files;  // appended after the generated ones
};

struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 1;
    int dim = 1;
    double side_length = 4.0;
    std::vector<int> resolutions;
    io::json kernel;
    WeightFamily weights;
    FunctionFamily functions;
    std::vector<double> p, q, r, delta, s, eps, lambda, v_powers;
    std::optional<io::json> young;
    int family_size = 8;
    int rdf_terms = 20;
    bool export_families = false;
    std::filesystem::path family_fixture;
    std::filesystem::path base_dir;
    /// Merged configuration tree the fields were read from.
    io::json resolved;

    [[nodiscard]] std::string hash() const;
};

/// Overrides from the command line, applied on top of the file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::map<std::string, std::vector<double>> lists;  // "p", "q", "resolutions", ...
    std::vector<std::string> assignments;               // "grid.side_length=8"
};

/// Defaults for `experiment`, then the YAML or JSON `text` (may be empty), then `ov`.
/// Errors read "source:line: key: message". Relative paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& experiment, const std::string& text, const std::string& source,
                              const Overrides& ov = {}, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::string& experiment, const std::optional<std::filesystem::path>& path,
                             const Overrides& ov = {});

struct NamedWeight {
    std::string id;
    Weight w;
    bool a1_type = false;  // member of A_1 by construction
};
std::vector<NamedWeight> make_weights(const Grid& grid, const WeightFamily& spec);

struct NamedFunction {
    std::uint64_t id = 0;
    GridFunction f;
};
/// Non-negative inputs supported in the central half of the box; the shapes
/// depend on (seed, id) only, not on the resolution.
std::vector<NamedFunction> make_functions(const Grid& grid, const FunctionFamily& spec, std::uint64_t seed);

struct RunResult {
    std::vector<RatioReport> reports;
    std::vector<io::json> constants;                       // one weight report per row (constants only)
    std::vector<std::pair<std::string, io::json>> families;  // exported sparse families
    std::map<std::string, std::uint64_t> diagnostics;
};

RunResult run(const ExperimentConfig& cfg, int threads = 1);

/// JSON lines, one row per report (or weight report), each stamped with the experiment and config hash.
std::string jsonl(const ExperimentConfig& cfg, const RunResult& res);
std::string csv(const ExperimentConfig& cfg, const RunResult& res);
/// Writes <experiment>.jsonl, <experiment>.csv, manifest.json and families/ under `dir`.
void write_outputs(const ExperimentConfig& cfg, const RunResult& res, const std::filesystem::path& dir,
                   double wall_seconds, int threads);

struct Drift {
    std::string key;
    int n_a = 0, n_b = 0;
    double a = 0.0, b = 0.0;
    double drift = 0.0;
};
struct Comparison {
    std::string experiment;
    std::vector<Drift> rows;
    std::vector<std::string> unmatched;
    double max_drift = 0.0;
    [[nodiscard]] bool within(double tol) const { return unmatched.empty() && max_drift <= tol; }
};
/// Rows are matched on everything but N; several resolutions of one key pair up in order of N.
Comparison compare_reports(const std::string& jsonl_a, const std::string& jsonl_b);
Comparison compare_files(const std::filesystem::path& a, const std::filesystem::path& b);

/// fn(i) for i in [0, n) on at most `threads` workers; the first failure by index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    std::vector<std::exception_ptr> errors(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace sparsedom::experiments
