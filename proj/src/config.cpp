#include "sparsedom/experiments.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace sparsedom::experiments {

namespace {

using io::json;

// Where each key path ("grid.side_length", "p[1]") came from: > 0 file line, 0 command line.
using LineMap = std::map<std::string, int>;

json base_defaults() {
    return json{{"seed", 1},
                {"grid", {{"dim", 1}, {"side_length", 4.0}, {"resolutions", {1024, 2048}}}},
                {"kernel", {{"kind", "hilbert"}}},
                {"weights",
                 {{"powers", {0.0, 0.3, -0.3, 0.6, -0.6, 0.9, -0.9}},
                  {"random", 10},
                  {"random_seed", 1},
                  {"random_delta", 0.5},
                  {"adversarial", json::array()}}},
                {"functions", {{"kind", "bumps"}, {"count", 3}}},
                {"family_size", 8},
                {"rdf_terms", 20},
                {"export_families", false}};
}

json experiment_defaults(const std::string& e) {
    if (e == "constants") return {{"p", {1.5, 2.0, 3.0, 4.0}}};
    if (e == "dominate") return {{"s", {2.0}}};
    if (e == "cf") return {{"p", {1.5, 2.0, 3.0}}};
    if (e == "bump") return {{"p", {2.0}}, {"delta", {1.0, 0.5, 0.25, 0.125, 0.0625}}};
    if (e == "iterated") return {{"p", {1.5, 2.5}}};
    if (e == "weak11") return json::object();
    if (e == "sawyer") return {{"v_powers", {0.0, 0.3, -0.3}}};
    if (e == "vector") return {{"p", {1.5}}, {"q", {2.0}}};
    if (e == "sparse-r") return {{"p", {2.5, 3.0, 4.0}}, {"r", {1.5, 2.0}}, {"young", {{"kind", "power_log"}, {"delta", 1.0}}}};
    if (e == "goodlambda")
        return {{"eps", {0.5, 0.25, 0.125, 0.0625}}, {"functions", {{"kind", "edge_spike"}, {"count", 3}}}};
    if (e == "rdf") return {{"p", {1.25, 1.5, 2.0, 4.0}}};
    throw ConfigError("unknown experiment '" + e + "'");
}

const std::set<std::string> kTopKeys{"experiment", "seed",  "grid",  "kernel",   "weights",     "functions",
                                     "p",          "q",     "r",     "delta",    "s",           "eps",
                                     "lambda",     "v_powers", "young", "family_size", "rdf_terms",
                                     "export_families", "family_fixture"};
const std::map<std::string, std::set<std::string>> kNestedKeys{
    {"grid", {"dim", "side_length", "resolutions"}},
    {"weights", {"powers", "random", "random_seed", "random_delta", "adversarial", "files"}},
    {"functions", {"kind", "count", "files"}}};

json scalar_of(const YAML::Node& n) {
    const std::string& text = n.Scalar();
    if (n.Tag() == "!") return text;  // quoted
    if (text == "~" || text == "null" || text.empty()) return nullptr;
    if (text == "true" || text == "True") return true;
    if (text == "false" || text == "False") return false;
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    return text;
}

json to_tree(const YAML::Node& n, const std::string& path, LineMap& lines) {
    if (!path.empty()) lines[path] = n.Mark().line + 1;
    switch (n.Type()) {
        case YAML::NodeType::Map: {
            json out = json::object();
            for (const auto& kv : n) {
                const std::string key = kv.first.as<std::string>();
                out[key] = to_tree(kv.second, path.empty() ? key : path + "." + key, lines);
            }
            return out;
        }
        case YAML::NodeType::Sequence: {
            json out = json::array();
            for (std::size_t i = 0; i < n.size(); ++i)
                out.push_back(to_tree(n[i], path + "[" + std::to_string(i) + "]", lines));
            return out;
        }
        case YAML::NodeType::Scalar: return scalar_of(n);
        default: return nullptr;
    }
}

void merge(json& into, const json& from) {
    for (const auto& [k, v] : from.items()) {
        if (v.is_object() && into.contains(k) && into[k].is_object() && k != "kernel" && k != "young")
            merge(into[k], v);
        else
            into[k] = v;
    }
}

class Reader {
public:
    Reader(const json& tree, const LineMap& lines, std::string source)
        : tree_(tree), lines_(lines), source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        // report the nearest recorded ancestor of the path
        std::string p = path;
        for (;;) {
            if (auto it = lines_.find(p); it != lines_.end()) {
                if (it->second == 0) throw ConfigError("command line: " + path + ": " + msg);
                throw ConfigError(source_ + ":" + std::to_string(it->second) + ": " + path + ": " + msg);
            }
            const auto cut = p.find_last_of(".[");
            if (cut == std::string::npos) break;
            p = p.substr(0, cut);
        }
        throw ConfigError(source_ + ": " + path + ": " + msg);
    }

    const json* find(const std::string& path) const {
        const json* node = &tree_;
        std::stringstream ss(path);
        std::string part;
        while (std::getline(ss, part, '.')) {
            if (!node->is_object() || !node->contains(part)) return nullptr;
            node = &(*node)[part];
        }
        return node;
    }

    const json& at(const std::string& path) const {
        const json* n = find(path);
        if (!n) fail(path, "missing");
        return *n;
    }

    double number(const std::string& path) const {
        const json& n = at(path);
        if (!n.is_number()) fail(path, "expected a number");
        return n.get<double>();
    }

    long long integer(const std::string& path) const {
        const json& n = at(path);
        if (!n.is_number_integer()) fail(path, "expected an integer");
        return n.get<long long>();
    }

    bool boolean(const std::string& path) const {
        const json& n = at(path);
        if (!n.is_boolean()) fail(path, "expected true or false");
        return n.get<bool>();
    }

    std::string string(const std::string& path) const {
        const json& n = at(path);
        if (!n.is_string()) fail(path, "expected a string");
        return n.get<std::string>();
    }

    std::vector<std::string> strings(const std::string& path) const {
        const json* n = find(path);
        if (!n || n->is_null()) return {};
        if (n->is_string()) return {n->get<std::string>()};
        if (!n->is_array()) fail(path, "expected a list of strings");
        std::vector<std::string> out;
        for (std::size_t i = 0; i < n->size(); ++i) {
            if (!(*n)[i].is_string()) fail(path + "[" + std::to_string(i) + "]", "expected a string");
            out.push_back((*n)[i].get<std::string>());
        }
        return out;
    }

    std::vector<double> numbers(const std::string& path) const {
        const json* n = find(path);
        if (!n || n->is_null()) return {};
        if (n->is_number()) return {n->get<double>()};
        if (!n->is_array()) fail(path, "expected a list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < n->size(); ++i) {
            if (!(*n)[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back((*n)[i].get<double>());
        }
        return out;
    }

private:
    const json& tree_;
    const LineMap& lines_;
    std::string source_;
};

void check_keys(const json& tree, const Reader& rd) {
    for (const auto& [k, v] : tree.items()) {
        if (!kTopKeys.count(k)) rd.fail(k, "unknown key");
        if (auto it = kNestedKeys.find(k); it != kNestedKeys.end()) {
            if (!v.is_object()) rd.fail(k, "expected a mapping");
            for (const auto& [kk, vv] : v.items())
                if (!it->second.count(kk)) rd.fail(k + "." + kk, "unknown key");
        }
    }
}

void require_nonempty(const Reader& rd, const std::vector<double>& v, const std::string& key) {
    if (v.empty()) rd.fail(key, "exponent list must be non-empty");
}

template <typename Pred>
void require_each(const Reader& rd, const std::vector<double>& v, const std::string& key, Pred ok, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!ok(v[i])) rd.fail(key + "[" + std::to_string(i) + "]", what);
}

ExperimentConfig interpret(const std::string& experiment, const json& tree, const LineMap& lines,
                           const std::string& source, const std::filesystem::path& base_dir) {
    const Reader rd(tree, lines, source);
    check_keys(tree, rd);
    ExperimentConfig c;
    c.experiment = experiment;
    c.base_dir = base_dir;
    c.resolved = tree;
    c.resolved["experiment"] = experiment;
    const long long seed = rd.integer("seed");
    if (seed < 0) rd.fail("seed", "must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);

    c.dim = static_cast<int>(rd.integer("grid.dim"));
    if (c.dim != 1 && c.dim != 2) rd.fail("grid.dim", "must be 1 or 2");
    c.side_length = rd.number("grid.side_length");
    if (!(c.side_length > 0.0)) rd.fail("grid.side_length", "must be positive");
    const auto res = rd.numbers("grid.resolutions");
    if (res.empty()) rd.fail("grid.resolutions", "list must be non-empty");
    for (std::size_t i = 0; i < res.size(); ++i) {
        const double n = res[i];
        if (n != std::floor(n) || !is_power_of_two(static_cast<long long>(n)) || n < 8 || n > (c.dim == 1 ? 1 << 16 : 1 << 10))
            rd.fail("grid.resolutions[" + std::to_string(i) + "]", "must be a power of two in [8, " +
                                                                   std::to_string(c.dim == 1 ? 1 << 16 : 1 << 10) + "]");
        c.resolutions.push_back(static_cast<int>(n));
    }

    c.kernel = rd.at("kernel");
    if (!c.kernel.is_object() || !c.kernel.contains("kind")) rd.fail("kernel", "expected a mapping with 'kind'");
    try {
        const KernelSpec K = io::kernel_from_json(c.kernel, c.base_dir);
        if (K.dim() != c.dim && experiment != "constants")
            rd.fail("kernel", "kernel dimension " + std::to_string(K.dim()) + " does not match grid.dim");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        rd.fail("kernel", e.what());
    }

    c.weights.powers = rd.numbers("weights.powers");
    const long long rc = rd.integer("weights.random");
    if (rc < 0) rd.fail("weights.random", "must be non-negative");
    c.weights.random_count = static_cast<int>(rc);
    c.weights.random_seed = static_cast<std::uint64_t>(rd.integer("weights.random_seed"));
    c.weights.random_delta = rd.number("weights.random_delta");
    if (!(c.weights.random_delta > 0.0 && c.weights.random_delta < 1.0))
        rd.fail("weights.random_delta", "must lie in (0, 1)");
    c.weights.adversarial = rd.numbers("weights.adversarial");
    require_each(rd, c.weights.adversarial, "weights.adversarial", [](double e) { return e > 0.0 && e < 1.0; },
                 "must lie in (0, 1)");
    require_each(rd, c.weights.powers, "weights.powers", [&](double a) { return a > -c.dim && a < 4.0 * c.dim; },
                 "power weight exponent out of range");

    c.functions.kind = rd.string("functions.kind");
    if (c.functions.kind != "bumps" && c.functions.kind != "steps" && c.functions.kind != "edge_spike" &&
        c.functions.kind != "mixed")
        rd.fail("functions.kind", "must be one of bumps, steps, edge_spike, mixed");
    auto grid_files = [&](const std::string& key) {
        std::vector<std::filesystem::path> out;
        const auto names = rd.strings(key);
        for (std::size_t i = 0; i < names.size(); ++i) {
            std::filesystem::path path = names[i];
            if (path.is_relative()) path = c.base_dir / path;
            const std::string at = key + "[" + std::to_string(i) + "]";
            try {
                const GridFunction f = io::load_grid(path);
                if (f.grid().dim() != c.dim || f.grid().side_length() != c.side_length)
                    rd.fail(at, "grid file dimension or side length differs from the grid section");
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                rd.fail(at, e.what());
            }
            out.push_back(path);
        }
        return out;
    };
    c.weights.files = grid_files("weights.files");
    c.functions.files = grid_files("functions.files");
    c.functions.count = static_cast<int>(rd.integer("functions.count"));
    if (c.functions.count < 0 || (c.functions.count == 0 && c.functions.files.empty()))
        rd.fail("functions.count", "must be at least 1 unless functions.files is given");

    c.p = rd.numbers("p");
    c.q = rd.numbers("q");
    c.r = rd.numbers("r");
    c.delta = rd.numbers("delta");
    c.s = rd.numbers("s");
    c.eps = rd.numbers("eps");
    c.lambda = rd.numbers("lambda");
    c.v_powers = rd.numbers("v_powers");
    if (const json* y = rd.find("young"); y && !y->is_null()) {
        if (!y->is_object()) rd.fail("young", "expected a mapping");
        c.young = *y;
        try {
            io::young_from_json(*y, 2.0);
        } catch (const std::exception& e) {
            rd.fail("young", e.what());
        }
    }
    c.family_size = static_cast<int>(rd.integer("family_size"));
    if (c.family_size < 1) rd.fail("family_size", "must be at least 1");
    c.rdf_terms = static_cast<int>(rd.integer("rdf_terms"));
    if (c.rdf_terms < 1 || c.rdf_terms > 60) rd.fail("rdf_terms", "must lie in [1, 60]");
    c.export_families = rd.boolean("export_families");
    if (rd.find("family_fixture")) {
        c.family_fixture = rd.string("family_fixture");
        if (c.family_fixture.is_relative()) c.family_fixture = c.base_dir / c.family_fixture;
    }

    auto gt = [](double lo) { return [lo](double x) { return x > lo && std::isfinite(x); }; };
    const std::string& e = experiment;
    const bool weighted = e != "dominate" && e != "goodlambda";
    if (weighted && c.weights.powers.empty() && c.weights.random_count == 0 && c.weights.adversarial.empty() &&
        c.weights.files.empty())
        rd.fail("weights", "the weight family is empty");
    if (e == "constants" || e == "cf" || e == "bump" || e == "iterated" || e == "vector" || e == "sparse-r" ||
        e == "rdf") {
        require_nonempty(rd, c.p, "p");
        require_each(rd, c.p, "p", gt(e == "cf" || e == "vector" ? 0.0 : 1.0),
                     e == "cf" || e == "vector" ? "must be positive" : "must exceed 1");
    }
    if (e == "bump") {
        if (c.delta.empty() && c.r.empty()) rd.fail("delta", "exponent list must be non-empty");
        require_each(rd, c.delta, "delta", gt(0.0), "must be positive");
        require_each(rd, c.r, "r", gt(1.0), "must exceed 1");
    }
    if (e == "vector") {
        require_nonempty(rd, c.q, "q");
        require_each(rd, c.q, "q", gt(0.0), "must be positive");
    }
    if (e == "sparse-r") {
        require_nonempty(rd, c.r, "r");
        require_each(rd, c.r, "r", [](double r) { return r >= 1.0 && std::isfinite(r); }, "must be at least 1");
        bool any = false;
        for (double p : c.p)
            for (double r : c.r) any = any || p > r;
        if (!any) rd.fail("r", "no exponent pair with p > r");
    }
    if (e == "dominate") {
        require_nonempty(rd, c.s, "s");
        require_each(rd, c.s, "s", gt(1.0), "must exceed 1");
    }
    if (e == "goodlambda") {
        require_nonempty(rd, c.eps, "eps");
        require_each(rd, c.eps, "eps", [](double x) { return x > 0.0 && x < 1.0; }, "must lie in (0, 1)");
        require_each(rd, c.lambda, "lambda", gt(0.0), "must be positive");
    }
    if (e == "sawyer") {
        require_nonempty(rd, c.v_powers, "v_powers");
        require_each(rd, c.v_powers, "v_powers", [&](double a) { return a > -c.dim && a < 4.0 * c.dim; },
                     "power weight exponent out of range");
    }
    if (e == "weak11" || e == "sawyer") {
        bool any = c.weights.random_count > 0 || !c.weights.adversarial.empty();
        for (double a : c.weights.powers) any = any || a <= 0.0;
        if (!any) rd.fail("weights", "needs at least one A_1 weight (power a <= 0, random or adversarial)");
    }
    return c;
}

json parse_assignment(const std::string& a, std::string& path) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("command line: --set " + a + ": expected key=value");
    path = a.substr(0, eq);
    YAML::Node n;
    try {
        n = YAML::Load(a.substr(eq + 1));
    } catch (const YAML::Exception& e) {
        throw ConfigError("command line: --set " + a + ": " + e.msg);
    }
    if (!n.IsScalar()) throw ConfigError("command line: --set " + a + ": only scalar fields can be set");
    return scalar_of(n);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"constants", "dominate", "cf",      "bump",       "iterated", "weak11",
                                                "sawyer",    "vector",   "sparse-r", "goodlambda", "rdf"};
    return names;
}

std::string ExperimentConfig::hash() const {
    const nlohmann::json sorted = nlohmann::json::parse(resolved.dump());  // keys sorted
    return io::hex64(io::fnv1a64(sorted.dump()));
}

ExperimentConfig parse_config(const std::string& experiment, const std::string& text, const std::string& source,
                              const Overrides& ov, const std::filesystem::path& base_dir) {
    json tree = base_defaults();
    merge(tree, experiment_defaults(experiment));
    LineMap lines;
    if (!text.empty()) {
        YAML::Node root;
        try {
            root = YAML::Load(text);
        } catch (const YAML::ParserException& e) {
            throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
        }
        if (root.IsDefined() && !root.IsNull()) {
            if (!root.IsMap()) throw ConfigError(source + ":1: the configuration must be a mapping");
            const json file = to_tree(root, "", lines);
            if (file.contains("experiment")) {
                if (!file["experiment"].is_string() || file["experiment"].get<std::string>() != experiment)
                    throw ConfigError(source + ":" + std::to_string(lines["experiment"]) +
                                      ": experiment: file is for '" + file["experiment"].dump() + "', not '" +
                                      experiment + "'");
            }
            merge(tree, file);
        }
    }
    if (ov.seed) {
        tree["seed"] = *ov.seed;
        lines["seed"] = 0;
    }
    for (const auto& [key, values] : ov.lists) {
        json arr = json::array();
        for (double v : values) {
            if (key == "resolutions" && v == std::floor(v))
                arr.push_back(static_cast<long long>(v));
            else
                arr.push_back(v);
        }
        if (key == "resolutions") {
            tree["grid"]["resolutions"] = arr;
            lines["grid.resolutions"] = 0;
        } else {
            tree[key] = arr;
            lines[key] = 0;
        }
    }
    for (const auto& a : ov.assignments) {
        std::string path;
        json value = parse_assignment(a, path);
        json* node = &tree;
        std::stringstream ss(path);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(ss, part, '.')) parts.push_back(part);
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
            if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object())
                throw ConfigError("command line: --set " + a + ": no such section '" + parts[i] + "'");
            node = &(*node)[parts[i]];
        }
        (*node)[parts.back()] = value;
        lines[path] = 0;
    }
    return interpret(experiment, tree, lines, source, base_dir);
}

ExperimentConfig load_config(const std::string& experiment, const std::optional<std::filesystem::path>& path,
                             const Overrides& ov) {
    if (!path) return parse_config(experiment, "", "<defaults>", ov);
    std::ifstream is(*path);
    if (!is) throw ConfigError(path->string() + ": cannot open configuration");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(experiment, ss.str(), path->string(), ov, path->parent_path());
}

}  // namespace sparsedom::experiments
