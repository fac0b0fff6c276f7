#pragma once

// Serialisation of grid functions, sparse families, Young and kernel specs and
// ratio reports.
//
// Grid function CSV: first line "dim,cells_per_side,side_length", second line
// the three values, then one cell value per line in row-major order.
// Grid function binary (.sdgf): "SDGF", uint32 version (1), int32 dim,
// int32 cells_per_side, float64 side_length, then the cell values as
// little-endian float64 in row-major order.

#include "sparsedom/analysis.hpp"
#include "sparsedom/weights.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace sparsedom::io {

using json = nlohmann::ordered_json;

/// Shortest decimal text that reads back to the same double ("nan", "inf", "-inf" otherwise).
std::string format_double(double x);

void write_grid_csv(std::ostream& os, const GridFunction& f);
GridFunction read_grid_csv(std::istream& is);
void write_grid_binary(std::ostream& os, const GridFunction& f);
GridFunction read_grid_binary(std::istream& is);
/// Format chosen by extension: ".csv" or ".sdgf".
void save_grid(const std::filesystem::path& path, const GridFunction& f);
GridFunction load_grid(const std::filesystem::path& path);
/// Onto `target` (same dim and side length): block averages when coarser, cell copies when finer.
GridFunction resample(const GridFunction& f, const Grid& target);

/// {"grid": {...}, "eta": .., "cubes": [{"level", "index", "eta_local"}]}.
json to_json(const SparseFamily& S);
/// Cubes only; major subsets are not stored, so the family is for form evaluation.
SparseFamily family_from_json(const json& j);

/// {"kind":"power_log","p":2,"delta":0.25} and friends. `default_p` fills a missing "p".
YoungFunction young_from_json(const json& j, std::optional<double> default_p = std::nullopt);
json to_json(const YoungFunction& A);

/// Rows "angle,value" (radians); resampled to `samples` points by nearest angle.
std::vector<double> read_omega_csv(const std::filesystem::path& path, int samples);
/// {"kind":"hilbert"}, {"kind":"rough_omega","dim":2,"omega":[..]} or
/// {"kind":"rough_omega","omega_csv":"path","sphere_samples":256}, {"kind":"bochner_riesz","xi_max":2}.
/// Relative CSV paths resolve against `base`.
KernelSpec kernel_from_json(const json& j, const std::filesystem::path& base = {});

/// name,p,r_or_delta_or_q,weight_id,seed,N,numerator,denominator,ratio
std::string csv_header();
std::string csv_row(const RatioReport& r);
json to_json(const RatioReport& r);
RatioReport report_from_json(const json& j);

/// {"ap": {"2": ..}, "a1": .., "ainf": .., "rh_delta": ..}
json to_json(const WeightReport& r);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace sparsedom::io
