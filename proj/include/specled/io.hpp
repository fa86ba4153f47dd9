#pragma once

// Spectral CSV, bank/problem/solution JSON, and the bundled fixture tree.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specled/evaluate.hpp"
#include "specled/led.hpp"
#include "specled/metamer.hpp"
#include "specled/spectral.hpp"

namespace specled::io {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Reflectance samples this far outside [0, 1] are clamped with a warning;
/// anything further out is a RangeError.
inline constexpr double reflectance_slack = 1e-9;

/// Collected non-fatal diagnostics (e.g. clamped samples).
using Warnings = std::vector<std::string>;

// CSV: header `wavelength_nm,value`, ascending uniformly spaced wavelengths,
// LF line endings, 9 significant digits on output.
Spectrum load_spectrum_csv(const fs::path &path);
Reflectance load_reflectance_csv(const fs::path &path, Warnings *warnings = nullptr);
Spectrum parse_spectrum_csv(const std::string &text, const std::string &source = "<csv>");
Reflectance parse_reflectance_csv(const std::string &text, const std::string &source = "<csv>",
                                  Warnings *warnings = nullptr);
std::string format_csv(const SpectralGrid &grid, const Eigen::VectorXd &values);
void save_csv(const fs::path &path, const SpectralGrid &grid, const Eigen::VectorXd &values);

/// Header `wavelength_nm,xbar,ybar,zbar`. Rejects tables whose ȳ peak is not
/// within 550-560 nm.
ColorMatcher load_matcher_csv(const fs::path &path);
ColorMatcher parse_matcher_csv(const std::string &text, const std::string &source = "<csv>");

Json grid_to_json(const SpectralGrid &grid);
SpectralGrid grid_from_json(const Json &j);

Json bank_to_json(const LedBank &bank);
LedBank bank_from_json(const Json &j);
LedBank load_bank_json(const fs::path &path);
void save_bank_json(const fs::path &path, const LedBank &bank);

Json params_to_json(const SolveParams &params);
SolveParams params_from_json(const Json &j);

Json solution_to_json(const SolveSolution &s);
SolveSolution solution_from_json(const Json &j);
/// Canonical text form; CLI files and HTTP bodies are byte-identical.
std::string format_solution(const SolveSolution &s);
void save_solution(const fs::path &path, const SolveSolution &s);
SolveSolution load_solution(const fs::path &path);

/// Relative paths inside `j` resolve against `base_dir`. Every spectral
/// input is resampled onto the bank grid.
SolveProblem problem_from_json(const Json &j, const fs::path &base_dir, Warnings *warnings = nullptr);
SolveProblem load_problem(const fs::path &path, Warnings *warnings = nullptr);

Json report_to_json(const EffectReport &report);
Json swatches_to_json(const std::vector<SwatchRow> &rows);

/// $SPECLED_FIXTURES_DIR, else the bundled data directory.
fs::path fixtures_dir();
fs::path default_matcher_path();

/// Relative paths of bundled banks, materials and problems.
Json fixtures_index(const fs::path &dir);

Json parse_json_text(const std::string &text, const std::string &source);
std::string read_text_file(const fs::path &path);

} // namespace specled::io
