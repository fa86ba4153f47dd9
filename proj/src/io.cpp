#include "specled/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef SPECLED_DATA_DIR
#define SPECLED_DATA_DIR "data"
#endif

namespace specled::io {

namespace {

std::string at_line(const std::string &source, std::size_t line) {
    return source + ":" + std::to_string(line) + ": ";
}

double parse_number(std::string_view field, const std::string &source, std::size_t line) {
    while (!field.empty() && field.front() == ' ') {
        field.remove_prefix(1);
    }
    while (!field.empty() && field.back() == ' ') {
        field.remove_suffix(1);
    }
    double value = 0.0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || end != field.data() + field.size() || field.empty()) {
        throw Error(ErrorCode::ParseError,
                    at_line(source, line) + "expected a number, got '" + std::string(field) + "'");
    }
    if (!std::isfinite(value)) {
        throw Error(ErrorCode::ParseError, at_line(source, line) + "non-finite number");
    }
    return value;
}

struct Table {
    std::vector<double> wavelengths;
    std::vector<std::vector<double>> columns;
    std::vector<std::size_t> lines;
};

Table parse_table(const std::string &text, const std::string &source, const std::string &header) {
    std::istringstream in(text);
    std::string row;
    std::size_t line = 0;
    const std::size_t value_columns =
        static_cast<std::size_t>(std::count(header.begin(), header.end(), ','));

    Table table;
    table.columns.resize(value_columns);
    bool saw_header = false;
    while (std::getline(in, row)) {
        ++line;
        if (!row.empty() && row.back() == '\r') {
            row.pop_back();
        }
        if (!saw_header) {
            if (row != header) {
                throw Error(ErrorCode::ParseError,
                            at_line(source, line) + "expected header '" + header + "'");
            }
            saw_header = true;
            continue;
        }
        if (row.empty()) {
            continue;
        }
        std::vector<std::string_view> fields;
        std::string_view rest(row);
        for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
            fields.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        fields.push_back(rest);
        if (fields.size() != value_columns + 1) {
            throw Error(ErrorCode::ParseError, at_line(source, line) + "expected " +
                                                   std::to_string(value_columns + 1) + " fields, got " +
                                                   std::to_string(fields.size()));
        }
        const double wl = parse_number(fields[0], source, line);
        if (!table.wavelengths.empty() && !(wl > table.wavelengths.back())) {
            throw Error(ErrorCode::ParseError, at_line(source, line) + "wavelengths must be ascending");
        }
        table.wavelengths.push_back(wl);
        for (std::size_t c = 0; c < value_columns; ++c) {
            table.columns[c].push_back(parse_number(fields[c + 1], source, line));
        }
        table.lines.push_back(line);
    }
    if (!saw_header) {
        throw Error(ErrorCode::ParseError, source + ": empty file");
    }
    return table;
}

SpectralGrid table_grid(const Table &t, const std::string &source) {
    const auto &wl = t.wavelengths;
    if (wl.size() < 2) {
        throw Error(ErrorCode::GridError, source + ": need at least two samples");
    }
    const double step = (wl.back() - wl.front()) / static_cast<double>(wl.size() - 1);
    for (std::size_t i = 0; i < wl.size(); ++i) {
        if (std::abs(wl[i] - (wl.front() + static_cast<double>(i) * step)) > 1e-6 * step) {
            throw Error(ErrorCode::GridError,
                        at_line(source, t.lines[i]) + "wavelengths are not uniformly spaced");
        }
    }
    try {
        return SpectralGrid(wl.front(), step, wl.size());
    } catch (const Error &e) {
        throw Error(ErrorCode::GridError, source + ": " + e.what());
    }
}

Eigen::VectorXd to_vector(const std::vector<double> &v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

const Json &require(const Json &j, const char *key, const std::string &context) {
    if (!j.is_object() || !j.contains(key)) {
        throw Error(ErrorCode::SchemaError, context + ": missing field '" + key + "'");
    }
    return j.at(key);
}

template <typename T>
T get_as(const Json &j, const char *key, const std::string &context) {
    const Json &v = require(j, key, context);
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception &) {
        throw Error(ErrorCode::SchemaError, context + ": field '" + key + "' has the wrong type");
    }
}

Eigen::VectorXd number_array(const Json &j, const char *key, const std::string &context) {
    const auto values = get_as<std::vector<double>>(j, key, context);
    return to_vector(values);
}

Json vector_to_json(const Eigen::VectorXd &v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

std::string dump(const Json &j) { return j.dump(2) + "\n"; }

void write_text_file(const fs::path &path, const std::string &text, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
    }
}

fs::path resolve(const fs::path &base, const std::string &p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

} // namespace

std::string read_text_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Json parse_json_text(const std::string &text, const std::string &source) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw Error(ErrorCode::ParseError, source + ": " + e.what());
    }
}

// ---------------------------------------------------------------- CSV

Spectrum parse_spectrum_csv(const std::string &text, const std::string &source) {
    const Table t = parse_table(text, source, "wavelength_nm,value");
    const SpectralGrid grid = table_grid(t, source);
    for (std::size_t i = 0; i < t.columns[0].size(); ++i) {
        if (t.columns[0][i] < 0.0) {
            throw Error(ErrorCode::RangeError, at_line(source, t.lines[i]) + "negative spectral power");
        }
    }
    return Spectrum(grid, to_vector(t.columns[0]));
}

Reflectance parse_reflectance_csv(const std::string &text, const std::string &source,
                                  Warnings *warnings) {
    const Table t = parse_table(text, source, "wavelength_nm,value");
    const SpectralGrid grid = table_grid(t, source);
    std::vector<double> values = t.columns[0];
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (v >= 0.0 && v <= 1.0) {
            continue;
        }
        if (v < -reflectance_slack || v > 1.0 + reflectance_slack) {
            char msg[96];
            std::snprintf(msg, sizeof msg, "reflectance %.10g outside [0, 1]", v);
            throw Error(ErrorCode::RangeError, at_line(source, t.lines[i]) + msg);
        }
        values[i] = std::clamp(v, 0.0, 1.0);
        if (warnings) {
            char msg[96];
            std::snprintf(msg, sizeof msg, "reflectance %.12g clamped to [0, 1]", v);
            warnings->push_back(at_line(source, t.lines[i]) + msg);
        }
    }
    return Reflectance(grid, to_vector(values));
}

Spectrum load_spectrum_csv(const fs::path &path) {
    return parse_spectrum_csv(read_text_file(path), path.string());
}

Reflectance load_reflectance_csv(const fs::path &path, Warnings *warnings) {
    return parse_reflectance_csv(read_text_file(path), path.string(), warnings);
}

std::string format_csv(const SpectralGrid &grid, const Eigen::VectorXd &values) {
    std::string out = "wavelength_nm,value\n";
    char line[64];
    for (std::size_t i = 0; i < grid.count(); ++i) {
        std::snprintf(line, sizeof line, "%.9g,%.9g\n", grid.wavelength(i),
                      values[static_cast<Eigen::Index>(i)]);
        out += line;
    }
    return out;
}

void save_csv(const fs::path &path, const SpectralGrid &grid, const Eigen::VectorXd &values) {
    write_text_file(path, format_csv(grid, values), true);
}

ColorMatcher parse_matcher_csv(const std::string &text, const std::string &source) {
    const Table t = parse_table(text, source, "wavelength_nm,xbar,ybar,zbar");
    const SpectralGrid grid = table_grid(t, source);
    Eigen::Matrix3Xd rows(3, static_cast<Eigen::Index>(grid.count()));
    for (int r = 0; r < 3; ++r) {
        rows.row(r) = to_vector(t.columns[static_cast<std::size_t>(r)]).transpose();
    }
    ColorMatcher matcher(grid, std::move(rows));
    const double peak = matcher.luminance_peak_nm();
    if (peak < 550.0 || peak > 560.0) {
        throw Error(ErrorCode::RangeError,
                    source + ": ybar peaks at " + std::to_string(peak) + " nm, expected 550-560 nm");
    }
    return matcher;
}

ColorMatcher load_matcher_csv(const fs::path &path) {
    return parse_matcher_csv(read_text_file(path), path.string());
}

// ---------------------------------------------------------------- JSON

Json grid_to_json(const SpectralGrid &grid) {
    return Json{{"start_nm", grid.start_nm()}, {"step_nm", grid.step_nm()}, {"count", grid.count()}};
}

SpectralGrid grid_from_json(const Json &j) {
    const std::string ctx = "grid";
    try {
        return SpectralGrid(get_as<double>(j, "start_nm", ctx), get_as<double>(j, "step_nm", ctx),
                            get_as<std::size_t>(j, "count", ctx));
    } catch (const Error &e) {
        if (e.code() == ErrorCode::SchemaError) {
            throw;
        }
        throw Error(ErrorCode::GridError, e.what());
    }
}

Json bank_to_json(const LedBank &bank) {
    Json channels = Json::array();
    for (std::size_t k = 0; k < bank.channels(); ++k) {
        channels.push_back({{"label", bank.channel_labels()[k]},
                            {"values", vector_to_json(bank.basis().col(static_cast<Eigen::Index>(k)))}});
    }
    return Json{{"name", bank.name()},
                {"grid", grid_to_json(bank.grid())},
                {"max_weight", bank.max_weight()},
                {"channels", std::move(channels)}};
}

LedBank bank_from_json(const Json &j) {
    const std::string ctx = "bank";
    const SpectralGrid grid = grid_from_json(require(j, "grid", ctx));
    const double max_weight = j.contains("max_weight") ? get_as<double>(j, "max_weight", ctx) : 1.0;
    const Json &channels = require(j, "channels", ctx);
    if (!channels.is_array()) {
        throw Error(ErrorCode::SchemaError, "bank: 'channels' must be an array");
    }
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(grid.count()),
                          static_cast<Eigen::Index>(channels.size()));
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < channels.size(); ++k) {
        const std::string cctx = "bank channel " + std::to_string(k);
        labels.push_back(get_as<std::string>(channels[k], "label", cctx));
        const Eigen::VectorXd values = number_array(channels[k], "values", cctx);
        if (static_cast<std::size_t>(values.size()) != grid.count()) {
            throw Error(ErrorCode::SchemaError, cctx + ": has " + std::to_string(values.size()) +
                                                    " values, grid count is " +
                                                    std::to_string(grid.count()));
        }
        basis.col(static_cast<Eigen::Index>(k)) = values;
    }
    return LedBank(get_as<std::string>(j, "name", ctx), grid, std::move(basis), std::move(labels),
                   max_weight);
}

LedBank load_bank_json(const fs::path &path) {
    return bank_from_json(parse_json_text(read_text_file(path), path.string()));
}

void save_bank_json(const fs::path &path, const LedBank &bank) {
    write_text_file(path, dump(bank_to_json(bank)), true);
}

Json params_to_json(const SolveParams &p) {
    Json j{{"delta", p.delta},
           {"delta_white", p.delta_white},
           {"delta_y", p.delta_y},
           {"y_tolerance", p.y_tolerance},
           {"starts", p.starts},
           {"seed", p.seed},
           {"max_iters", p.max_iters},
           {"constraint_tol", p.constraint_tol}};
    if (p.white_target) {
        j["white_target"] = {{"u_prime", p.white_target->u_prime},
                             {"v_prime", p.white_target->v_prime},
                             {"tolerance", p.white_target->tolerance}};
    }
    return j;
}

SolveParams params_from_json(const Json &j) {
    const std::string ctx = "params";
    SolveParams p;
    if (!j.is_object()) {
        throw Error(ErrorCode::SchemaError, "params must be an object");
    }
    auto opt = [&](const char *key, auto &field) {
        if (j.contains(key)) {
            field = get_as<std::decay_t<decltype(field)>>(j, key, ctx);
        }
    };
    opt("delta", p.delta);
    opt("delta_white", p.delta_white);
    opt("delta_y", p.delta_y);
    opt("y_tolerance", p.y_tolerance);
    opt("starts", p.starts);
    opt("seed", p.seed);
    opt("max_iters", p.max_iters);
    opt("constraint_tol", p.constraint_tol);
    if (j.contains("white_target") && !j.at("white_target").is_null()) {
        const Json &t = j.at("white_target");
        p.white_target = WhiteTarget{get_as<double>(t, "u_prime", "white_target"),
                                     get_as<double>(t, "v_prime", "white_target"),
                                     get_as<double>(t, "tolerance", "white_target")};
    }
    validate(p);
    return p;
}

Json solution_to_json(const SolveSolution &s) {
    Json constraints = Json::array();
    for (const auto &row : s.constraints) {
        constraints.push_back({{"name", row.name}, {"value", row.value}, {"bound", row.bound}});
    }
    const auto form = s.mode.constraint_form();
    return Json{{"mode", to_string(s.mode.effect())},
                {"constraint_form", form ? Json(to_string(*form)) : Json(nullptr)},
                {"alpha1", vector_to_json(s.alpha1.values())},
                {"alpha2", vector_to_json(s.alpha2.values())},
                {"objective", s.objective},
                {"feasible", s.feasible},
                {"constraints", std::move(constraints)},
                {"seed", s.seed},
                {"starts_used", s.starts_used},
                {"at_bound_channels", s.at_bound_channels},
                {"flags", s.flags},
                {"candidates_evaluated", s.candidates_evaluated}};
}

namespace {

EffectMode mode_from_json(const Json &j, const std::string &ctx) {
    const Effect effect = parse_effect(get_as<std::string>(j, "mode", ctx));
    if (effect == Effect::SpecificColorChange) {
        return EffectMode::specific_color_change();
    }
    if (j.contains("constraint_form") && !j.at("constraint_form").is_null()) {
        return EffectMode::isochromatic(
            parse_constraint_form(get_as<std::string>(j, "constraint_form", ctx)));
    }
    return EffectMode::isochromatic();
}

} // namespace

SolveSolution solution_from_json(const Json &j) {
    const std::string ctx = "solution";
    SolveSolution s;
    s.mode = mode_from_json(j, ctx);
    s.alpha1 = WeightVector(number_array(j, "alpha1", ctx));
    s.alpha2 = WeightVector(number_array(j, "alpha2", ctx));
    s.objective = get_as<double>(j, "objective", ctx);
    s.feasible = get_as<bool>(j, "feasible", ctx);
    for (const auto &row : require(j, "constraints", ctx)) {
        s.constraints.push_back({get_as<std::string>(row, "name", "constraint"),
                                 get_as<double>(row, "value", "constraint"),
                                 get_as<double>(row, "bound", "constraint")});
    }
    s.seed = get_as<std::uint64_t>(j, "seed", ctx);
    if (j.contains("starts_used")) {
        s.starts_used = get_as<int>(j, "starts_used", ctx);
    }
    if (j.contains("at_bound_channels")) {
        s.at_bound_channels = get_as<std::vector<std::size_t>>(j, "at_bound_channels", ctx);
    }
    if (j.contains("flags")) {
        s.flags = get_as<std::vector<std::string>>(j, "flags", ctx);
    }
    if (j.contains("candidates_evaluated")) {
        s.candidates_evaluated = get_as<std::uint64_t>(j, "candidates_evaluated", ctx);
    }
    return s;
}

std::string format_solution(const SolveSolution &s) { return dump(solution_to_json(s)); }

void save_solution(const fs::path &path, const SolveSolution &s) {
    write_text_file(path, format_solution(s), true);
}

SolveSolution load_solution(const fs::path &path) {
    return solution_from_json(parse_json_text(read_text_file(path), path.string()));
}

// ---------------------------------------------------------------- problems

namespace {

Reflectance material_from(const Json &j, const fs::path &base, const std::string &ctx,
                          Warnings *warnings) {
    if (j.is_string()) {
        return load_reflectance_csv(resolve(base, j.get<std::string>()), warnings);
    }
    const SpectralGrid grid = grid_from_json(require(j, "grid", ctx));
    Eigen::VectorXd values = number_array(j, "values", ctx);
    if (static_cast<std::size_t>(values.size()) != grid.count()) {
        throw Error(ErrorCode::SchemaError, ctx + ": value count does not match grid");
    }
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (v < -reflectance_slack || v > 1.0 + reflectance_slack) {
            throw Error(ErrorCode::RangeError, ctx + ": reflectance " + std::to_string(v) +
                                                   " outside [0, 1] at index " + std::to_string(i));
        }
        if (v < 0.0 || v > 1.0) {
            values[i] = std::clamp(v, 0.0, 1.0);
            if (warnings) {
                warnings->push_back(ctx + ": reflectance clamped at index " + std::to_string(i));
            }
        }
    }
    return Reflectance(grid, std::move(values));
}

ColorMatcher matcher_from(const Json &j, const fs::path &base, const std::string &ctx) {
    if (j.is_string()) {
        return load_matcher_csv(resolve(base, j.get<std::string>()));
    }
    const SpectralGrid grid = grid_from_json(require(j, "grid", ctx));
    Eigen::Matrix3Xd rows(3, static_cast<Eigen::Index>(grid.count()));
    const char *keys[] = {"xbar", "ybar", "zbar"};
    for (int r = 0; r < 3; ++r) {
        const Eigen::VectorXd v = number_array(j, keys[r], ctx);
        if (static_cast<std::size_t>(v.size()) != grid.count()) {
            throw Error(ErrorCode::SchemaError, ctx + ": " + keys[r] + " length does not match grid");
        }
        rows.row(r) = v.transpose();
    }
    return ColorMatcher(grid, std::move(rows));
}

template <typename T>
T onto(const T &value, const SpectralGrid &grid, const std::string &what) {
    try {
        return resample(value, grid);
    } catch (const Error &e) {
        throw Error(ErrorCode::GridError, what + ": " + e.what());
    }
}

} // namespace

SolveProblem problem_from_json(const Json &j, const fs::path &base_dir, Warnings *warnings) {
    const std::string ctx = "problem";
    if (!j.is_object()) {
        throw Error(ErrorCode::SchemaError, "problem must be a JSON object");
    }
    const EffectMode mode = mode_from_json(j, ctx);
    const Json &materials = require(j, "materials", ctx);
    const Json &bank_j = require(j, "bank", ctx);
    const LedBank bank = bank_j.is_string() ? load_bank_json(resolve(base_dir, bank_j.get<std::string>()))
                                            : bank_from_json(bank_j);
    const SpectralGrid &grid = bank.grid();

    Reflectance r1 = onto(material_from(require(materials, "r1", "materials"), base_dir, "r1", warnings),
                          grid, "material r1");
    Reflectance r2 = onto(material_from(require(materials, "r2", "materials"), base_dir, "r2", warnings),
                          grid, "material r2");
    const ColorMatcher matcher = j.contains("matcher")
                                     ? matcher_from(j.at("matcher"), base_dir, "matcher")
                                     : load_matcher_csv(default_matcher_path());
    SolveParams params = j.contains("params") ? params_from_json(j.at("params")) : SolveParams{};

    SolveProblem problem{mode, std::move(r1), std::move(r2), bank,
                         onto(matcher, grid, "matcher"), params};
    validate(problem);
    return problem;
}

SolveProblem load_problem(const fs::path &path, Warnings *warnings) {
    const Json j = parse_json_text(read_text_file(path), path.string());
    return problem_from_json(j, path.parent_path(), warnings);
}

// ---------------------------------------------------------------- reports

Json report_to_json(const EffectReport &report) {
    Json metrics = Json::array();
    for (const auto &m : report.metrics) {
        metrics.push_back({{"label", m.label},
                           {"value", m.value},
                           {"published", m.reference ? Json(*m.reference) : Json(nullptr)}});
    }
    const auto form = report.mode.constraint_form();
    return Json{{"mode", to_string(report.mode.effect())},
                {"constraint_form", form ? Json(to_string(*form)) : Json(nullptr)},
                {"reference_note", "published values, measured on different hardware"},
                {"metrics", std::move(metrics)}};
}

Json swatches_to_json(const std::vector<SwatchRow> &rows) {
    Json out = Json::array();
    for (const auto &r : rows) {
        out.push_back({{"material", r.material},
                       {"under", r.under},
                       {"srgb", {r.srgb.rgb[0], r.srgb.rgb[1], r.srgb.rgb[2]}},
                       {"uv", {r.uv.u_prime, r.uv.v_prime}},
                       {"clipped", r.srgb.clipped}});
    }
    return out;
}

// ---------------------------------------------------------------- fixtures

fs::path fixtures_dir() {
    if (const char *env = std::getenv("SPECLED_FIXTURES_DIR"); env && *env) {
        return fs::path(env);
    }
    return fs::path(SPECLED_DATA_DIR) / "fixtures";
}

fs::path default_matcher_path() { return fixtures_dir() / "cie1931_2deg_5nm.csv"; }

Json fixtures_index(const fs::path &dir) {
    Json index{{"banks", Json::array()},
               {"materials", Json::array()},
               {"matchers", Json::array()},
               {"problems", Json::array()}};
    auto list = [&](const fs::path &sub, const char *ext, Json &into) {
        if (!fs::is_directory(sub)) {
            return;
        }
        std::vector<std::string> names;
        for (const auto &entry : fs::directory_iterator(sub)) {
            if (entry.is_regular_file() && entry.path().extension() == ext) {
                names.push_back(fs::relative(entry.path(), dir).generic_string());
            }
        }
        std::sort(names.begin(), names.end());
        for (auto &n : names) {
            into.push_back(std::move(n));
        }
    };
    list(dir / "banks", ".json", index["banks"]);
    list(dir / "materials", ".csv", index["materials"]);
    list(dir, ".csv", index["matchers"]);
    list(dir, ".json", index["problems"]);
    return index;
}

} // namespace specled::io
