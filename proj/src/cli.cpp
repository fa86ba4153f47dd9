#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "specled/evaluate.hpp"
#include "specled/io.hpp"
#include "specled/service.hpp"

namespace specled::service {

namespace {

using io::Json;

struct ProblemArgs {
    std::string problem;
    std::string mode;
    std::string constraint_form;
    std::string r1;
    std::string r2;
    std::string bank;
    std::string matcher;
    std::optional<double> delta;
    std::optional<double> delta_white;
    std::optional<std::uint64_t> seed;
    std::optional<int> starts;

    void add_to(CLI::App *cmd, bool with_overrides) {
        cmd->add_option("--problem", problem, "Problem JSON file");
        cmd->add_option("--mode", mode, "isochromatic | specific_color_change");
        cmd->add_option("--constraint-form", constraint_form, "as_printed | materials_match_under_w2");
        cmd->add_option("--r1", r1, "Reflectance CSV for material 1");
        cmd->add_option("--r2", r2, "Reflectance CSV for material 2");
        cmd->add_option("--bank", bank, "LED bank JSON");
        cmd->add_option("--matcher", matcher, "CMF CSV (default: bundled CIE 1931 2 deg)");
        cmd->add_option("--delta", delta, "Material constraint bound (u'v')");
        cmd->add_option("--delta-white", delta_white, "White shift bound (u'v')");
        if (with_overrides) {
            cmd->add_option("--seed", seed, "Multistart seed");
            cmd->add_option("--starts", starts, "Multistart count");
        }
    }

    SolveProblem load(io::Warnings &warnings) const {
        Json j;
        std::filesystem::path base = std::filesystem::current_path();
        if (!problem.empty()) {
            j = io::parse_json_text(io::read_text_file(problem), problem);
            base = std::filesystem::path(problem).parent_path();
        } else {
            if (mode.empty() || r1.empty() || r2.empty() || bank.empty()) {
                throw Error(ErrorCode::InvalidArgument,
                            "either --problem or all of --mode, --r1, --r2, --bank are required");
            }
            j = Json{{"materials", Json::object()}, {"params", Json::object()}};
        }
        if (!j.is_object()) {
            throw Error(ErrorCode::SchemaError, "problem must be a JSON object");
        }
        const auto absolute = [](const std::string &p) { return std::filesystem::absolute(p).string(); };
        if (!mode.empty()) {
            j["mode"] = mode;
        }
        if (!constraint_form.empty()) {
            j["constraint_form"] = constraint_form;
        }
        if (!r1.empty()) {
            j["materials"]["r1"] = absolute(r1);
        }
        if (!r2.empty()) {
            j["materials"]["r2"] = absolute(r2);
        }
        if (!bank.empty()) {
            j["bank"] = absolute(bank);
        }
        if (!matcher.empty()) {
            j["matcher"] = absolute(matcher);
        }
        if (!j.contains("params")) {
            j["params"] = Json::object();
        }
        if (delta) {
            j["params"]["delta"] = *delta;
        }
        if (delta_white) {
            j["params"]["delta_white"] = *delta_white;
        }
        if (seed) {
            j["params"]["seed"] = *seed;
        }
        if (starts) {
            j["params"]["starts"] = *starts;
        }
        return io::problem_from_json(j, base, &warnings);
    }
};

void emit(const std::string &text, const std::string &path, std::ostream &out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    }
    file << text;
}

Server *active_server = nullptr;

extern "C" void handle_stop_signal(int) {
    if (active_server) {
        active_server->stop();
    }
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Illuminant pairs that induce metamerism on given materials"};
    app.require_subcommand(1);

    ProblemArgs solve_args;
    std::string solve_out;
    auto *solve_cmd = app.add_subcommand("solve", "Optimize LED weights for an illuminant pair");
    solve_args.add_to(solve_cmd, true);
    solve_cmd->add_option("--out", solve_out, "Write solution JSON here (default: stdout)");

    ProblemArgs eval_args;
    std::string eval_solution;
    std::string eval_format = "text";
    auto *eval_cmd = app.add_subcommand("eval", "Report u'v' color variations for a solution");
    eval_args.add_to(eval_cmd, false);
    eval_cmd->add_option("--solution", eval_solution, "Solution JSON")->required();
    eval_cmd->add_option("--format", eval_format)->check(CLI::IsMember({"json", "text"}));

    ProblemArgs oracle_args;
    int oracle_steps = 7;
    std::string oracle_out;
    auto *oracle_cmd = app.add_subcommand("oracle", "Exhaustive lattice search (small banks only)");
    oracle_args.add_to(oracle_cmd, false);
    oracle_cmd->add_option("--steps", oracle_steps, "Levels per weight")->check(CLI::Range(2, 1000));
    oracle_cmd->add_option("--out", oracle_out, "Write solution JSON here (default: stdout)");

    ProblemArgs preview_args;
    std::string preview_solution;
    std::string preview_ppm;
    int preview_cell = 64;
    auto *preview_cmd = app.add_subcommand("preview", "sRGB swatches of each material under w1 and w2");
    preview_args.add_to(preview_cmd, false);
    preview_cmd->add_option("--solution", preview_solution, "Solution JSON")->required();
    preview_cmd->add_option("--ppm", preview_ppm, "Also write a binary PPM swatch strip");
    preview_cmd->add_option("--cell", preview_cell, "Swatch size in pixels")->check(CLI::Range(1, 1024));

    ServerOptions server_options;
    std::string ui_dir;
    auto *serve_cmd = app.add_subcommand("serve", "Run the HTTP JSON API");
    serve_cmd->add_option("--port", server_options.port)->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--host", server_options.host);
    serve_cmd->add_option("--ui-dir", ui_dir, "Serve static UI assets from here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    io::Warnings warnings;
    auto flush_warnings = [&] {
        for (const auto &w : warnings) {
            err << "warning: " << w << "\n";
        }
        warnings.clear();
    };

    try {
        if (*solve_cmd) {
            const SolveProblem problem = solve_args.load(warnings);
            flush_warnings();
            err << "solving " << to_string(problem.mode.effect()) << " with " << problem.bank.channels()
                << " channels, " << problem.params.starts << " starts, seed " << problem.params.seed << "\n";
            const SolveSolution s = solve(problem);
            emit(io::format_solution(s), solve_out, out);
            err << (s.feasible ? "feasible" : "INFEASIBLE") << ", objective " << s.objective << "\n";
            return s.feasible ? 0 : 2;
        }
        if (*eval_cmd) {
            const SolveProblem problem = eval_args.load(warnings);
            flush_warnings();
            const EffectReport report = evaluate(problem, io::load_solution(eval_solution));
            out << (eval_format == "json" ? io::report_to_json(report).dump(2) + "\n"
                                          : format_report_text(report));
            return 0;
        }
        if (*oracle_cmd) {
            const SolveProblem problem = oracle_args.load(warnings);
            flush_warnings();
            const SolveSolution s = oracle_grid(problem, oracle_steps);
            emit(io::format_solution(s), oracle_out, out);
            err << s.candidates_evaluated << " candidates, "
                << (s.feasible ? "feasible" : "INFEASIBLE") << ", objective " << s.objective << "\n";
            return s.feasible ? 0 : 2;
        }
        if (*preview_cmd) {
            const SolveProblem problem = preview_args.load(warnings);
            flush_warnings();
            const SolveSolution s = io::load_solution(preview_solution);
            const auto rows = preview_swatches(problem, s.alpha1, s.alpha2);
            out << io::swatches_to_json(rows).dump(2) << "\n";
            if (!preview_ppm.empty()) {
                std::ofstream ppm(preview_ppm, std::ios::binary);
                if (!ppm) {
                    throw Error(ErrorCode::IoError, "cannot open '" + preview_ppm + "' for writing");
                }
                write_ppm(ppm, rows, preview_cell);
            }
            return 0;
        }
        if (*serve_cmd) {
            server_options.ui_dir = ui_dir;
            Server server(server_options);
            const int port = server.bind();
            if (port < 0) {
                err << "cannot bind " << server_options.host << ":" << server_options.port << "\n";
                return 1;
            }
            err << "listening on http://" << server_options.host << ":" << port << "\n";
            active_server = &server;
            std::signal(SIGINT, handle_stop_signal);
            std::signal(SIGTERM, handle_stop_signal);
            const bool ok = server.listen();
            active_server = nullptr;
            return ok ? 0 : 1;
        }
    } catch (const Error &e) {
        flush_warnings();
        err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace specled::service
