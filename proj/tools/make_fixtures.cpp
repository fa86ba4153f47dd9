// Regenerates the bundled fixture tree: LED banks, Gaussian-bump material
// reflectances, and problem files. Material pairs for the 3-channel problems
// are picked from a candidate list by running the lattice oracle and keeping
// the first pair with a nontrivial feasible optimum.
//
//   make_fixtures [--out DIR]

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specled/io.hpp"

using namespace specled;

namespace {

struct Bump {
    double peak_nm;
    double fwhm_nm;
    double amplitude;
};

struct MaterialSpec {
    std::string name;
    double floor;
    std::vector<Bump> bumps;
};

const std::vector<MaterialSpec> materials = {
    {"blue", 0.05, {{460, 80, 0.60}}},
    {"violet", 0.05, {{430, 60, 0.50}, {650, 80, 0.40}}},
    {"light_blue", 0.20, {{490, 120, 0.50}}},
    {"yellow", 0.05, {{580, 50, 0.85}}},
    {"pink", 0.10, {{620, 90, 0.60}, {440, 50, 0.25}}},
    {"green", 0.05, {{530, 60, 0.55}}},
};

Reflectance make_material(const MaterialSpec &spec, const SpectralGrid &grid) {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.count()), spec.floor);
    for (const auto &b : spec.bumps) {
        v += gaussian_spectrum(grid, b.peak_nm, b.fwhm_nm, b.amplitude).values();
    }
    return Reflectance(grid, v.cwiseMin(1.0));
}

struct ProblemSpec {
    std::string file;
    EffectMode mode;
    std::string bank;
    std::vector<std::pair<std::string, std::string>> candidates;
};

io::Json problem_json(const ProblemSpec &spec, const std::string &r1, const std::string &r2) {
    SolveParams params;
    params.delta = 0.1;
    params.delta_white = 0.085;
    params.seed = 42;
    io::Json j{{"mode", to_string(spec.mode.effect())}};
    if (const auto form = spec.mode.constraint_form()) {
        j["constraint_form"] = to_string(*form);
    }
    j["materials"] = {{"r1", "materials/" + r1 + ".csv"}, {"r2", "materials/" + r2 + ".csv"}};
    j["bank"] = "banks/" + spec.bank + ".json";
    j["params"] = io::params_to_json(params);
    return j;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Regenerate bundled fixtures"};
    std::string out = io::fixtures_dir().string();
    double min_objective = 0.1;
    int steps = 5;
    app.add_option("--out", out, "Fixture directory");
    app.add_option("--min-objective", min_objective, "Oracle objective a 3-channel pair must reach");
    app.add_option("--steps", steps, "Oracle lattice levels per weight");
    CLI11_PARSE(app, argc, argv);

    const io::fs::path dir(out);
    io::fs::create_directories(dir / "banks");
    io::fs::create_directories(dir / "materials");

    const SpectralGrid grid = SpectralGrid::visible();

    const LedBank rgb3 = gaussian_bank(3, {450.0, 620.0}, 40.0, grid, 3);
    const LedBank gaussian15 = gaussian_bank(15, {400.0, 700.0}, 30.0, grid, 15);
    io::save_bank_json(dir / "banks/rgb3.json", LedBank("rgb3", grid, rgb3.basis(), rgb3.channel_labels()));
    io::save_bank_json(dir / "banks/gaussian15.json",
                       LedBank("gaussian15", grid, gaussian15.basis(), gaussian15.channel_labels()));

    for (const auto &m : materials) {
        io::save_csv(dir / "materials" / (m.name + ".csv"), grid, make_material(m, grid).values());
    }

    const std::vector<ProblemSpec> small = {
        {"iso_3ch.json", EffectMode::isochromatic(ConstraintForm::AsPrinted), "rgb3",
         {{"blue", "violet"}, {"blue", "pink"}, {"green", "pink"}}},
        {"iso_match_3ch.json", EffectMode::isochromatic(ConstraintForm::MaterialsMatchUnderW2), "rgb3",
         {{"blue", "violet"}, {"blue", "pink"}, {"green", "pink"}}},
        {"scc_3ch.json", EffectMode::specific_color_change(), "rgb3",
         {{"yellow", "light_blue"}, {"pink", "light_blue"}, {"green", "blue"}}},
    };

    for (const auto &spec : small) {
        bool chosen = false;
        for (const auto &[a, b] : spec.candidates) {
            const io::Json j = problem_json(spec, a, b);
            const SolveProblem p = io::problem_from_json(j, dir);
            const SolveSolution o = oracle_grid(p, steps);
            std::cerr << spec.file << " candidate " << a << "/" << b << ": oracle objective " << o.objective
                      << (o.feasible ? " feasible" : " infeasible") << "\n";
            if (o.feasible && o.objective >= min_objective) {
                std::ofstream(dir / spec.file) << j.dump(2) << "\n";
                chosen = true;
                break;
            }
        }
        if (!chosen) {
            std::cerr << spec.file << ": no candidate pair has a nontrivial feasible optimum\n";
            return 1;
        }
    }

    const std::vector<ProblemSpec> large = {
        {"iso_15ch.json", EffectMode::isochromatic(ConstraintForm::MaterialsMatchUnderW2), "gaussian15",
         {{"blue", "violet"}}},
        {"scc_15ch.json", EffectMode::specific_color_change(), "gaussian15", {{"yellow", "light_blue"}}},
    };
    for (const auto &spec : large) {
        const auto &[a, b] = spec.candidates.front();
        std::ofstream(dir / spec.file) << problem_json(spec, a, b).dump(2) << "\n";
    }
    std::cerr << "fixtures written to " << dir << "\n";
    return 0;
}
