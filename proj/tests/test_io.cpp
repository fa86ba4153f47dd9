#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <thread>

#include "support.hpp"

using namespace specled;
using namespace specled::testing;

namespace {

ErrorCode code_of(const std::function<void()> &f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidArgument;
}

std::string message_of(const std::function<void()> &f) {
    try {
        f();
    } catch (const Error &e) {
        return e.what();
    }
    return {};
}

std::string reflectance_csv(double middle) {
    std::ostringstream out;
    out << "wavelength_nm,value\n";
    out << "400,0.5\n";
    out << "405," << std::setprecision(17) << middle << "\n";
    out << "410,0.25\n";
    return out.str();
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("specled-io-" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

SolveSolution random_solution(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = 2 + rng() % 14;
    Eigen::VectorXd a(static_cast<Eigen::Index>(n));
    Eigen::VectorXd b(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        a[static_cast<Eigen::Index>(k)] = u(rng);
        b[static_cast<Eigen::Index>(k)] = u(rng) * 1e-7;
    }
    SolveSolution s;
    s.mode = rng() % 2 ? EffectMode::specific_color_change()
                       : EffectMode::isochromatic(ConstraintForm::MaterialsMatchUnderW2);
    s.alpha1 = WeightVector(a);
    s.alpha2 = WeightVector(b);
    s.objective = u(rng) / 3.0;
    s.constraints = {{"white_shift", u(rng), 0.085}, {"luminance_gap", u(rng) * 1e-17, 1e-6}};
    s.feasible = rng() % 2;
    s.starts_used = static_cast<int>(rng() % 100);
    s.at_bound_channels = {0, n - 1};
    s.flags = {flag_weights_at_bound};
    s.seed = rng();
    s.candidates_evaluated = rng() % 1000;
    return s;
}

} // namespace

TEST_CASE("bundled CMF table") {
    const auto &m = cie1931();
    CHECK(m.grid().count() == 81);
    CHECK(m.grid().start_nm() == 380.0);
    CHECK(m.luminance_peak_nm() >= 550.0);
    CHECK(m.luminance_peak_nm() <= 560.0);
    CHECK(m.cy()[35] == 1.0);
}

TEST_CASE("reflectance clamp boundary") {
    io::Warnings warnings;
    const auto r = io::parse_reflectance_csv(reflectance_csv(1.0000000003), "near.csv", &warnings);
    CHECK(r[1] == 1.0);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("near.csv") != std::string::npos);

    CHECK(code_of([] { io::parse_reflectance_csv(reflectance_csv(1.1), "far.csv"); }) == ErrorCode::RangeError);
    CHECK(code_of([] { io::parse_reflectance_csv(reflectance_csv(1.0 + 2e-9), "edge.csv"); }) ==
          ErrorCode::RangeError);
    CHECK(code_of([] { io::parse_reflectance_csv(reflectance_csv(-0.01), "neg.csv"); }) == ErrorCode::RangeError);

    warnings.clear();
    const auto low = io::parse_reflectance_csv(reflectance_csv(-5e-10), "low.csv", &warnings);
    CHECK(low[1] == 0.0);
    CHECK(warnings.size() == 1);
}

TEST_CASE("CSV parse errors carry a line number") {
    const std::string bad = "wavelength_nm,value\n400,0.5\n405,abc\n410,0.2\n";
    CHECK(code_of([&] { io::parse_spectrum_csv(bad, "bad.csv"); }) == ErrorCode::ParseError);
    CHECK(message_of([&] { io::parse_spectrum_csv(bad, "bad.csv"); }).find("bad.csv:3") != std::string::npos);

    CHECK(code_of([] { io::parse_spectrum_csv("wl,value\n400,1\n405,1\n", "h.csv"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { io::parse_spectrum_csv("wavelength_nm,value\n400,1\n405\n", "c.csv"); }) ==
          ErrorCode::ParseError);
    CHECK(code_of([] { io::parse_spectrum_csv("wavelength_nm,value\n405,1\n400,1\n", "o.csv"); }) ==
          ErrorCode::ParseError);
    CHECK(code_of([] { io::parse_spectrum_csv("wavelength_nm,value\n400,1\n405,1\n411,1\n", "u.csv"); }) ==
          ErrorCode::GridError);
    CHECK(code_of([] { io::parse_spectrum_csv("wavelength_nm,value\n400,1\n405,-1\n", "n.csv"); }) ==
          ErrorCode::RangeError);
    CHECK_NOTHROW(io::parse_spectrum_csv("wavelength_nm,value\r\n400,1\r\n405,2\r\n", "crlf.csv"));
}

TEST_CASE("missing file names the path") {
    const std::string path = "/nonexistent/specled/r1.csv";
    CHECK(code_of([&] { io::load_spectrum_csv(path); }) == ErrorCode::IoError);
    CHECK(message_of([&] { io::load_spectrum_csv(path); }).find(path) != std::string::npos);
}

TEST_CASE("CSV round trip to printed precision") {
    TempDir tmp;
    std::mt19937_64 rng(21);
    const auto g = SpectralGrid::visible();
    for (int t = 0; t < 50; ++t) {
        const auto s = random_spectrum(rng, g, 1e3);
        const auto path = tmp.path / "s.csv";
        io::save_csv(path, g, s.values());
        const auto back = io::load_spectrum_csv(path);
        REQUIRE(back.grid().matches(g));
        for (std::size_t i = 0; i < g.count(); ++i) {
            REQUIRE(std::abs(back[i] - s[i]) <= 5e-9 * std::abs(s[i]));
        }
        CHECK(io::format_csv(g, back.values()) == io::format_csv(g, s.values()));
    }
}

TEST_CASE("solution JSON round trip is bitwise") {
    TempDir tmp;
    std::mt19937_64 rng(22);
    for (int t = 0; t < 100; ++t) {
        const auto s = random_solution(rng);
        const auto path = tmp.path / "s.json";
        io::save_solution(path, s);
        const auto back = io::load_solution(path);
        REQUIRE(back.alpha1 == s.alpha1);
        REQUIRE(back.alpha2 == s.alpha2);
        REQUIRE(back.objective == s.objective);
        REQUIRE(back.mode == s.mode);
        REQUIRE(back.feasible == s.feasible);
        REQUIRE(back.seed == s.seed);
        REQUIRE(back.constraints.size() == s.constraints.size());
        REQUIRE(back.constraints[1].value == s.constraints[1].value);
        REQUIRE(back.at_bound_channels == s.at_bound_channels);
        REQUIRE(back.flags == s.flags);
        REQUIRE(io::format_solution(back) == io::format_solution(s));
    }
}

TEST_CASE("bank JSON round trip keeps channel order") {
    TempDir tmp;
    const auto bank = gaussian_bank(7, {410.0, 690.0}, 25.0, SpectralGrid::visible(), 5, 2.5);
    const std::array<std::size_t, 7> order{6, 2, 4, 0, 1, 5, 3};
    const auto shuffled = bank.subset(order);
    io::save_bank_json(tmp.path / "b.json", shuffled);
    const auto back = io::load_bank_json(tmp.path / "b.json");
    CHECK(back.channel_labels() == shuffled.channel_labels());
    CHECK((back.basis().array() == shuffled.basis().array()).all());
    CHECK(back.max_weight() == 2.5);
    CHECK(back.name() == shuffled.name());

    const auto loaded = io::load_bank_json(fixtures() / "banks/gaussian15.json");
    CHECK(loaded.channels() == 15);
    const auto fresh = gaussian_bank(15, {400.0, 700.0}, 30.0, SpectralGrid::visible(), 15);
    CHECK((loaded.basis().array() == fresh.basis().array()).all());
}

TEST_CASE("params JSON round trip") {
    SolveParams p;
    p.delta = 0.123456789012345;
    p.delta_white = 0.05;
    p.seed = 18446744073709551615ull;
    p.starts = 3;
    p.white_target = WhiteTarget{0.2, 0.47, 0.01};
    const auto back = io::params_from_json(io::params_to_json(p));
    CHECK(back.delta == p.delta);
    CHECK(back.seed == p.seed);
    CHECK(back.starts == 3);
    REQUIRE(back.white_target);
    CHECK(back.white_target->v_prime == 0.47);
    CHECK_FALSE(io::params_from_json(io::Json::object()).white_target);
}

TEST_CASE("schema errors") {
    CHECK(code_of([] { io::grid_from_json(io::Json{{"start_nm", 380.0}}); }) == ErrorCode::SchemaError);
    CHECK(code_of([] { io::grid_from_json(io::Json{{"start_nm", "x"}, {"step_nm", 5.0}, {"count", 3}}); }) ==
          ErrorCode::SchemaError);
    CHECK(code_of([] { io::grid_from_json(io::Json{{"start_nm", 380.0}, {"step_nm", -5.0}, {"count", 3}}); }) ==
          ErrorCode::GridError);
    CHECK(code_of([] { io::params_from_json(io::Json{{"delta", "big"}}); }) == ErrorCode::SchemaError);
    CHECK(code_of([] { io::solution_from_json(io::Json{{"mode", "isochromatic"}}); }) == ErrorCode::SchemaError);
    CHECK(code_of([] { io::parse_json_text("{\"a\":", "x.json"); }) == ErrorCode::ParseError);

    io::Json problem = io::parse_json_text(io::read_text_file(fixtures() / "iso_3ch.json"), "iso_3ch.json");
    problem.erase("bank");
    CHECK(code_of([&] { io::problem_from_json(problem, fixtures()); }) == ErrorCode::SchemaError);
    problem["bank"] = "banks/rgb3.json";
    problem["mode"] = "sideways";
    CHECK(code_of([&] { io::problem_from_json(problem, fixtures()); }) == ErrorCode::SchemaError);
}

TEST_CASE("problem loading with inline payloads and resampling") {
    const auto from_file = fixture_problem("scc_3ch.json");

    io::Json j = io::parse_json_text(io::read_text_file(fixtures() / "scc_3ch.json"), "scc_3ch.json");
    const auto g10 = SpectralGrid(380.0, 10.0, 41);
    Eigen::VectorXd coarse(41);
    for (std::size_t i = 0; i < 41; ++i) {
        coarse[static_cast<Eigen::Index>(i)] = from_file.r1[2 * i];
    }
    j["materials"]["r1"] = io::Json{{"grid", io::grid_to_json(g10)},
                                    {"values", std::vector<double>(coarse.data(), coarse.data() + 41)}};
    j["bank"] = io::bank_to_json(from_file.bank);
    const auto inline_problem = io::problem_from_json(j, fixtures());
    CHECK(inline_problem.r1.grid().matches(from_file.bank.grid()));
    CHECK(inline_problem.r1[2] == from_file.r1[2]);
    CHECK(inline_problem.r1[3] == doctest::Approx(0.5 * (from_file.r1[2] + from_file.r1[4])));
    CHECK((inline_problem.bank.basis().array() == from_file.bank.basis().array()).all());

    j["materials"]["r1"] = io::Json{{"grid", io::grid_to_json(SpectralGrid(900.0, 5.0, 10))},
                                    {"values", std::vector<double>(10, 0.5)}};
    CHECK(code_of([&] { io::problem_from_json(j, fixtures()); }) == ErrorCode::GridError);
}

TEST_CASE("fixture index lists bundled files") {
    const auto index = io::fixtures_index(fixtures());
    CHECK(index["banks"].size() == 2);
    CHECK(index["materials"].size() >= 4);
    CHECK(index["problems"].size() == 5);
}

TEST_CASE("concurrent loads of distinct files") {
    const std::vector<std::string> names = {"iso_3ch.json", "iso_match_3ch.json", "scc_3ch.json",
                                            "iso_15ch.json", "scc_15ch.json"};
    std::vector<double> serial;
    for (const auto &n : names) {
        serial.push_back(fixture_problem(n).r1.values().sum());
    }
    std::vector<double> parallel(names.size());
    {
        std::vector<std::jthread> threads;
        for (std::size_t i = 0; i < names.size(); ++i) {
            threads.emplace_back([&, i] { parallel[i] = fixture_problem(names[i]).r1.values().sum(); });
        }
    }
    CHECK(serial == parallel);
}
