#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "specled/evaluate.hpp"
#include "support.hpp"

using namespace specled;
using namespace specled::testing;

namespace {

double row(const ConstraintReport &report, const std::string &name) {
    for (const auto &r : report) {
        if (r.name == name) {
            return r.value;
        }
    }
    FAIL("missing row " << name);
    return 0.0;
}

WeightVector random_weights(std::mt19937_64 &rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (auto &x : v) {
        x = u(rng);
    }
    return WeightVector(v);
}

SolveProblem with_materials(SolveProblem p, const Reflectance &r1, const Reflectance &r2) {
    p.r1 = r1;
    p.r2 = r2;
    return p;
}

} // namespace

TEST_CASE("objective_iso closed cases") {
    const auto p = fixture_problem("iso_15ch.json");
    const auto same = with_materials(p, p.r1, p.r1);
    std::mt19937_64 rng(1);
    CHECK(objective_iso(same, random_weights(rng, 15)) == 0.0);
    try {
        objective_iso(p, WeightVector::zeros(15));
        FAIL("expected DegenerateColor");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::DegenerateColor);
    }
}

TEST_CASE("objective_iso against plain-loop colorimetry") {
    const auto p = fixture_problem("iso_15ch.json");
    const auto a = WeightVector::one_hot(15, 4);
    const double expected = loop_dist(loop_uv(p, p.r1, a), loop_uv(p, p.r2, a));
    CHECK(expected > 1e-3);
    CHECK(std::abs(objective_iso(p, a) - expected) <= 1e-12);
}

TEST_CASE("iso constraint report against plain-loop colorimetry") {
    for (const auto form : {ConstraintForm::AsPrinted, ConstraintForm::MaterialsMatchUnderW2}) {
        auto p = fixture_problem("iso_15ch.json");
        p.mode = EffectMode::isochromatic(form);
        const WeightVector a1{0.9, 0.1, 0.0, 0.3, 0.2, 0.0, 0.0, 0.5, 0.0, 0.1, 0.0, 0.7, 0.0, 0.2, 0.4};
        const WeightVector a2{0.1, 0.4, 0.6, 0.0, 0.0, 0.8, 0.2, 0.0, 0.3, 0.0, 0.9, 0.0, 0.1, 0.0, 0.2};
        const auto report = constraints_iso(p, a1, a2);
        const auto white = Reflectance::constant(p.bank.grid(), 1.0);
        const double material = form == ConstraintForm::AsPrinted
                                    ? loop_dist(loop_uv(p, p.r2, a2), loop_uv(p, p.r2, a1))
                                    : loop_dist(loop_uv(p, p.r1, a2), loop_uv(p, p.r2, a2));
        CHECK(std::abs(report.front().value - material) <= 1e-12);
        CHECK(std::abs(row(report, "white_shift") - loop_dist(loop_uv(p, white, a1), loop_uv(p, white, a2))) <=
              1e-12);
    }
}

TEST_CASE("identical illuminants satisfy every row") {
    std::mt19937_64 rng(2);
    for (const char *name : {"scc_15ch.json", "iso_3ch.json", "iso_match_3ch.json"}) {
        const auto p = fixture_problem(name);
        const auto a = random_weights(rng, p.bank.channels());
        const auto report = constraints(p, a, a);
        const bool materials_row = p.mode.constraint_form() == ConstraintForm::MaterialsMatchUnderW2;
        for (std::size_t r = materials_row ? 1 : 0; r < report.size(); ++r) {
            CHECK(report[r].value == 0.0);
        }
        if (materials_row) {
            CHECK(report.front().value == doctest::Approx(objective_iso(p, a)).epsilon(1e-14));
        } else {
            CHECK(all_hold(report, 0.0));
        }
    }
    const auto scc = fixture_problem("scc_15ch.json");
    const auto a = random_weights(rng, 15);
    CHECK(objective_scc(scc, a, a) == 0.0);
}

TEST_CASE("halving both illuminants keeps chromatic rows and halves the luminance gap") {
    std::mt19937_64 rng(3);
    for (const char *name : {"iso_3ch.json", "iso_match_3ch.json", "scc_15ch.json"}) {
        const auto p = fixture_problem(name);
        for (int t = 0; t < 20; ++t) {
            const auto a1 = random_weights(rng, p.bank.channels());
            const auto a2 = random_weights(rng, p.bank.channels());
            const auto half1 = WeightVector(Eigen::VectorXd(0.5 * a1.values()));
            const auto half2 = WeightVector(Eigen::VectorXd(0.5 * a2.values()));
            const auto full = constraints(p, a1, a2);
            const auto half = constraints(p, half1, half2);
            CHECK(std::abs(objective(p, a1, a2) - objective(p, half1, half2)) <= 1e-9);
            for (std::size_t r = 0; r < full.size(); ++r) {
                if (full[r].name == "luminance_gap") {
                    CHECK(close_rel(half[r].value, 0.5 * full[r].value, 1e-12, 1e-300));
                } else {
                    CHECK(std::abs(half[r].value - full[r].value) <= 1e-9);
                }
            }
        }
    }
}

TEST_CASE("scale invariance with arbitrary k") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> scale(0.05, 1.0);
    const auto p = fixture_problem("iso_match_3ch.json");
    for (int t = 0; t < 100; ++t) {
        const auto a1 = random_weights(rng, 3);
        const auto a2 = random_weights(rng, 3);
        const double k = scale(rng);
        const auto k1 = WeightVector(Eigen::VectorXd(k * a1.values()));
        const auto k2 = WeightVector(Eigen::VectorXd(k * a2.values()));
        CHECK(std::abs(objective_iso(p, a1) - objective_iso(p, k1)) <= 1e-9);
        const auto a = constraints_iso(p, a1, a2);
        const auto b = constraints_iso(p, k1, k2);
        CHECK(std::abs(a[0].value - b[0].value) <= 1e-9);
        CHECK(std::abs(a[1].value - b[1].value) <= 1e-9);
        CHECK(close_rel(b[2].value, k * a[2].value, 1e-9, 1e-300));
    }
}

TEST_CASE("specific color change is symmetric in the two illuminants") {
    std::mt19937_64 rng(5);
    const auto p = fixture_problem("scc_15ch.json");
    for (int t = 0; t < 100; ++t) {
        const auto a1 = random_weights(rng, 15);
        const auto a2 = random_weights(rng, 15);
        CHECK(objective_scc(p, a1, a2) == doctest::Approx(objective_scc(p, a2, a1)).epsilon(1e-14));
        const auto f = constraints_scc(p, a1, a2);
        const auto b = constraints_scc(p, a2, a1);
        for (std::size_t r = 0; r < f.size(); ++r) {
            CHECK(f[r].value == doctest::Approx(b[r].value).epsilon(1e-14));
        }
    }
}

TEST_CASE("specific color change of one material is bounded by its own constraint") {
    auto p = fixture_problem("scc_3ch.json");
    p = with_materials(p, p.r2, p.r2);
    std::mt19937_64 rng(6);
    for (int t = 0; t < 100; ++t) {
        const auto a1 = random_weights(rng, 3);
        const auto a2 = random_weights(rng, 3);
        const auto report = constraints_scc(p, a1, a2);
        CHECK(objective_scc(p, a1, a2) == report.front().value);
        if (report.front().holds(0.0)) {
            CHECK(objective_scc(p, a1, a2) <= p.params.delta);
        }
    }
    const auto s = solve(p);
    CHECK(s.feasible);
    CHECK(s.objective <= p.params.delta + p.params.constraint_tol);
}

TEST_CASE("wrong mode is rejected") {
    const auto p = fixture_problem("iso_3ch.json");
    const auto a = WeightVector{0.2, 0.3, 0.4};
    CHECK_THROWS_AS(constraints_scc(p, a, a), Error);
}

TEST_CASE("balance_luminance equalizes Y by dimming the brighter light") {
    const auto p = fixture_problem("iso_3ch.json");
    const WeightVector a1{0.9, 0.8, 0.7};
    const WeightVector a2{0.1, 0.2, 0.3};
    const auto [b1, b2] = balance_luminance(p, a1, a2);
    CHECK(b2 == a2);
    const auto report = constraints(p, b1, b2);
    const auto white = Reflectance::constant(p.bank.grid(), 1.0);
    const double y2 = tristimulus(synthesize(p.bank, b2), white, p.matcher).y();
    CHECK(row(report, "luminance_gap") <= 1e-12 * y2);
    CHECK((b1.values().array() <= a1.values().array()).all());
}

TEST_CASE("solve with identical materials returns the trivial feasible point") {
    auto p = fixture_problem("iso_3ch.json");
    p = with_materials(p, p.r1, p.r1);
    const auto s = solve(p);
    CHECK(s.feasible);
    CHECK(s.objective == 0.0);
    CHECK(std::find(s.flags.begin(), s.flags.end(), flag_objective_upper_bound_zero) != s.flags.end());
}

TEST_CASE("solve output re-checks through the reference path") {
    for (const char *name : {"iso_3ch.json", "iso_match_3ch.json", "scc_3ch.json"}) {
        const auto p = fixture_problem(name);
        const auto s = solve(p);
        REQUIRE(s.feasible);
        const auto report = constraints(p, s.alpha1, s.alpha2);
        CHECK(all_hold(report, p.params.constraint_tol));
        CHECK(objective(p, s.alpha1, s.alpha2) == doctest::Approx(s.objective).epsilon(1e-12));
        const auto oracle = oracle_grid(p, 7);
        CHECK(s.objective >= oracle.objective - 1e-6);
    }
}

TEST_CASE("specific color change with loose bounds approaches the lattice optimum") {
    auto p = fixture_problem("scc_3ch.json");
    p.params.delta = 1e9;
    p.params.delta_white = 1e9;
    const auto s = solve(p);
    const auto oracle = oracle_grid(p, 21);
    CHECK(s.feasible);
    CHECK(s.objective >= 0.95 * oracle.objective);
    CHECK(s.objective <= 1.05 * oracle.objective);
}

TEST_CASE("solve is deterministic across runs and thread counts") {
    const auto p = fixture_problem("scc_15ch.json");
    SolveControl one;
    one.threads = 1;
    SolveControl four;
    four.threads = 4;
    const auto a = solve(p, one);
    const auto b = solve(p, four);
    const auto c = solve(p, four);
    CHECK(a.alpha1 == b.alpha1);
    CHECK(a.alpha2 == b.alpha2);
    CHECK(b.alpha1 == c.alpha1);
    CHECK(b.alpha2 == c.alpha2);
    CHECK(io::format_solution(a) == io::format_solution(c));
}

TEST_CASE("15-channel solve matches its regression value") {
    const auto p = fixture_problem("scc_15ch.json");
    const auto s = solve(p);
    const auto golden = io::load_solution(golden_dir() / "solve_scc_15ch.json");
    CHECK(s.feasible);
    CHECK(std::abs(s.objective - golden.objective) <= 1e-9);
}

TEST_CASE("relaxing delta never lowers the best objective") {
    for (const char *name : {"iso_3ch.json", "iso_match_3ch.json", "scc_3ch.json"}) {
        auto p = fixture_problem(name);
        double previous = -1.0;
        for (double delta : {0.05, 0.1, 0.2}) {
            p.params.delta = delta;
            const auto s = solve(p);
            CHECK(s.feasible);
            CHECK(s.objective >= previous - 1e-9);
            previous = s.objective;
        }
    }
}

TEST_CASE("over-constrained problem is reported infeasible with its least-violating point") {
    auto p = fixture_problem("iso_match_3ch.json");
    p.params.delta = 0.0;
    p.params.delta_white = 0.0;
    const auto s = solve(p);
    CHECK_FALSE(s.feasible);
    CHECK(s.alpha1.size() == 3);
    CHECK(total_violation(s.constraints) > 0.0);
}

TEST_CASE("an expired deadline still yields one start") {
    const auto p = fixture_problem("iso_3ch.json");
    SolveControl control;
    control.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
    const auto s = solve(p, control);
    CHECK(s.starts_used >= 1);
    CHECK(std::find(s.flags.begin(), s.flags.end(), flag_timed_out) != s.flags.end());
}

TEST_CASE("oracle counts and guard") {
    CHECK(oracle_candidate_count(2, 2) == 16u);
    CHECK(oracle_candidate_count(4, 2) == 256u);
    CHECK(oracle_candidate_count(3, 7) == 117649u);
    CHECK_FALSE(oracle_candidate_count(4, 10).has_value());
    CHECK_THROWS_AS(oracle_candidate_count(3, 1), Error);

    const auto p = fixture_problem("iso_15ch.json");
    const std::array<std::size_t, 2> two{3, 9};
    auto small = p;
    small.bank = p.bank.subset(two);
    CHECK(oracle_grid(small, 2).candidates_evaluated == 16u);

    const std::array<std::size_t, 4> four{0, 4, 9, 14};
    small.bank = p.bank.subset(four);
    CHECK(oracle_grid(small, 2).candidates_evaluated == 256u);
    try {
        oracle_grid(small, 10);
        FAIL("expected TooLarge");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::TooLarge);
    }

    auto same = fixture_problem("iso_3ch.json");
    same = with_materials(same, same.r1, same.r1);
    CHECK(oracle_grid(same, 4).objective == 0.0);
}

TEST_CASE("oracle result is independent of thread count") {
    const auto p = fixture_problem("iso_match_3ch.json");
    SolveControl one;
    one.threads = 1;
    SolveControl many;
    many.threads = 8;
    const auto a = oracle_grid(p, 7, one);
    const auto b = oracle_grid(p, 7, many);
    CHECK(a.alpha1 == b.alpha1);
    CHECK(a.alpha2 == b.alpha2);
}

TEST_CASE("evaluate reports") {
    const auto p = fixture_problem("iso_match_3ch.json");
    const auto s = solve(p);
    const auto r = evaluate(p, s);
    REQUIRE(r.find("r1_vs_r2_under_w1"));
    CHECK(r.find("r1_vs_r2_under_w1")->value == doctest::Approx(s.objective).epsilon(1e-12));
    CHECK(r.find("r1_vs_r2_under_w2")->value <= p.params.delta + p.params.constraint_tol);
    CHECK(r.find("white_shift_w1_w2")->value <= p.params.delta_white + p.params.constraint_tol);
    CHECK(r.find("r1_vs_r2_under_w1")->reference == 1.9e-1);

    const auto again = evaluate(p, s);
    for (std::size_t i = 0; i < r.metrics.size(); ++i) {
        CHECK(r.metrics[i].value == again.metrics[i].value);
    }

    const auto q = fixture_problem("scc_3ch.json");
    const auto t = solve(q);
    const auto rq = evaluate(q, t);
    CHECK(rq.find("r1_travel_w1_w2")->value == doctest::Approx(t.objective).epsilon(1e-9));
    CHECK(rq.find("r2_travel_w1_w2")->value <= q.params.delta + q.params.constraint_tol);
    CHECK(rq.find("r2_travel_w1_w2")->reference == 3.6e-3);

    SolveSolution flat = t;
    flat.alpha2 = flat.alpha1;
    for (const auto &m : evaluate(q, flat).metrics) {
        CHECK(m.value == 0.0);
    }
}

TEST_CASE("swatches for identical illuminants agree") {
    const auto p = fixture_problem("scc_3ch.json");
    const WeightVector a{0.4, 0.5, 0.6};
    const auto rows = preview_swatches(p, a, a);
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(rows[i].under == "w1");
        CHECK(rows[i + 3].under == "w2");
        CHECK(rows[i].material == rows[i + 3].material);
        CHECK(rows[i].srgb.rgb == rows[i + 3].srgb.rgb);
    }

    std::ostringstream ppm;
    write_ppm(ppm, rows, 4);
    const std::string bytes = ppm.str();
    CHECK(bytes.rfind("P6\n12 8\n255\n", 0) == 0);
    CHECK(bytes.size() == std::string("P6\n12 8\n255\n").size() + 12 * 8 * 3);
}
