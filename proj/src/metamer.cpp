#include "specled/metamer.hpp"

#include <algorithm>
#include <cmath>

#include "kernel.hpp"

namespace specled {

std::string to_string(Effect effect) {
    return effect == Effect::Isochromatic ? "isochromatic" : "specific_color_change";
}

std::string to_string(ConstraintForm form) {
    return form == ConstraintForm::AsPrinted ? "as_printed" : "materials_match_under_w2";
}

Effect parse_effect(const std::string &text) {
    if (text == "isochromatic" || text == "iso") {
        return Effect::Isochromatic;
    }
    if (text == "specific_color_change" || text == "scc") {
        return Effect::SpecificColorChange;
    }
    throw Error(ErrorCode::SchemaError, "unknown effect mode '" + text + "'");
}

ConstraintForm parse_constraint_form(const std::string &text) {
    if (text == "as_printed") {
        return ConstraintForm::AsPrinted;
    }
    if (text == "materials_match_under_w2") {
        return ConstraintForm::MaterialsMatchUnderW2;
    }
    throw Error(ErrorCode::SchemaError, "unknown constraint form '" + text + "'");
}

void validate(const SolveParams &params) {
    auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!nonneg(params.delta) || !nonneg(params.delta_white) || !nonneg(params.delta_y)) {
        throw Error(ErrorCode::InvalidArgument, "delta, delta_white and delta_y must be finite and >= 0");
    }
    if (!(params.y_tolerance > 0.0) || !(params.constraint_tol > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "y_tolerance and constraint_tol must be positive");
    }
    if (params.starts < 1 || params.max_iters < 1) {
        throw Error(ErrorCode::InvalidArgument, "starts and max_iters must be >= 1");
    }
    if (params.white_target && !nonneg(params.white_target->tolerance)) {
        throw Error(ErrorCode::InvalidArgument, "white_target tolerance must be >= 0");
    }
}

void validate(const SolveProblem &p) {
    validate(p.params);
    require_same_grid(p.r1.grid(), p.bank.grid(), "material r1 vs bank");
    require_same_grid(p.r2.grid(), p.bank.grid(), "material r2 vs bank");
    require_same_grid(p.matcher.grid(), p.bank.grid(), "matcher vs bank");
}

bool all_hold(const ConstraintReport &report, double tol) {
    return std::all_of(report.begin(), report.end(),
                       [tol](const ConstraintRow &row) { return row.holds(tol); });
}

double total_violation(const ConstraintReport &report) {
    double sum = 0.0;
    for (const auto &row : report) {
        sum += row.violation();
    }
    return sum;
}

namespace {

struct Lit {
    Chromaticity material1;
    Chromaticity material2;
    Chromaticity white;
};

Lit light(const SolveProblem &p, const WeightVector &a) {
    const Spectrum w = synthesize(p.bank, a);
    return {uv_prime(tristimulus(w, p.r1, p.matcher)), uv_prime(tristimulus(w, p.r2, p.matcher)),
            uv_prime(tristimulus(w, p.matcher))};
}

void append_shared_rows(const SolveProblem &p, const Lit &w1, const Lit &w2,
                        ConstraintReport &report) {
    report.push_back({detail::row_white_shift, uv_distance(w1.white, w2.white), p.params.delta_white});
    const double y1 = w1.white.luminance_y;
    const double y2 = w2.white.luminance_y;
    report.push_back({detail::row_luminance_gap, std::abs(y1 - y2),
                      p.params.delta_y + p.params.y_tolerance * std::max(y1, y2)});
    if (const auto &target = p.params.white_target) {
        const Chromaticity t{target->u_prime, target->v_prime, 0.0};
        report.push_back({detail::row_white_target_w1, uv_distance(w1.white, t), target->tolerance});
        report.push_back({detail::row_white_target_w2, uv_distance(w2.white, t), target->tolerance});
    }
}

void require_mode(const SolveProblem &p, Effect effect, const char *what) {
    if (p.mode.effect() != effect) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(what) + " called on a " + to_string(p.mode.effect()) + " problem");
    }
}

} // namespace

double objective_iso(const SolveProblem &p, const WeightVector &a1) {
    const Lit w1 = light(p, a1);
    return uv_distance(w1.material1, w1.material2);
}

ConstraintReport constraints_iso(const SolveProblem &p, const WeightVector &a1,
                                 const WeightVector &a2) {
    require_mode(p, Effect::Isochromatic, "constraints_iso");
    const Lit w1 = light(p, a1);
    const Lit w2 = light(p, a2);
    ConstraintReport report;
    if (p.mode.constraint_form() == ConstraintForm::MaterialsMatchUnderW2) {
        report.push_back({detail::row_materials_under_w2, uv_distance(w2.material1, w2.material2),
                          p.params.delta});
    } else {
        report.push_back({detail::row_r2_shift, uv_distance(w2.material2, w1.material2), p.params.delta});
    }
    append_shared_rows(p, w1, w2, report);
    return report;
}

double objective_scc(const SolveProblem &p, const WeightVector &a1, const WeightVector &a2) {
    return uv_distance(light(p, a1).material1, light(p, a2).material1);
}

ConstraintReport constraints_scc(const SolveProblem &p, const WeightVector &a1,
                                 const WeightVector &a2) {
    require_mode(p, Effect::SpecificColorChange, "constraints_scc");
    const Lit w1 = light(p, a1);
    const Lit w2 = light(p, a2);
    ConstraintReport report;
    report.push_back({detail::row_r2_shift, uv_distance(w1.material2, w2.material2), p.params.delta});
    append_shared_rows(p, w1, w2, report);
    return report;
}

double objective(const SolveProblem &p, const WeightVector &a1, const WeightVector &a2) {
    return p.mode.is_isochromatic() ? objective_iso(p, a1) : objective_scc(p, a1, a2);
}

ConstraintReport constraints(const SolveProblem &p, const WeightVector &a1, const WeightVector &a2) {
    return p.mode.is_isochromatic() ? constraints_iso(p, a1, a2) : constraints_scc(p, a1, a2);
}

std::pair<WeightVector, WeightVector> balance_luminance(const SolveProblem &p, WeightVector a1,
                                                        WeightVector a2) {
    const double y1 = tristimulus(synthesize(p.bank, a1), p.matcher).y();
    const double y2 = tristimulus(synthesize(p.bank, a2), p.matcher).y();
    if (!(y1 > 0.0) || !(y2 > 0.0)) {
        throw Error(ErrorCode::DegenerateColor, "cannot balance a zero-luminance illuminant");
    }
    if (y2 > y1) {
        a2 = WeightVector(a2.values() * (y1 / y2));
    } else if (y1 > y2) {
        a1 = WeightVector(a1.values() * (y2 / y1));
    }
    return {std::move(a1), std::move(a2)};
}

namespace detail {

SolveSolution finalize_solution(const SolveProblem &p, WeightVector a1, WeightVector a2) {
    std::tie(a1, a2) = balance_luminance(p, std::move(a1), std::move(a2));

    SolveSolution s;
    s.mode = p.mode;
    s.seed = p.params.seed;
    s.objective = objective(p, a1, a2);
    s.constraints = constraints(p, a1, a2);
    s.feasible = all_hold(s.constraints, p.params.constraint_tol);

    const double cap = p.bank.max_weight() * (1.0 - 1e-12);
    for (std::size_t k = 0; k < p.bank.channels(); ++k) {
        if (a1[k] >= cap || a2[k] >= cap) {
            s.at_bound_channels.push_back(k);
        }
    }
    if (!s.at_bound_channels.empty()) {
        s.flags.emplace_back(flag_weights_at_bound);
    }
    s.alpha1 = std::move(a1);
    s.alpha2 = std::move(a2);
    return s;
}

} // namespace detail

} // namespace specled
