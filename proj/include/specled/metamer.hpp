#pragma once

// Illuminant-pair design for metamerism effects.
//
// Isochromatic:        maximize |U(C R1 w1) - U(C R2 w1)|
//                      s.t. |U(C R2 w2) - U(C R2 w1)| <= delta          (as printed)
//                        or |U(C R1 w2) - U(C R2 w2)| <= delta          (materials match under w2)
// Specific color change: maximize |U(C R1 w1) - U(C R1 w2)|
//                      s.t. |U(C R2 w1) - U(C R2 w2)| <= delta
// Both modes:          |U(C w1) - U(C w2)| <= delta_white, |C_Y w1 - C_Y w2| <= delta_y
//
// with w_i = sum_k alpha_ik e_k and U the CIE 1976 u'v' projection.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specled/led.hpp"
#include "specled/spectral.hpp"

namespace specled {

enum class Effect { Isochromatic, SpecificColorChange };
enum class ConstraintForm { AsPrinted, MaterialsMatchUnderW2 };

class EffectMode {
public:
    static EffectMode isochromatic(ConstraintForm form = ConstraintForm::AsPrinted) {
        return EffectMode(Effect::Isochromatic, form);
    }
    static EffectMode specific_color_change() {
        return EffectMode(Effect::SpecificColorChange, std::nullopt);
    }

    Effect effect() const { return effect_; }
    bool is_isochromatic() const { return effect_ == Effect::Isochromatic; }
    /// Present only for the isochromatic effect.
    std::optional<ConstraintForm> constraint_form() const { return form_; }

    bool operator==(const EffectMode &) const = default;

private:
    EffectMode(Effect effect, std::optional<ConstraintForm> form) : effect_(effect), form_(form) {}

    Effect effect_;
    std::optional<ConstraintForm> form_;
};

std::string to_string(Effect effect);
std::string to_string(ConstraintForm form);
Effect parse_effect(const std::string &text);
ConstraintForm parse_constraint_form(const std::string &text);

/// Optional nearness of both illuminants to a reference white point.
struct WhiteTarget {
    double u_prime = 0.0;
    double v_prime = 0.0;
    double tolerance = 0.0;
};

struct SolveParams {
    double delta = 0.1;
    double delta_white = 0.085;
    double delta_y = 0.0;
    double y_tolerance = 1e-6; // relative slack on the luminance row
    int starts = 64;
    std::uint64_t seed = 0;
    int max_iters = 2000;
    double constraint_tol = 1e-9;
    std::optional<WhiteTarget> white_target;
};

/// Throws InvalidArgument on a malformed parameter set.
void validate(const SolveParams &params);

struct SolveProblem {
    EffectMode mode;
    Reflectance r1;
    Reflectance r2;
    LedBank bank;
    ColorMatcher matcher;
    SolveParams params;
};

/// Throws GridMismatch / InvalidArgument.
void validate(const SolveProblem &problem);

struct ConstraintRow {
    std::string name;
    double value = 0.0;
    double bound = 0.0;

    double violation() const { return value > bound ? value - bound : 0.0; }
    bool holds(double tol) const { return value <= bound + tol; }
};

using ConstraintReport = std::vector<ConstraintRow>;

bool all_hold(const ConstraintReport &report, double tol);
double total_violation(const ConstraintReport &report);

// Flags attached to solutions.
inline constexpr const char *flag_objective_upper_bound_zero = "objective_upper_bound_zero";
inline constexpr const char *flag_weights_at_bound = "weights_at_bound";
inline constexpr const char *flag_timed_out = "timed_out";

struct SolveSolution {
    EffectMode mode = EffectMode::isochromatic();
    WeightVector alpha1;
    WeightVector alpha2;
    double objective = 0.0;
    ConstraintReport constraints;
    bool feasible = false;
    int starts_used = 0;
    std::vector<std::size_t> at_bound_channels;
    std::vector<std::string> flags;
    std::uint64_t seed = 0;
    std::uint64_t candidates_evaluated = 0;
};

// Direct colorimetric evaluation: weights are synthesized into spectra and
// pushed through tristimulus/uv_prime. This is the reference path the
// optimizer's results are checked against.

double objective_iso(const SolveProblem &p, const WeightVector &a1);
ConstraintReport constraints_iso(const SolveProblem &p, const WeightVector &a1,
                                 const WeightVector &a2);
double objective_scc(const SolveProblem &p, const WeightVector &a1, const WeightVector &a2);
ConstraintReport constraints_scc(const SolveProblem &p, const WeightVector &a1,
                                 const WeightVector &a2);

/// Mode dispatch over the two pairs above.
double objective(const SolveProblem &p, const WeightVector &a1, const WeightVector &a2);
ConstraintReport constraints(const SolveProblem &p, const WeightVector &a1, const WeightVector &a2);

/// Scales the brighter of the two weight vectors down so both illuminants
/// have equal C_Y w. Chromaticities are unaffected.
std::pair<WeightVector, WeightVector> balance_luminance(const SolveProblem &p, WeightVector a1,
                                                        WeightVector a2);

struct SolveControl {
    /// Starts that have not begun by this time are skipped.
    std::optional<std::chrono::steady_clock::time_point> deadline;
    /// 0 picks hardware concurrency. Results do not depend on this.
    unsigned threads = 0;
};

/// Multistart penalty search over (alpha1, alpha2). Never throws on
/// infeasibility: the least-violating candidate is returned with
/// `feasible == false`. Throws DegenerateProblem when the bank cannot light
/// the scene.
SolveSolution solve(const SolveProblem &p, const SolveControl &control = {});

inline constexpr double oracle_candidate_limit = 1e8;

/// Exhaustive lattice search with `steps` levels per weight over
/// [0, max_weight]. Throws TooLarge when steps^(2N) >= 1e8.
SolveSolution oracle_grid(const SolveProblem &p, int steps, const SolveControl &control = {});

/// Number of lattice candidates oracle_grid would enumerate, or nullopt if
/// it would not fit the guard.
std::optional<std::uint64_t> oracle_candidate_count(std::size_t channels, int steps);

} // namespace specled
