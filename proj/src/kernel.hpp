#pragma once

// Per-channel tristimulus fast path shared by the multistart solver and the
// lattice oracle. XYZ of material r under w = sum_k alpha_k e_k is T_r alpha
// with T_r = dλ C diag(r) E precomputed once per problem.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "specled/metamer.hpp"

namespace specled::detail {

inline constexpr const char *row_r2_shift = "r2_shift";
inline constexpr const char *row_materials_under_w2 = "materials_under_w2";
inline constexpr const char *row_white_shift = "white_shift";
inline constexpr const char *row_luminance_gap = "luminance_gap";
inline constexpr const char *row_white_target_w1 = "white_target_w1";
inline constexpr const char *row_white_target_w2 = "white_target_w2";

inline constexpr std::size_t max_chromatic_rows = 4;

struct UV {
    double u = 0.0;
    double v = 0.0;
};

// Same degeneracy rule as uv_prime().
inline bool project_uv(const Eigen::Vector3d &xyz, UV &out) {
    const double denom = xyz[0] + 15.0 * xyz[1] + 3.0 * xyz[2];
    const double scale = std::abs(xyz[0]) + std::abs(xyz[1]) + std::abs(xyz[2]);
    if (!(denom > 0.0) || !(denom > 1e-12 * scale) || !std::isfinite(denom)) {
        return false;
    }
    out.u = 4.0 * xyz[0] / denom;
    out.v = 9.0 * xyz[1] / denom;
    return true;
}

inline double distance(const UV &a, const UV &b) { return std::hypot(a.u - b.u, a.v - b.v); }

struct Evaluation {
    double objective = 0.0;
    std::array<double, max_chromatic_rows> rows{};
};

/// Chromatic part of the problem: the objective and every u'v' constraint
/// row. The luminance row is closed algebraically by balance_luminance and
/// is not part of the search.
class Kernel {
public:
    explicit Kernel(const SolveProblem &p);

    std::size_t channels() const { return channels_; }
    std::size_t row_count() const { return names_.size(); }
    const std::vector<std::string> &row_names() const { return names_; }
    const std::vector<double> &bounds() const { return bounds_; }

    /// False when any required chromaticity is undefined (zero stimulus).
    bool evaluate(const Eigen::Ref<const Eigen::VectorXd> &a1,
                  const Eigen::Ref<const Eigen::VectorXd> &a2, Evaluation &out) const;

    double luminance(const Eigen::Ref<const Eigen::VectorXd> &a) const {
        return white_.row(1).dot(a);
    }

private:
    Effect effect_;
    ConstraintForm form_;
    std::size_t channels_;
    Eigen::Matrix3Xd r1_;
    Eigen::Matrix3Xd r2_;
    Eigen::Matrix3Xd white_;
    std::optional<WhiteTarget> target_;
    std::vector<std::string> names_;
    std::vector<double> bounds_;
};

inline Kernel::Kernel(const SolveProblem &p)
    : effect_(p.mode.effect()),
      form_(p.mode.constraint_form().value_or(ConstraintForm::AsPrinted)),
      channels_(p.bank.channels()),
      r1_(channel_tristimulus(p.bank, p.r1, p.matcher)),
      r2_(channel_tristimulus(p.bank, p.r2, p.matcher)),
      white_(channel_tristimulus(p.bank, p.matcher)),
      target_(p.params.white_target) {
    if (effect_ == Effect::Isochromatic && form_ == ConstraintForm::MaterialsMatchUnderW2) {
        names_.push_back(row_materials_under_w2);
    } else {
        names_.push_back(row_r2_shift);
    }
    bounds_.push_back(p.params.delta);
    names_.push_back(row_white_shift);
    bounds_.push_back(p.params.delta_white);
    if (target_) {
        names_.push_back(row_white_target_w1);
        bounds_.push_back(target_->tolerance);
        names_.push_back(row_white_target_w2);
        bounds_.push_back(target_->tolerance);
    }
}

inline bool Kernel::evaluate(const Eigen::Ref<const Eigen::VectorXd> &a1,
                             const Eigen::Ref<const Eigen::VectorXd> &a2, Evaluation &out) const {
    UV m1w1, m2w1, m1w2, m2w2, ww1, ww2;
    if (!project_uv(white_ * a1, ww1) || !project_uv(white_ * a2, ww2)) {
        return false;
    }
    out.rows[1] = distance(ww1, ww2);
    if (target_) {
        const UV t{target_->u_prime, target_->v_prime};
        out.rows[2] = distance(ww1, t);
        out.rows[3] = distance(ww2, t);
    }

    if (effect_ == Effect::Isochromatic) {
        if (!project_uv(r1_ * a1, m1w1) || !project_uv(r2_ * a1, m2w1) ||
            !project_uv(r2_ * a2, m2w2)) {
            return false;
        }
        out.objective = distance(m1w1, m2w1);
        if (form_ == ConstraintForm::MaterialsMatchUnderW2) {
            if (!project_uv(r1_ * a2, m1w2)) {
                return false;
            }
            out.rows[0] = distance(m1w2, m2w2);
        } else {
            out.rows[0] = distance(m2w2, m2w1);
        }
    } else {
        if (!project_uv(r1_ * a1, m1w1) || !project_uv(r1_ * a2, m1w2) ||
            !project_uv(r2_ * a1, m2w1) || !project_uv(r2_ * a2, m2w2)) {
            return false;
        }
        out.objective = distance(m1w1, m1w2);
        out.rows[0] = distance(m2w1, m2w2);
    }
    return true;
}

/// Balances luminance, then re-evaluates through the reference path and
/// fills in the report, feasibility, and flags.
SolveSolution finalize_solution(const SolveProblem &p, WeightVector a1, WeightVector a2);

} // namespace specled::detail
