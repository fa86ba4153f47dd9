#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "kernel.hpp"
#include "parallel.hpp"
#include "specled/metamer.hpp"
#include "specled/sequence.hpp"

namespace specled {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();
constexpr double pos_inf = std::numeric_limits<double>::infinity();

// Augmented Lagrangian schedule.
constexpr double initial_rho = 1e2;
constexpr double max_rho = 1e8;
constexpr int outer_rounds = 30;
constexpr double outer_tolerance = 1e-11;

// The multiplier phase targets slightly tightened bounds so that its
// residual violation still lands on the feasible side of the real ones.
double inner_margin(double bound) { return std::min(1e-7, 0.01 * bound); }

struct StartResult {
    bool ok = false;
    Eigen::VectorXd x;
    double objective = 0.0;
    double violation = 0.0;
    bool feasible = false;
};

class LocalSearch {
public:
    LocalSearch(const detail::Kernel &kernel, const SolveProblem &p)
        : kernel_(kernel), n_(static_cast<Eigen::Index>(kernel.channels())),
          max_weight_(p.bank.max_weight()), max_iters_(p.params.max_iters),
          anchored_(has_symmetric_anchor(p)) {}

    StartResult run(const Eigen::VectorXd &start) const {
        const std::size_t rows = kernel_.row_count();
        std::vector<double> shrunk(kernel_.bounds());
        for (auto &b : shrunk) {
            b -= inner_margin(b);
        }

        // Weights live on the box through alpha = max_weight * sin^2(z), so
        // the multiplier subproblems are unconstrained.
        Eigen::VectorXd z = (start / max_weight_).cwiseSqrt().array().asin().matrix();
        std::vector<double> lambda(rows, 0.0);
        double rho = initial_rho;
        double last_violation = pos_inf;
        for (int round = 0; round < outer_rounds; ++round) {
            auto merit = [&](const Eigen::VectorXd &zz) {
                const Eigen::VectorXd a = weights(zz);
                detail::Evaluation e;
                if (!kernel_.evaluate(a.head(n_), a.tail(n_), e)) {
                    return pos_inf;
                }
                double value = -e.objective;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double shifted = std::max(0.0, lambda[i] + rho * (e.rows[i] - shrunk[i]));
                    value += (shifted * shifted - lambda[i] * lambda[i]) / (2.0 * rho);
                }
                return value;
            };
            minimize_bfgs(z, merit);

            detail::Evaluation e;
            if (!kernel_.evaluate(weights(z).head(n_), weights(z).tail(n_), e)) {
                break;
            }
            double worst = 0.0;
            for (std::size_t i = 0; i < rows; ++i) {
                const double g = e.rows[i] - shrunk[i];
                worst = std::max(worst, std::max(g, -lambda[i] / rho));
                lambda[i] = std::max(0.0, lambda[i] + rho * g);
            }
            if (worst < outer_tolerance) {
                break;
            }
            if (worst > 0.25 * last_violation) {
                rho = std::min(rho * 10.0, max_rho);
            }
            last_violation = worst;
        }

        Eigen::VectorXd x = weights(z);
        if (anchored_ && violation(x, kernel_.bounds()) > 0.0) {
            restore_toward_anchor(x);
        }
        if (violation(x, kernel_.bounds()) == 0.0) {
            auto barrier = [&](const Eigen::VectorXd &y) {
                detail::Evaluation ev;
                if (!kernel_.evaluate(y.head(n_), y.tail(n_), ev)) {
                    return neg_inf;
                }
                return within(ev, kernel_.bounds()) ? ev.objective : neg_inf;
            };
            pattern_search(x, barrier, 1e-3 * max_weight_);
        }

        StartResult result;
        detail::Evaluation e;
        result.ok = kernel_.evaluate(x.head(n_), x.tail(n_), e);
        if (result.ok) {
            result.objective = e.objective;
            result.violation = violation(e, kernel_.bounds());
            result.feasible = result.violation == 0.0;
        }
        result.x = std::move(x);
        return result;
    }

private:
    // Both illuminants equal zeroes every chromatic row except an absolute
    // white target, so (alpha1, alpha1) is feasible whenever the material
    // row compares w1 against w2.
    static bool has_symmetric_anchor(const SolveProblem &p) {
        return !p.params.white_target &&
               (!p.mode.is_isochromatic() ||
                p.mode.constraint_form() == ConstraintForm::AsPrinted);
    }

    Eigen::VectorXd weights(const Eigen::VectorXd &z) const {
        return max_weight_ * z.array().sin().square().matrix();
    }

    bool within(const detail::Evaluation &e, const std::vector<double> &bounds) const {
        for (std::size_t i = 0; i < bounds.size(); ++i) {
            if (e.rows[i] > bounds[i]) {
                return false;
            }
        }
        return true;
    }

    double violation(const detail::Evaluation &e, const std::vector<double> &bounds) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < bounds.size(); ++i) {
            sum += std::max(0.0, e.rows[i] - bounds[i]);
        }
        return sum;
    }

    double violation(const Eigen::VectorXd &x, const std::vector<double> &bounds) const {
        detail::Evaluation e;
        if (!kernel_.evaluate(x.head(n_), x.tail(n_), e)) {
            return pos_inf;
        }
        return violation(e, bounds);
    }

    // Quasi-Newton descent with central-difference gradients and a
    // backtracking Armijo line search. `f` may return +inf for undefined
    // points; the line search steps back from them.
    template <typename F>
    void minimize_bfgs(Eigen::VectorXd &z, const F &f) const {
        const Eigen::Index dims = z.size();
        constexpr double h = 1e-7;
        auto gradient = [&](const Eigen::VectorXd &at, Eigen::VectorXd &g) {
            Eigen::VectorXd probe = at;
            for (Eigen::Index j = 0; j < dims; ++j) {
                probe[j] = at[j] + h;
                const double up = f(probe);
                probe[j] = at[j] - h;
                const double down = f(probe);
                probe[j] = at[j];
                if (!std::isfinite(up) || !std::isfinite(down)) {
                    return false;
                }
                g[j] = (up - down) / (2.0 * h);
            }
            return true;
        };

        double fz = f(z);
        Eigen::VectorXd g(dims);
        if (!std::isfinite(fz) || !gradient(z, g)) {
            return;
        }
        Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(dims, dims);
        Eigen::VectorXd g_next(dims);
        for (int iter = 0; iter < max_iters_; ++iter) {
            if (g.lpNorm<Eigen::Infinity>() < 1e-12) {
                break;
            }
            Eigen::VectorXd dir = -inv_hessian * g;
            double slope = g.dot(dir);
            if (!(slope < 0.0)) {
                inv_hessian.setIdentity();
                dir = -g;
                slope = -g.squaredNorm();
            }
            // Cap the step so one move never exceeds a quarter turn in z.
            const double longest = dir.lpNorm<Eigen::Infinity>();
            double t = longest > 0.785 ? 0.785 / longest : 1.0;
            Eigen::VectorXd next;
            double f_next = pos_inf;
            bool accepted = false;
            for (int k = 0; k < 50; ++k, t *= 0.5) {
                next = z + t * dir;
                f_next = f(next);
                if (f_next <= fz + 1e-4 * t * slope) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted || !gradient(next, g_next)) {
                if (inv_hessian.isIdentity()) {
                    break;
                }
                inv_hessian.setIdentity();
                continue;
            }
            const Eigen::VectorXd s = next - z;
            const Eigen::VectorXd y = g_next - g;
            const double sy = s.dot(y);
            if (sy > 1e-16 * s.norm() * y.norm()) {
                const double r = 1.0 / sy;
                const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(dims, dims) - r * s * y.transpose();
                inv_hessian = left * inv_hessian * left.transpose() + r * s * s.transpose();
            }
            const double decrease = fz - f_next;
            z = next;
            fz = f_next;
            g = g_next;
            if (decrease <= 1e-15 * (1.0 + std::abs(fz)) && s.lpNorm<Eigen::Infinity>() < 1e-10) {
                break;
            }
        }
    }

    // Bisection on t for alpha2(t) = (1 - t) alpha2 + t alpha1; t = 1 is
    // feasible by construction.
    void restore_toward_anchor(Eigen::VectorXd &x) const {
        const Eigen::VectorXd a1 = x.head(n_);
        const Eigen::VectorXd a2 = x.tail(n_);
        auto at = [&](double t) {
            Eigen::VectorXd y = x;
            y.tail(n_) = (1.0 - t) * a2 + t * a1;
            return y;
        };
        double lo = 0.0;
        double hi = 1.0;
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (violation(at(mid), kernel_.bounds()) == 0.0) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        x = at(hi);
    }

    // Coordinate exploration with per-coordinate adaptive steps plus a
    // Hooke-Jeeves pattern move after every sweep. Maximizes `merit` over
    // the box [0, max_weight]^(2N).
    template <typename Merit>
    void pattern_search(Eigen::VectorXd &x, const Merit &merit, double initial_step) const {
        const Eigen::Index dims = x.size();
        const double min_step = 1e-12 * max_weight_;
        Eigen::VectorXd step = Eigen::VectorXd::Constant(dims, initial_step);
        double best = merit(x);
        Eigen::VectorXd y(dims);

        for (int sweep = 0; sweep < max_iters_; ++sweep) {
            const Eigen::VectorXd before = x;
            for (Eigen::Index j = 0; j < dims; ++j) {
                bool improved = false;
                for (const double dir : {1.0, -1.0}) {
                    const double moved = std::clamp(x[j] + dir * step[j], 0.0, max_weight_);
                    if (moved == x[j]) {
                        continue;
                    }
                    y = x;
                    y[j] = moved;
                    const double value = merit(y);
                    if (value > best) {
                        best = value;
                        x[j] = moved;
                        improved = true;
                        break;
                    }
                }
                step[j] = improved ? std::min(2.0 * step[j], max_weight_) : 0.5 * step[j];
            }
            if (x != before) {
                y = (2.0 * x - before).cwiseMax(0.0).cwiseMin(max_weight_);
                const double value = merit(y);
                if (value > best) {
                    best = value;
                    x = y;
                }
            }
            if (step.maxCoeff() < min_step) {
                break;
            }
        }
    }

    const detail::Kernel &kernel_;
    Eigen::Index n_;
    double max_weight_;
    int max_iters_;
    bool anchored_;
};

// Halton point `index` with a seeded Cranley-Patterson rotation. Odd
// starts are sparse: a second block of Halton coordinates switches channels
// off (each illuminant keeps at least one), so faces of the box where
// optima with unlit channels live get their own starts.
Eigen::VectorXd start_point(std::size_t channels, std::uint64_t seed, std::uint64_t index,
                            double max_weight) {
    const std::size_t dims = 2 * channels;
    SplitMix64 rng(seed);
    std::vector<double> u(2 * dims);
    for (std::size_t d = 0; d < u.size(); ++d) {
        const double shifted = radical_inverse(index / 2 + 1, nth_prime(d)) + rng.uniform();
        u[d] = shifted - std::floor(shifted);
    }
    Eigen::VectorXd x(static_cast<Eigen::Index>(dims));
    for (std::size_t d = 0; d < dims; ++d) {
        x[static_cast<Eigen::Index>(d)] = u[d] * max_weight;
    }
    if (index % 2 == 1) {
        for (std::size_t half = 0; half < 2; ++half) {
            std::size_t keep = half * channels;
            for (std::size_t k = half * channels; k < (half + 1) * channels; ++k) {
                if (x[static_cast<Eigen::Index>(k)] > x[static_cast<Eigen::Index>(keep)]) {
                    keep = k;
                }
            }
            for (std::size_t k = half * channels; k < (half + 1) * channels; ++k) {
                if (k != keep && u[dims + k] < 0.5) {
                    x[static_cast<Eigen::Index>(k)] = 0.0;
                }
            }
        }
    }
    return x;
}

void require_lightable(const SolveProblem &p) {
    const Eigen::Matrix3Xd white = channel_tristimulus(p.bank, p.matcher);
    if (!(white.row(1).maxCoeff() > 0.0)) {
        throw Error(ErrorCode::DegenerateProblem, "no bank channel produces luminance");
    }
    for (const Reflectance *r : {&p.r1, &p.r2}) {
        if (!(channel_tristimulus(p.bank, *r, p.matcher).colwise().sum().maxCoeff() > 0.0)) {
            throw Error(ErrorCode::DegenerateProblem, "a material reflects nothing the bank emits");
        }
    }
}

} // namespace

SolveSolution solve(const SolveProblem &p, const SolveControl &control) {
    validate(p);
    require_lightable(p);
    const std::size_t n = p.bank.channels();

    if (p.mode.is_isochromatic() && p.r1.values() == p.r2.values()) {
        const WeightVector mid(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n),
                                                         0.5 * p.bank.max_weight()));
        SolveSolution s = detail::finalize_solution(p, mid, mid);
        s.flags.emplace_back(flag_objective_upper_bound_zero);
        s.starts_used = 0;
        return s;
    }

    const detail::Kernel kernel(p);
    const LocalSearch search(kernel, p);
    const auto starts = static_cast<std::size_t>(p.params.starts);
    std::vector<std::optional<StartResult>> results(starts);

    detail::parallel_for(starts, control.threads, [&](std::size_t s) {
        if (s > 0 && control.deadline && std::chrono::steady_clock::now() > *control.deadline) {
            return;
        }
        results[s] = search.run(start_point(n, p.params.seed, s, p.bank.max_weight()));
    });

    // Deterministic reduction in start order: feasible beats infeasible,
    // then higher objective (feasible) or lower violation (infeasible).
    const StartResult *best = nullptr;
    int used = 0;
    for (const auto &r : results) {
        if (!r) {
            continue;
        }
        ++used;
        if (!r->ok) {
            continue;
        }
        if (!best) {
            best = &*r;
        } else if (r->feasible != best->feasible) {
            if (r->feasible) {
                best = &*r;
            }
        } else if (r->feasible ? r->objective > best->objective : r->violation < best->violation) {
            best = &*r;
        }
    }
    if (!best) {
        throw Error(ErrorCode::DegenerateProblem, "no start produced a well-defined color");
    }

    SolveSolution s = detail::finalize_solution(p, WeightVector(best->x.head(n)),
                                                WeightVector(best->x.tail(n)));
    s.starts_used = used;
    if (used < p.params.starts) {
        s.flags.emplace_back(flag_timed_out);
    }
    return s;
}

} // namespace specled
