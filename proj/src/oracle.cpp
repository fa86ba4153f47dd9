#include <algorithm>
#include <limits>
#include <sstream>

#include "kernel.hpp"
#include "parallel.hpp"
#include "specled/metamer.hpp"

namespace specled {

std::optional<std::uint64_t> oracle_candidate_count(std::size_t channels, int steps) {
    if (steps < 2) {
        throw Error(ErrorCode::InvalidArgument, "oracle needs at least 2 steps per channel");
    }
    std::uint64_t count = 1;
    for (std::size_t d = 0; d < 2 * channels; ++d) {
        count *= static_cast<std::uint64_t>(steps);
        if (static_cast<double>(count) >= oracle_candidate_limit) {
            return std::nullopt;
        }
    }
    return count;
}

namespace {

struct Best {
    bool found = false;
    bool feasible = false;
    double objective = 0.0;
    double violation = 0.0;
    std::uint64_t index = 0;

    // Candidates are offered in increasing index order within a chunk and
    // chunks are merged in order, so strict comparisons keep the lowest index.
    void offer(bool cand_feasible, double cand_objective, double cand_violation, std::uint64_t i) {
        bool take = false;
        if (!found) {
            take = true;
        } else if (cand_feasible != feasible) {
            take = cand_feasible;
        } else if (cand_feasible) {
            take = cand_objective > objective;
        } else {
            take = cand_violation < violation;
        }
        if (take) {
            *this = {true, cand_feasible, cand_objective, cand_violation, i};
        }
    }
};

void decode(std::uint64_t index, int steps, double level_step, Eigen::VectorXd &x) {
    for (Eigen::Index d = 0; d < x.size(); ++d) {
        x[d] = static_cast<double>(index % static_cast<std::uint64_t>(steps)) * level_step;
        index /= static_cast<std::uint64_t>(steps);
    }
}

} // namespace

SolveSolution oracle_grid(const SolveProblem &p, int steps, const SolveControl &control) {
    validate(p);
    const std::size_t n = p.bank.channels();
    const auto count = oracle_candidate_count(n, steps);
    if (!count) {
        std::ostringstream msg;
        msg << "oracle lattice " << steps << "^" << 2 * n << " reaches the "
            << oracle_candidate_limit << " candidate limit";
        throw Error(ErrorCode::TooLarge, msg.str());
    }

    const detail::Kernel kernel(p);
    const double level_step = p.bank.max_weight() / static_cast<double>(steps - 1);
    const double tol = p.params.constraint_tol;
    const auto &bounds = kernel.bounds();

    constexpr std::uint64_t chunk = 1 << 14;
    const std::uint64_t chunks = (*count + chunk - 1) / chunk;
    std::vector<Best> partial(chunks);

    detail::parallel_for(chunks, control.threads, [&](std::size_t c) {
        Eigen::VectorXd x(static_cast<Eigen::Index>(2 * n));
        detail::Evaluation e;
        Best best;
        const std::uint64_t end = std::min<std::uint64_t>(*count, (c + 1) * chunk);
        for (std::uint64_t i = c * chunk; i < end; ++i) {
            decode(i, steps, level_step, x);
            if (!kernel.evaluate(x.head(n), x.tail(n), e)) {
                continue;
            }
            double violation = 0.0;
            bool feasible = true;
            for (std::size_t r = 0; r < bounds.size(); ++r) {
                violation += std::max(0.0, e.rows[r] - bounds[r]);
                feasible = feasible && e.rows[r] <= bounds[r] + tol;
            }
            best.offer(feasible, e.objective, violation, i);
        }
        partial[c] = best;
    });

    Best best;
    for (const auto &b : partial) {
        if (b.found) {
            best.offer(b.feasible, b.objective, b.violation, b.index);
        }
    }
    if (!best.found) {
        throw Error(ErrorCode::DegenerateProblem, "no lattice point produces a well-defined color");
    }

    Eigen::VectorXd x(static_cast<Eigen::Index>(2 * n));
    decode(best.index, steps, level_step, x);
    SolveSolution s = detail::finalize_solution(p, WeightVector(x.head(n)), WeightVector(x.tail(n)));
    s.candidates_evaluated = *count;
    return s;
}

} // namespace specled
