#pragma once

#include <mfbo/common.hpp>
#include <mfbo/lowdisc.hpp>

#include <functional>
#include <optional>

namespace mfbo {

struct MaximizeResult {
    Vec x;
    double value = 0.0;
};

namespace detail {

/// Derivative-free compass search inside a box. Returns the refined point and
/// its score, or nullopt if any evaluation along the way was non-finite.
inline std::optional<MaximizeResult> compass_search(
    const std::function<double(const Vec&)>& score, const Domain& domain, Vec x,
    int max_evals = 4000) {
    const int d = domain.dim();
    Vec range = domain.upper - domain.lower;
    Vec step = 0.25 * range;

    x = domain.clamp(std::move(x));
    double fx = score(x);
    if (!std::isfinite(fx)) return std::nullopt;
    int evals = 1;

    while (evals < max_evals && (step.array() / range.array()).maxCoeff() > 1e-9) {
        bool improved = false;
        for (int j = 0; j < d; ++j) {
            for (double sign : {+1.0, -1.0}) {
                Vec cand = x;
                cand[j] = std::min(std::max(cand[j] + sign * step[j], domain.lower[j]),
                                   domain.upper[j]);
                if (cand[j] == x[j]) continue;
                const double fc = score(cand);
                ++evals;
                if (!std::isfinite(fc)) return std::nullopt;
                if (fc > fx) {
                    x = std::move(cand);
                    fx = fc;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return MaximizeResult{std::move(x), fx};
}

}  // namespace detail

/// Multi-start maximization of an acquisition surface over a box: quasi-random
/// starts refined by compass search. Starts that hit a non-finite score are
/// discarded; ties between starts resolve to the lowest start index.
inline MaximizeResult maximize_acquisition(const std::function<double(const Vec&)>& score,
                                           const Domain& domain, int starts,
                                           std::uint64_t seed) {
    if (starts < 1) throw ArgumentError("maximize_acquisition: need at least one start");
    Mat start_points = low_discrepancy_design(domain, starts, Rng(seed).fork(0x51).seed());

    std::optional<MaximizeResult> best;
    for (int s = 0; s < starts; ++s) {
        auto refined = detail::compass_search(score, domain, start_points.row(s).transpose());
        if (refined && (!best || refined->value > best->value)) best = refined;
    }
    if (!best)
        throw NumericalError("maximize_acquisition: every start produced non-finite scores");
    return *best;
}

}  // namespace mfbo
