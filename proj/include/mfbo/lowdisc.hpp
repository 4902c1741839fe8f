#pragma once

#include <mfbo/common.hpp>
#include <mfbo/rng.hpp>

#include <vector>

namespace mfbo {

namespace detail {

inline constexpr int kHaltonPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                        31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
inline constexpr int kMaxHaltonDim = static_cast<int>(std::size(kHaltonPrimes));

inline double radical_inverse(int base, std::uint64_t index) {
    double inv_base = 1.0 / base;
    double scale = inv_base;
    double value = 0.0;
    while (index > 0) {
        value += static_cast<double>(index % base) * scale;
        index /= base;
        scale *= inv_base;
    }
    return value;
}

}  // namespace detail

/// First `count` Halton points in [0,1)^dim, randomized by a seeded
/// Cranley-Patterson rotation. The rotation keeps the low-discrepancy
/// structure while making designs differ across seeds.
inline Mat halton_points(int count, int dim, std::uint64_t seed) {
    if (dim < 1 || dim > detail::kMaxHaltonDim)
        throw ArgumentError("halton_points: dimension must be in [1, 20]");
    if (count < 1) throw ArgumentError("halton_points: count must be positive");

    Rng rng(seed);
    Vec shift(dim);
    for (int j = 0; j < dim; ++j) shift[j] = rng.uniform();

    Mat pts(count, dim);
    for (int i = 0; i < count; ++i) {
        for (int j = 0; j < dim; ++j) {
            double u = detail::radical_inverse(detail::kHaltonPrimes[j], i + 1) + shift[j];
            pts(i, j) = u - std::floor(u);
        }
    }
    return pts;
}

/// Quasi-random design of `count` points inside `domain`; deterministic given the seed.
inline Mat low_discrepancy_design(const Domain& domain, int count, std::uint64_t seed) {
    Mat unit = halton_points(count, domain.dim(), seed);
    for (int i = 0; i < unit.rows(); ++i)
        for (int j = 0; j < unit.cols(); ++j)
            unit(i, j) = domain.lower[j] + (domain.upper[j] - domain.lower[j]) * unit(i, j);
    return unit;
}

/// Per-level initial designs (inputs only). Levels use decorrelated substreams
/// so a level's design does not change when another level's count does.
inline std::vector<Mat> initial_design(const Domain& domain, const std::vector<int>& n_per_level,
                                       std::uint64_t seed) {
    if (n_per_level.empty()) throw ArgumentError("initial_design: no levels given");
    for (int n : n_per_level)
        if (n < 1) throw ArgumentError("initial_design: every level needs at least one point");

    Rng root(seed);
    std::vector<Mat> designs;
    designs.reserve(n_per_level.size());
    for (std::size_t level = 0; level < n_per_level.size(); ++level)
        designs.push_back(
            low_discrepancy_design(domain, n_per_level[level], root.fork(level).seed()));
    return designs;
}

}  // namespace mfbo
