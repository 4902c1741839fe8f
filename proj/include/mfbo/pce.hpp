#pragma once

#include <mfbo/common.hpp>
#include <mfbo/rng.hpp>

#include <Eigen/QR>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace mfbo {

enum class Marginal { UniformMinusOneOne, StandardNormal };

/// Independent random inputs; the basis family follows the marginal per
/// dimension (Legendre for uniform, probabilists' Hermite for normal).
struct RandomInput {
    std::vector<Marginal> marginals;

    int dim() const { return static_cast<int>(marginals.size()); }

    static RandomInput uniform(int d) {
        return RandomInput{std::vector<Marginal>(d, Marginal::UniformMinusOneOne)};
    }
    static RandomInput normal(int d) {
        return RandomInput{std::vector<Marginal>(d, Marginal::StandardNormal)};
    }
};

using MultiIndex = std::vector<int>;

/// Total-degree multi-index set Lambda_{d,p} = { a : |a|_1 <= p }, graded by
/// degree with the leading coordinate descending inside each degree.
struct MultiIndexSet {
    int dim = 0;
    int order = 0;
    std::vector<MultiIndex> indices;

    int size() const { return static_cast<int>(indices.size()); }
};

namespace detail {

inline void enumerate_degree(int remaining, int position, MultiIndex& current,
                             std::vector<MultiIndex>& out) {
    const int d = static_cast<int>(current.size());
    if (position == d - 1) {
        current[position] = remaining;
        out.push_back(current);
        return;
    }
    for (int value = remaining; value >= 0; --value) {
        current[position] = value;
        enumerate_degree(remaining - value, position + 1, current, out);
    }
}

inline double binomial(int n, int k) {
    double value = 1.0;
    for (int i = 1; i <= k; ++i) value *= static_cast<double>(n - k + i) / i;
    return value;
}

}  // namespace detail

inline MultiIndexSet total_degree_multi_indices(int d, int p) {
    if (d < 1) throw ArgumentError("multi-index set: dimension must be at least 1");
    if (p < 0) throw ArgumentError("multi-index set: order must be non-negative");
    const double cardinality = detail::binomial(p + d, d);
    if (cardinality > 1e6) throw ArgumentError("multi-index set: cardinality exceeds 10^6");

    MultiIndexSet set;
    set.dim = d;
    set.order = p;
    set.indices.reserve(static_cast<std::size_t>(cardinality));
    MultiIndex current(d, 0);
    for (int degree = 0; degree <= p; ++degree)
        detail::enumerate_degree(degree, 0, current, set.indices);
    return set;
}

namespace detail {

/// Legendre polynomial orthonormal under the uniform density 1/2 on [-1,1].
inline double legendre_orthonormal(int degree, double x) {
    double prev = 1.0, cur = x;
    if (degree == 0) return 1.0;
    for (int k = 1; k < degree; ++k) {
        double next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return std::sqrt(2.0 * degree + 1.0) * cur;
}

/// Probabilists' Hermite polynomial orthonormal under the standard normal law,
/// evaluated through the normalized recurrence to avoid factorial overflow.
inline double hermite_orthonormal(int degree, double x) {
    double prev = 1.0, cur = x;
    if (degree == 0) return 1.0;
    for (int k = 1; k < degree; ++k) {
        double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                      std::sqrt(static_cast<double>(k + 1));
        prev = cur;
        cur = next;
    }
    return cur;
}

}  // namespace detail

/// Product orthonormal basis function psi_alpha(xi).
inline double basis_eval(const RandomInput& input, const MultiIndex& alpha, const Vec& xi) {
    if (static_cast<int>(alpha.size()) != input.dim() || xi.size() != input.dim())
        throw ArgumentError("basis_eval: dimension mismatch");
    double value = 1.0;
    for (int i = 0; i < input.dim(); ++i) {
        if (alpha[i] < 0) throw ArgumentError("basis_eval: negative index");
        switch (input.marginals[i]) {
            case Marginal::UniformMinusOneOne:
                value *= detail::legendre_orthonormal(alpha[i], xi[i]);
                break;
            case Marginal::StandardNormal:
                value *= detail::hermite_orthonormal(alpha[i], xi[i]);
                break;
        }
    }
    return value;
}

/// Truncated polynomial chaos surrogate: mean and variance read directly off
/// the coefficients thanks to basis orthonormality.
struct PceSurrogate {
    RandomInput input;
    MultiIndexSet index_set;
    Vec coefficients;
    bool low_oversampling = false;  // fit had fewer than 1.5 K samples

    double predict(const Vec& xi) const {
        double value = 0.0;
        for (int k = 0; k < index_set.size(); ++k)
            value += coefficients[k] * basis_eval(input, index_set.indices[k], xi);
        return value;
    }
};

/// Least-squares PCE fit (orthogonal-triangular factorization, not normal
/// equations). Requires at least K samples; flags oversampling below 1.5 K.
inline PceSurrogate fit_pce_least_squares(const RandomInput& input,
                                          const MultiIndexSet& index_set, const Mat& xs,
                                          const Vec& ys) {
    const int n = static_cast<int>(xs.rows());
    const int K = index_set.size();
    if (xs.cols() != input.dim())
        throw ArgumentError("pce fit: sample dimension does not match input spec");
    if (ys.size() != n) throw ArgumentError("pce fit: inputs and outputs differ in length");
    if (n < K) throw ArgumentError("pce fit: need at least as many samples as basis functions");

    Mat design(n, K);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < K; ++k)
            design(i, k) = basis_eval(input, index_set.indices[k], xs.row(i).transpose());

    Eigen::ColPivHouseholderQR<Mat> qr(design);
    if (qr.rank() < K) throw NumericalError("pce fit: rank-deficient design matrix");

    PceSurrogate surrogate;
    surrogate.input = input;
    surrogate.index_set = index_set;
    surrogate.coefficients = qr.solve(ys);
    surrogate.low_oversampling = n < static_cast<int>(std::ceil(1.5 * K));
    return surrogate;
}

/// Additive-correction multi-fidelity PCE: a low-fidelity surrogate plus a
/// discrepancy surrogate fitted to high-fidelity residuals against the LF
/// surrogate's predictions at the HF sample locations.
struct MfPceSurrogate {
    PceSurrogate lf;
    PceSurrogate discrepancy;

    double predict(const Vec& xi) const { return lf.predict(xi) + discrepancy.predict(xi); }
};

inline MfPceSurrogate fit_mf_pce(const RandomInput& input, const MultiIndexSet& lf_set,
                                 const MultiIndexSet& discrepancy_set, const Mat& lf_xs,
                                 const Vec& lf_ys, const Mat& hf_xs, const Vec& hf_ys) {
    MfPceSurrogate surrogate;
    surrogate.lf = fit_pce_least_squares(input, lf_set, lf_xs, lf_ys);
    Vec residuals(hf_ys.size());
    for (int i = 0; i < hf_ys.size(); ++i)
        residuals[i] = hf_ys[i] - surrogate.lf.predict(hf_xs.row(i).transpose());
    surrogate.discrepancy = fit_pce_least_squares(input, discrepancy_set, hf_xs, residuals);
    return surrogate;
}

/// Default discrepancy order: one below the LF order, floored at 1.
inline int default_discrepancy_order(int lf_order) { return std::max(1, lf_order - 1); }

struct PceMoments {
    double mean = 0.0;
    double variance = 0.0;
    Vec main_sobol;  // one main-effect index per input dimension
    bool degenerate = false;
};

inline PceMoments pce_moments(const PceSurrogate& surrogate) {
    const int d = surrogate.input.dim();
    PceMoments moments;
    moments.main_sobol = Vec::Zero(d);

    Vec main_contrib = Vec::Zero(d);
    for (int k = 0; k < surrogate.index_set.size(); ++k) {
        const MultiIndex& alpha = surrogate.index_set.indices[k];
        const double c2 = surrogate.coefficients[k] * surrogate.coefficients[k];
        int active = -1;
        bool multi = false;
        for (int i = 0; i < d; ++i) {
            if (alpha[i] > 0) {
                multi = active >= 0;
                if (active < 0) active = i;
            }
        }
        if (active < 0) {
            moments.mean = surrogate.coefficients[k];
            continue;
        }
        moments.variance += c2;
        if (!multi) main_contrib[active] += c2;
    }
    if (moments.variance > 0.0) {
        moments.main_sobol = main_contrib / moments.variance;
    } else {
        moments.degenerate = true;
    }
    return moments;
}

/// Monte Carlo estimate of E[fn(Xi)] with its unbiased variance and the MSE
/// of the mean estimator, variance / m.
struct McEstimate {
    double mean = 0.0;
    double variance = 0.0;
    int samples = 0;
    double mse = 0.0;
};

inline McEstimate mc_estimate(const std::function<double(const Vec&)>& fn,
                              const RandomInput& input, int m, std::uint64_t seed) {
    if (m < 2) throw ArgumentError("mc_estimate: need at least 2 samples");
    Rng rng(seed);
    const int d = input.dim();
    double sum = 0.0, sum_sq = 0.0;
    Vec xi(d);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < d; ++j)
            xi[j] = input.marginals[j] == Marginal::UniformMinusOneOne ? rng.uniform(-1.0, 1.0)
                                                                       : rng.normal();
        const double y = fn(xi);
        if (!std::isfinite(y))
            throw NumericalError("mc_estimate: non-finite output at sample " + std::to_string(i));
        sum += y;
        sum_sq += y * y;
    }
    McEstimate estimate;
    estimate.samples = m;
    estimate.mean = sum / m;
    estimate.variance = std::max(0.0, (sum_sq - m * estimate.mean * estimate.mean) / (m - 1));
    estimate.mse = estimate.variance / m;
    return estimate;
}

}  // namespace mfbo
