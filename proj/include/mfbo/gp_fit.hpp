#pragma once

#include <mfbo/gp.hpp>
#include <mfbo/lowdisc.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>

namespace mfbo {

/// Log marginal likelihood of `data` under a zero-noise-free GP prior with the
/// given kernel spec (noise taken from the spec) and optional mean function.
inline double log_marginal_likelihood(const KernelSpec& spec, const Dataset& data,
                                      const MeanFn& mean = nullptr) {
    if (data.empty()) throw ArgumentError("log_marginal_likelihood: empty dataset");
    const int n = data.size();
    Mat K = kernel_gram(spec, data.inputs);
    K.diagonal().array() += spec.noise_variance;
    Mat L = cholesky_with_jitter(K);
    Vec r = data.outputs;
    if (mean)
        for (int i = 0; i < n; ++i) r[i] -= mean(data.inputs.row(i).transpose());
    Vec v = L.triangularView<Eigen::Lower>().solve(r);
    double log_det_half = L.diagonal().array().log().sum();
    return -0.5 * v.squaredNorm() - log_det_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

namespace detail {

/// Gram derivative with respect to hyperparameter `which` (0..d-1 lengthscales,
/// d amplitude, d+1 noise variance), in the parameter itself (not log space).
inline Mat gram_derivative(const KernelSpec& spec, const Mat& X, int which) {
    const Eigen::Index n = X.rows();
    const int d = spec.dim();
    Mat dK(n, n);
    if (which == d + 1) return Mat::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const Vec a = X.row(i).transpose();
            const Vec b = X.row(j).transpose();
            const double g = (which < d) ? kernel_grad_lengthscale(spec, a, b, which)
                                         : kernel_grad_amplitude(spec, a, b);
            dK(i, j) = g;
            dK(j, i) = g;
        }
    }
    return dK;
}

}  // namespace detail

/// Gradient of the log marginal likelihood with respect to the log of each
/// hyperparameter, ordered [log gamma_1..d, log amplitude, log noise_variance].
/// The noise entry is zero when the spec's noise is zero.
inline Vec log_marginal_likelihood_gradient(const KernelSpec& spec, const Dataset& data,
                                            const MeanFn& mean = nullptr) {
    if (data.empty()) throw ArgumentError("lml gradient: empty dataset");
    const int n = data.size();
    const int d = spec.dim();
    Mat K = kernel_gram(spec, data.inputs);
    K.diagonal().array() += spec.noise_variance;
    Mat L = cholesky_with_jitter(K);
    Vec r = data.outputs;
    if (mean)
        for (int i = 0; i < n; ++i) r[i] -= mean(data.inputs.row(i).transpose());
    Vec alpha = L.triangularView<Eigen::Lower>().solve(r);
    alpha = L.transpose().triangularView<Eigen::Upper>().solve(alpha);
    Mat Kinv = L.transpose().triangularView<Eigen::Upper>().solve(
        L.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n)));

    Vec grad(d + 2);
    for (int which = 0; which < d + 2; ++which) {
        const Mat dK = detail::gram_derivative(spec, data.inputs, which);
        const double dlml =
            0.5 * (alpha.dot(dK * alpha) - (Kinv.array() * dK.array()).sum());
        double param = (which < d)    ? spec.lengthscales[which]
                       : (which == d) ? spec.amplitude
                                      : spec.noise_variance;
        grad[which] = dlml * param;  // chain rule into log space
    }
    return grad;
}

/// Box bounds for hyperparameter fitting, in the parameters themselves.
/// Ordering matches the gradient: lengthscales, amplitude, noise variance.
/// An entry with lower == upper is held fixed.
struct HyperBounds {
    Vec lower;
    Vec upper;

    static HyperBounds defaults(int dim) {
        HyperBounds b;
        b.lower = Vec(dim + 2);
        b.upper = Vec(dim + 2);
        for (int i = 0; i < dim + 1; ++i) {
            b.lower[i] = 1e-3;
            b.upper[i] = 1e3;
        }
        b.lower[dim + 1] = 1e-8;
        b.upper[dim + 1] = 1e2;
        return b;
    }

    static HyperBounds all_fixed(const KernelSpec& spec) {
        HyperBounds b;
        const int d = spec.dim();
        b.lower = Vec(d + 2);
        for (int i = 0; i < d; ++i) b.lower[i] = spec.lengthscales[i];
        b.lower[d] = spec.amplitude;
        b.lower[d + 1] = spec.noise_variance;
        b.upper = b.lower;
        return b;
    }

    bool fixed(int i) const { return !(lower[i] < upper[i]); }
    bool all_parameters_fixed() const {
        for (Eigen::Index i = 0; i < lower.size(); ++i)
            if (!fixed(static_cast<int>(i))) return false;
        return true;
    }
};

struct FitOptions {
    int restarts = 8;
    std::uint64_t seed = 0;
    std::optional<HyperBounds> bounds;
    int max_iterations = 150;
};

namespace detail {

inline KernelSpec spec_with_params(KernelSpec spec, const Vec& params) {
    const int d = spec.dim();
    for (int i = 0; i < d; ++i) spec.lengthscales[i] = params[i];
    spec.amplitude = params[d];
    spec.noise_variance = params[d + 1];
    return spec;
}

inline Vec params_of(const KernelSpec& spec) {
    const int d = spec.dim();
    Vec p(d + 2);
    for (int i = 0; i < d; ++i) p[i] = spec.lengthscales[i];
    p[d] = spec.amplitude;
    p[d + 1] = spec.noise_variance;
    return p;
}

/// Projected gradient ascent with backtracking on a box; `fg` returns the
/// objective and writes its gradient. Throws nothing; returns the best point
/// found or nullopt when no finite objective value was ever seen.
template <typename FG>
std::optional<std::pair<Vec, double>> projected_ascent(const FG& fg, Vec x, const Vec& lo,
                                                       const Vec& hi, int max_iter) {
    auto project = [&](Vec v) {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            v[i] = std::min(std::max(v[i], lo[i]), hi[i]);
        return v;
    };
    x = project(std::move(x));
    Vec grad(x.size());
    double fx;
    try {
        fx = fg(x, grad);
    } catch (const NumericalError&) {
        return std::nullopt;
    }
    if (!std::isfinite(fx)) return std::nullopt;

    double step = 0.1;
    for (int iter = 0; iter < max_iter; ++iter) {
        bool moved = false;
        for (int tries = 0; tries < 40; ++tries) {
            Vec cand = project(x + step * grad);
            Vec dir = cand - x;
            if (dir.norm() < 1e-12) break;
            double fc;
            Vec gc(x.size());
            try {
                fc = fg(cand, gc);
            } catch (const NumericalError&) {
                step *= 0.5;
                continue;
            }
            if (std::isfinite(fc) && fc > fx + 1e-4 * grad.dot(dir)) {
                x = std::move(cand);
                fx = fc;
                grad = std::move(gc);
                step = std::min(step * 1.5, 1e2);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved || step < 1e-12) break;
    }
    return std::make_pair(std::move(x), fx);
}

}  // namespace detail

/// Maximum-marginal-likelihood hyperparameters via multi-start projected
/// gradient ascent in log space. Deterministic given the seed. Free versus
/// fixed parameters are controlled through the bounds (lower == upper pins).
inline KernelSpec fit_hyperparameters(const KernelSpec& init, const Dataset& data,
                                      const FitOptions& options = {},
                                      const MeanFn& mean = nullptr) {
    init.validate();
    const int d = init.dim();
    HyperBounds bounds = options.bounds ? *options.bounds : HyperBounds::defaults(d);
    if (bounds.lower.size() != d + 2 || bounds.upper.size() != d + 2)
        throw ArgumentError("fit_hyperparameters: bounds must cover lengthscales, amplitude, noise");
    if (bounds.all_parameters_fixed()) return init;
    if (data.size() < 2) throw ArgumentError("fit_hyperparameters: need at least 2 data points");
    if (data.dim() != d)
        throw ArgumentError("fit_hyperparameters: data dimension does not match kernel");

    std::vector<int> free_idx;
    for (int i = 0; i < d + 2; ++i)
        if (!bounds.fixed(i)) free_idx.push_back(i);
    const int k = static_cast<int>(free_idx.size());

    const Vec base_params = detail::params_of(init);
    auto assemble = [&](const Vec& log_free) {
        Vec params = base_params;
        for (int i = 0; i < k; ++i) params[free_idx[i]] = std::exp(log_free[i]);
        return detail::spec_with_params(init, params);
    };

    auto fg = [&](const Vec& log_free, Vec& grad_out) {
        KernelSpec spec = assemble(log_free);
        double lml = log_marginal_likelihood(spec, data, mean);
        Vec full_grad = log_marginal_likelihood_gradient(spec, data, mean);
        for (int i = 0; i < k; ++i) grad_out[i] = full_grad[free_idx[i]];
        return lml;
    };

    Vec lo(k), hi(k);
    for (int i = 0; i < k; ++i) {
        lo[i] = std::log(bounds.lower[free_idx[i]]);
        hi[i] = std::log(bounds.upper[free_idx[i]]);
    }

    // Start points: the supplied spec, then quasi-random points in the log box.
    std::vector<Vec> starts;
    Vec init_start(k);
    for (int i = 0; i < k; ++i) {
        double p = std::min(std::max(base_params[free_idx[i]], bounds.lower[free_idx[i]]),
                            bounds.upper[free_idx[i]]);
        init_start[i] = std::log(p);
    }
    starts.push_back(init_start);
    if (options.restarts > 1) {
        Mat extra = halton_points(options.restarts - 1, k, Rng(options.seed).fork(0x42).seed());
        for (int s = 0; s < extra.rows(); ++s) {
            Vec pt(k);
            for (int i = 0; i < k; ++i) pt[i] = lo[i] + (hi[i] - lo[i]) * extra(s, i);
            starts.push_back(pt);
        }
    }

    std::optional<std::pair<Vec, double>> best;
    for (const Vec& start : starts) {
        auto result = detail::projected_ascent(fg, start, lo, hi, options.max_iterations);
        if (result && (!best || result->second > best->second)) best = result;
    }
    if (!best) throw NumericalError("fit_hyperparameters: every restart failed");
    return assemble(best->first);
}

inline KernelSpec fit_hyperparameters(const KernelSpec& init, const Dataset& data, int restarts,
                                      std::uint64_t seed = 0) {
    FitOptions options;
    options.restarts = restarts;
    options.seed = seed;
    return fit_hyperparameters(init, data, options);
}

/// Generalized-least-squares coefficients for a linear mean H*B under the
/// Gaussian likelihood with covariance factor L (lower Cholesky).
inline Vec gls_coefficients(const Mat& L, const Mat& H, const Vec& y) {
    Mat Lh = L.triangularView<Eigen::Lower>().solve(H);
    Vec Ly = L.triangularView<Eigen::Lower>().solve(y);
    return (Lh.transpose() * Lh).ldlt().solve(Lh.transpose() * Ly);
}

struct GlsFitResult {
    KernelSpec spec;
    Vec coefficients;
    double lml = 0.0;
};

/// Fit kernel hyperparameters and a profiled linear mean y ~ H*B + GP(0, K):
/// for each candidate spec the coefficients are the GLS optimum, so the
/// reported marginal likelihood is maximized jointly over B and the kernel.
inline GlsFitResult fit_hyperparameters_gls(const KernelSpec& init, const Mat& X, const Vec& y,
                                            const Mat& H, const FitOptions& options = {}) {
    init.validate();
    if (X.rows() != y.size() || X.rows() != H.rows())
        throw ArgumentError("fit_hyperparameters_gls: inconsistent row counts");
    if (H.cols() > H.rows())
        throw ArgumentError("fit_hyperparameters_gls: fewer observations than mean coefficients");
    const int d = init.dim();
    const int n = static_cast<int>(X.rows());

    auto evaluate = [&](const KernelSpec& spec) {
        Mat K = kernel_gram(spec, X);
        K.diagonal().array() += spec.noise_variance;
        Mat L = cholesky_with_jitter(K);
        Vec B = gls_coefficients(L, H, y);
        Vec r = y - H * B;
        Vec v = L.triangularView<Eigen::Lower>().solve(r);
        double lml = -0.5 * v.squaredNorm() - L.diagonal().array().log().sum() -
                     0.5 * n * std::log(2.0 * std::numbers::pi);
        return std::make_tuple(lml, std::move(B), std::move(r));
    };

    HyperBounds bounds = options.bounds ? *options.bounds : HyperBounds::defaults(d);
    GlsFitResult result;
    if (bounds.all_parameters_fixed()) {
        result.spec = init;
        auto [lml, B, r] = evaluate(init);
        result.coefficients = B;
        result.lml = lml;
        return result;
    }

    // Profile B out: the fit is a plain hyperparameter search whose residual
    // (hence gradient) is taken at the per-spec GLS optimum.
    std::vector<int> free_idx;
    for (int i = 0; i < d + 2; ++i)
        if (!bounds.fixed(i)) free_idx.push_back(i);
    const int k = static_cast<int>(free_idx.size());
    const Vec base_params = detail::params_of(init);
    auto assemble = [&](const Vec& log_free) {
        Vec params = base_params;
        for (int i = 0; i < k; ++i) params[free_idx[i]] = std::exp(log_free[i]);
        return detail::spec_with_params(init, params);
    };
    auto fg = [&](const Vec& log_free, Vec& grad_out) {
        KernelSpec spec = assemble(log_free);
        auto [lml, B, r] = evaluate(spec);
        Dataset residual_data(X, r);
        Vec full_grad = log_marginal_likelihood_gradient(spec, residual_data);
        for (int i = 0; i < k; ++i) grad_out[i] = full_grad[free_idx[i]];
        return lml;
    };

    Vec lo(k), hi(k);
    for (int i = 0; i < k; ++i) {
        lo[i] = std::log(bounds.lower[free_idx[i]]);
        hi[i] = std::log(bounds.upper[free_idx[i]]);
    }
    std::vector<Vec> starts;
    Vec init_start(k);
    for (int i = 0; i < k; ++i) {
        double p = std::min(std::max(base_params[free_idx[i]], bounds.lower[free_idx[i]]),
                            bounds.upper[free_idx[i]]);
        init_start[i] = std::log(p);
    }
    starts.push_back(init_start);
    if (options.restarts > 1) {
        Mat extra = halton_points(options.restarts - 1, k, Rng(options.seed).fork(0x43).seed());
        for (int s = 0; s < extra.rows(); ++s) {
            Vec pt(k);
            for (int i = 0; i < k; ++i) pt[i] = lo[i] + (hi[i] - lo[i]) * extra(s, i);
            starts.push_back(pt);
        }
    }

    std::optional<std::pair<Vec, double>> best;
    for (const Vec& start : starts) {
        auto res = detail::projected_ascent(fg, start, lo, hi, options.max_iterations);
        if (res && (!best || res->second > best->second)) best = res;
    }
    if (!best) throw NumericalError("fit_hyperparameters_gls: every restart failed");

    result.spec = assemble(best->first);
    auto [lml, B, r] = evaluate(result.spec);
    result.coefficients = B;
    result.lml = lml;
    return result;
}

}  // namespace mfbo
