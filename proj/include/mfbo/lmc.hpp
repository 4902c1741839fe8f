#pragma once

#include <mfbo/common.hpp>
#include <mfbo/gp.hpp>
#include <mfbo/hierarchy.hpp>
#include <mfbo/kernel.hpp>
#include <mfbo/rng.hpp>

#include <utility>
#include <vector>

namespace mfbo {

/// A (level, location) pair indexing one output of a multi-output prior.
struct LevelPoint {
    int level = 0;
    Vec x;
};

/// Linear model of coregionalization: f(x) = m(x) + R delta(x) with
/// independent latent GPs delta_i, giving the joint prior
/// Cov[f_s(x), f_t(x')] = sum_i R_si R_ti kappa_i(x, x').
struct LmcPrior {
    Mat mixing;                              // R, T x T
    std::vector<KernelSpec> latent_kernels;  // kappa_i
    std::vector<MeanFn> mean_fns;            // per level; empty means zero

    int levels() const { return static_cast<int>(mixing.rows()); }

    double mean(int level, const Vec& x) const {
        if (mean_fns.empty() || !mean_fns[level]) return 0.0;
        return mean_fns[level](x);
    }

    double cross_cov(int s, int t, const Vec& x, const Vec& y) const {
        double value = 0.0;
        for (int i = 0; i < levels(); ++i) {
            const double weight = mixing(s, i) * mixing(t, i);
            if (weight != 0.0) value += weight * kernel_eval(latent_kernels[i], x, y);
        }
        return value;
    }

    /// Joint Gaussian law over an arbitrary set of (level, point) pairs.
    std::pair<Vec, Mat> joint(const std::vector<LevelPoint>& pts) const {
        const int m = static_cast<int>(pts.size());
        Vec mu(m);
        Mat C(m, m);
        for (int i = 0; i < m; ++i) {
            mu[i] = mean(pts[i].level, pts[i].x);
            for (int j = 0; j <= i; ++j) {
                const double c = cross_cov(pts[i].level, pts[j].level, pts[i].x, pts[j].x);
                C(i, j) = c;
                C(j, i) = c;
            }
        }
        return {std::move(mu), std::move(C)};
    }
};

inline LmcPrior build_lmc(Mat mixing, std::vector<KernelSpec> latent_kernels,
                          std::vector<MeanFn> mean_fns = {}) {
    if (mixing.rows() != mixing.cols()) throw ArgumentError("build_lmc: mixing matrix not square");
    if (static_cast<int>(latent_kernels.size()) != mixing.rows())
        throw ArgumentError("build_lmc: need one latent kernel per level");
    if (!mean_fns.empty() && static_cast<int>(mean_fns.size()) != mixing.rows())
        throw ArgumentError("build_lmc: mean function count does not match level count");
    for (const auto& spec : latent_kernels) spec.validate();
    return LmcPrior{std::move(mixing), std::move(latent_kernels), std::move(mean_fns)};
}

/// LMC prior conditioned on per-level observations; exposes the joint
/// posterior over any (level, point) set.
class MultiOutputGp {
public:
    explicit MultiOutputGp(LmcPrior prior) : prior_(std::move(prior)) {}

    MultiOutputGp(LmcPrior prior, const std::vector<Dataset>& data, const Vec& noise_per_level)
        : prior_(std::move(prior)) {
        if (static_cast<int>(data.size()) != prior_.levels())
            throw ArgumentError("multi-output gp: one dataset per level required");
        if (noise_per_level.size() != prior_.levels())
            throw ArgumentError("multi-output gp: one noise variance per level required");
        for (int t = 0; t < prior_.levels(); ++t)
            for (int i = 0; i < data[t].size(); ++i) {
                obs_.push_back({t, data[t].inputs.row(i).transpose()});
                y_.conservativeResize(y_.size() + 1);
                y_[y_.size() - 1] = data[t].outputs[i];
                noise_.conservativeResize(noise_.size() + 1);
                noise_[noise_.size() - 1] = noise_per_level[t];
            }
        if (!obs_.empty()) {
            auto [mu, K] = prior_.joint(obs_);
            K.diagonal() += noise_;
            L_ = cholesky_with_jitter(K);
            Vec r = y_ - mu;
            alpha_ = L_.triangularView<Eigen::Lower>().solve(r);
            alpha_ = L_.transpose().triangularView<Eigen::Upper>().solve(alpha_);
        }
    }

    const LmcPrior& prior() const { return prior_; }
    bool has_data() const { return !obs_.empty(); }

    std::pair<Vec, Mat> joint(const std::vector<LevelPoint>& pts) const {
        auto [mu, C] = prior_.joint(pts);
        if (!has_data()) return {std::move(mu), std::move(C)};
        Mat Kxp(obs_.size(), pts.size());
        for (std::size_t i = 0; i < obs_.size(); ++i)
            for (std::size_t j = 0; j < pts.size(); ++j)
                Kxp(i, j) =
                    prior_.cross_cov(obs_[i].level, pts[j].level, obs_[i].x, pts[j].x);
        mu += Kxp.transpose() * alpha_;
        Mat V = L_.triangularView<Eigen::Lower>().solve(Kxp);
        C -= V.transpose() * V;
        return {std::move(mu), std::move(C)};
    }

    std::pair<double, double> predict(int level, const Vec& x) const {
        auto [mu, C] = joint({{level, x}});
        return {mu[0], std::max(C(0, 0), 0.0)};
    }

    Vec sample(const std::vector<LevelPoint>& pts, Rng& rng) const {
        auto [mu, C] = joint(pts);
        Mat L = cholesky_with_jitter(C);
        Vec z(mu.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
        return mu + L * z;
    }

private:
    LmcPrior prior_;
    std::vector<LevelPoint> obs_;
    Vec y_;
    Vec noise_;
    Mat L_;
    Vec alpha_;
};

/// Kennedy-O'Hagan auto-regressive hierarchy f_1 = delta_1,
/// f_t = rho_t f_{t-1} + delta_t. A special case of the LMC whose mixing
/// matrix is unit lower-triangular with R_{t,u} = prod_{j=u+1..t} rho_j.
struct AutoRegressivePrior {
    Vec rho;  // rho_2..rho_T
    std::vector<KernelSpec> level_kernels;
    LmcPrior lmc;

    int levels() const { return static_cast<int>(level_kernels.size()); }
    const LmcPrior& as_lmc() const { return lmc; }
};

inline AutoRegressivePrior build_autoregressive(Vec correlation_coeffs,
                                                std::vector<KernelSpec> level_kernels,
                                                std::vector<MeanFn> mean_fns = {}) {
    const int T = static_cast<int>(level_kernels.size());
    if (T < 1) throw ArgumentError("build_autoregressive: at least one level required");
    if (correlation_coeffs.size() != T - 1)
        throw ArgumentError("build_autoregressive: need T-1 correlation coefficients");

    Mat R = Mat::Identity(T, T);
    for (int t = 0; t < T; ++t)
        for (int u = 0; u < t; ++u) {
            double prod = 1.0;
            for (int j = u + 1; j <= t; ++j) prod *= correlation_coeffs[j - 1];
            R(t, u) = prod;
        }

    AutoRegressivePrior prior;
    prior.rho = std::move(correlation_coeffs);
    prior.level_kernels = level_kernels;
    prior.lmc = build_lmc(std::move(R), std::move(level_kernels), std::move(mean_fns));
    return prior;
}

/// Posterior (or prior) correlation between two levels at a point, computed
/// from the 2x2 joint law. Zero-variance levels report 0 with the degenerate
/// flag instead of NaN.
inline Correlation correlation_from_joint(const Mat& C) {
    const double va = C(0, 0);
    const double vb = C(1, 1);
    if (va <= 1e-12 || vb <= 1e-12) return {0.0, true};
    double value = C(0, 1) / std::sqrt(va * vb);
    value = std::min(1.0, std::max(-1.0, value));
    return {value, false};
}

inline Correlation posterior_correlation(const MultiOutputGp& model, const Vec& x, int level_a,
                                         int level_b) {
    auto [mu, C] = model.joint({{level_a, x}, {level_b, x}});
    return correlation_from_joint(C);
}

inline Correlation posterior_correlation(const LmcPrior& prior, const Vec& x, int level_a,
                                         int level_b) {
    auto [mu, C] = prior.joint({{level_a, x}, {level_b, x}});
    return correlation_from_joint(C);
}

inline Correlation posterior_correlation(const AutoRegressivePrior& prior, const Vec& x,
                                         int level_a, int level_b) {
    return posterior_correlation(prior.lmc, x, level_a, level_b);
}

}  // namespace mfbo
