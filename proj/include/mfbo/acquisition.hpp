#pragma once

#include <mfbo/common.hpp>
#include <mfbo/gp.hpp>
#include <mfbo/rng.hpp>

#include <cmath>
#include <numbers>

namespace mfbo {

inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Expected improvement below the incumbent (minimization convention):
/// (y* - mu) Phi(z) + sigma phi(z) with z = (y* - mu) / sigma.
inline double expected_improvement(double mean, double sd, double incumbent) {
    if (sd < 0.0) throw ArgumentError("expected_improvement: negative standard deviation");
    const double gap = incumbent - mean;
    if (sd == 0.0) return std::max(gap, 0.0);
    const double z = gap / sd;
    return std::max(0.0, gap * normal_cdf(z) + sd * normal_pdf(z));
}

/// Maximizing this score minimizes the lower confidence bound mean - beta sd.
inline double ucb_score(double mean, double sd, double beta) {
    if (sd < 0.0) throw ArgumentError("ucb_score: negative standard deviation");
    if (beta < 0.0) throw ArgumentError("ucb_score: beta must be non-negative");
    return -mean + beta * sd;
}

/// One joint draw from N(mean, cov); returns the argmin index, ties to the
/// lowest index. Deterministic given the seed.
inline int thompson_select(const Vec& mean, const Mat& cov, std::uint64_t seed) {
    if (mean.size() == 0) throw ArgumentError("thompson_select: no candidates");
    if (cov.rows() != mean.size() || cov.cols() != mean.size())
        throw ArgumentError("thompson_select: covariance shape mismatch");
    Rng rng(seed);
    Vec sample = mean;
    if (cov.cwiseAbs().maxCoeff() > 0.0) {
        Mat L = cholesky_with_jitter(cov);
        Vec z(mean.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
        sample += L * z;
    }
    int best = 0;
    for (Eigen::Index i = 1; i < sample.size(); ++i)
        if (sample[i] < sample[best]) best = static_cast<int>(i);
    return best;
}

/// Thompson sampling over a candidate set under a GP posterior.
inline int thompson_select(const Gp& posterior, const Mat& candidates, std::uint64_t seed) {
    if (candidates.rows() == 0) throw ArgumentError("thompson_select: no candidates");
    auto [mean, cov] = posterior.joint(candidates);
    return thompson_select(mean, cov, seed);
}

/// Cost-aware fidelity scaling alpha(x, t) = alpha(x) / c(t).
inline double mf_score_cost(double base_score, double cost) {
    if (!(cost > 0.0)) throw ArgumentError("mf_score_cost: cost must be strictly positive");
    if (!std::isfinite(base_score)) throw ArgumentError("mf_score_cost: non-finite base score");
    return base_score / cost;
}

/// Correlation-aware fidelity scaling alpha(x, t) = alpha(x) * Cor; negative
/// correlations clamp to zero so anti-correlated cheap levels earn nothing.
inline double mf_score_correlation(double base_score, double corr) {
    if (std::abs(corr) > 1.0 + 1e-9)
        throw ArgumentError("mf_score_correlation: correlation outside [-1, 1]");
    return base_score * std::max(corr, 0.0);
}

/// Epsilon-greedy mixing: with probability epsilon replace the adaptive choice
/// by a uniform point in the domain.
inline Vec epsilon_greedy_pick(const Vec& adaptive_choice, const Domain& domain, double epsilon,
                               Rng& rng) {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw ArgumentError("epsilon_greedy_pick: epsilon must lie in [0, 1]");
    if (rng.uniform() >= epsilon) return adaptive_choice;
    Vec x(domain.dim());
    for (int i = 0; i < domain.dim(); ++i) x[i] = rng.uniform(domain.lower[i], domain.upper[i]);
    return x;
}

inline Vec epsilon_greedy_pick(const Vec& adaptive_choice, const Domain& domain, double epsilon,
                               std::uint64_t seed) {
    Rng rng(seed);
    return epsilon_greedy_pick(adaptive_choice, domain, epsilon, rng);
}

enum class AcquisitionKind { ExpectedImprovement, UpperConfidenceBound, ThompsonSampling };

struct AcquisitionSpec {
    AcquisitionKind kind = AcquisitionKind::ExpectedImprovement;
    double ucb_beta = 2.0;
    int ts_candidates = 512;

    void validate() const {
        if (ucb_beta < 0.0) throw ArgumentError("acquisition: beta must be non-negative");
        if (ts_candidates < 1)
            throw ArgumentError("acquisition: thompson candidate count must be at least 1");
    }
};

enum class MfPolicyMode { SingleFidelity, JointCost, JointCorrelation, TwoStage };

struct MfPolicySpec {
    MfPolicyMode mode = MfPolicyMode::TwoStage;
    double epsilon = 0.0;
    int force_hf_after = 10;  // consecutive low-fidelity picks before a forced HF run

    void validate() const {
        if (epsilon < 0.0 || epsilon > 1.0)
            throw ArgumentError("policy: epsilon must lie in [0, 1]");
        if (force_hf_after < 1)
            throw ArgumentError("policy: forced-HF interval must be at least 1");
    }
};

}  // namespace mfbo
