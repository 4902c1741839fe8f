#pragma once

#include <mfbo/common.hpp>
#include <mfbo/gp.hpp>
#include <mfbo/gp_fit.hpp>
#include <mfbo/hierarchy.hpp>

#include <utility>
#include <vector>

namespace mfbo {

/// Recursive multi-fidelity model: level 1 is a plain GP; each level t >= 2
/// regresses on the frozen posterior mean of the level below through a
/// parametric multiplicative adjustment rho_t(x) = sum_j B_j zeta_j(x) plus an
/// independent discrepancy GP. Training is decoupled: fitting level t reads
/// only level-t data and the already-fitted level t-1.
///
/// Prediction treats the lower level's posterior mean as deterministic and
/// re-inflates the variance afterwards:
///   mean_t(x) = rho_t(x) mean_{t-1}(x) + delta-correction(x)
///   var_t(x)  = delta-posterior-var(x) + rho_t(x)^2 var_{t-1}(x).
class RecursiveModel {
public:
    struct UpperLevel {
        std::vector<MeanFn> basis;  // zeta_j
        Vec coeffs;                 // B
        Gp delta;                   // zero-mean GP conditioned on level residuals
    };

    RecursiveModel(Gp level1, std::vector<UpperLevel> upper)
        : level1_(std::move(level1)), upper_(std::move(upper)) {}

    int levels() const { return 1 + static_cast<int>(upper_.size()); }

    /// Multiplicative adjustment rho_t(x) for level >= 1 (0-based).
    double rho(int level, const Vec& x) const {
        const UpperLevel& u = upper_.at(level - 1);
        double value = 0.0;
        for (std::size_t j = 0; j < u.basis.size(); ++j) value += u.coeffs[j] * u.basis[j](x);
        return value;
    }

    const Vec& coefficients(int level) const { return upper_.at(level - 1).coeffs; }
    const Gp& level1() const { return level1_; }
    const Gp& delta(int level) const { return upper_.at(level - 1).delta; }

    std::pair<double, double> predict(int level, const Vec& x) const {
        auto [m, v] = level1_.predict(x);
        for (int t = 1; t <= level; ++t) {
            const double scale = rho(t, x);
            auto [dm, dv] = upper_[t - 1].delta.predict(x);
            m = scale * m + dm;
            v = dv + scale * scale * v;
        }
        return {m, v};
    }

    /// Joint law over rows of `points` at one level; covariances propagate as
    /// C_t = delta-cov + diag(rho) C_{t-1} diag(rho).
    std::pair<Vec, Mat> joint(int level, const Mat& points) const {
        auto [mu, C] = level1_.joint(points);
        for (int t = 1; t <= level; ++t) {
            Vec scale(points.rows());
            for (Eigen::Index i = 0; i < points.rows(); ++i)
                scale[i] = rho(t, points.row(i).transpose());
            auto [dmu, dC] = upper_[t - 1].delta.joint(points);
            mu = scale.asDiagonal() * mu + dmu;
            C = dC + scale.asDiagonal() * C * scale.asDiagonal();
        }
        return {std::move(mu), std::move(C)};
    }

    /// Correlation between two levels at x. For a <= b,
    /// Cov[f_b, f_a] = (prod_{j=a+1..b} rho_j(x)) var_a(x).
    Correlation correlation(int level_a, int level_b, const Vec& x) const {
        int lo = std::min(level_a, level_b);
        int hi = std::max(level_a, level_b);
        const double var_lo = predict(lo, x).second;
        const double var_hi = predict(hi, x).second;
        if (var_lo <= 1e-12 || var_hi <= 1e-12) return {0.0, true};
        double chain = 1.0;
        for (int j = lo + 1; j <= hi; ++j) chain *= rho(j, x);
        double value = chain * var_lo / std::sqrt(var_lo * var_hi);
        value = std::min(1.0, std::max(-1.0, value));
        return {value, false};
    }

private:
    Gp level1_;
    std::vector<UpperLevel> upper_;
};

/// Constant basis {1}: rho_t is a scalar fitted by generalized least squares.
inline std::vector<MeanFn> constant_basis() { return {constant_mean(1.0)}; }

/// Polynomial basis {1, x_1, ..., x_d} (degree 1) or plus squares (degree 2).
inline std::vector<MeanFn> polynomial_basis(int dim, int degree) {
    if (degree < 0 || degree > 2)
        throw ArgumentError("polynomial_basis: degree must be 0, 1, or 2");
    std::vector<MeanFn> basis = constant_basis();
    for (int deg = 1; deg <= degree; ++deg)
        for (int i = 0; i < dim; ++i)
            basis.push_back([i, deg](const Vec& x) { return std::pow(x[i], deg); });
    return basis;
}

/// Fit the recursive model bottom-up. Level 1 is a plain maximum-marginal-
/// likelihood GP; every level above profiles its B coefficients by GLS inside
/// the marginal-likelihood search for the discrepancy kernel.
inline RecursiveModel fit_recursive(const FidelityHierarchy& hierarchy,
                                    const std::vector<std::vector<MeanFn>>& basis_per_level,
                                    const std::vector<KernelSpec>& kernel_inits,
                                    const FitOptions& options = {}) {
    hierarchy.validate();
    const int T = hierarchy.levels();
    if (static_cast<int>(kernel_inits.size()) != T)
        throw ArgumentError("fit_recursive: one kernel spec per level required");
    if (static_cast<int>(basis_per_level.size()) != T - 1)
        throw ArgumentError("fit_recursive: one basis per upper level required");

    auto level_options = [&](int t) {
        FitOptions opts = options;
        opts.seed = Rng(options.seed).fork(1000 + t).seed();
        return opts;
    };

    const Dataset& base = hierarchy.datasets[0];
    if (base.size() < 2 && !(options.bounds && options.bounds->all_parameters_fixed()))
        throw ArgumentError("fit_recursive: level 1 needs at least 2 points");
    KernelSpec spec1 = (options.bounds && options.bounds->all_parameters_fixed())
                           ? kernel_inits[0]
                           : fit_hyperparameters(kernel_inits[0], base, level_options(0));
    Gp level1 = Gp::from_spec(spec1).condition(base);

    std::vector<RecursiveModel::UpperLevel> upper;
    RecursiveModel partial(level1, {});
    for (int t = 1; t < T; ++t) {
        const Dataset& data = hierarchy.datasets[t];
        const auto& basis = basis_per_level[t - 1];
        if (basis.empty()) throw ArgumentError("fit_recursive: empty multiplicative basis");
        if (data.size() < static_cast<int>(basis.size()))
            throw ArgumentError("fit_recursive: fewer level points than basis functions");

        // Regressors: zeta_j(x) * (frozen posterior mean of the level below).
        Vec prev_mean(data.size());
        for (int i = 0; i < data.size(); ++i)
            prev_mean[i] = partial.predict(t - 1, data.inputs.row(i).transpose()).first;
        Mat H(data.size(), basis.size());
        for (int i = 0; i < data.size(); ++i)
            for (std::size_t j = 0; j < basis.size(); ++j)
                H(i, j) = basis[j](data.inputs.row(i).transpose()) * prev_mean[i];

        GlsFitResult fit =
            fit_hyperparameters_gls(kernel_inits[t], data.inputs, data.outputs, H,
                                    level_options(t));

        Vec residuals = data.outputs - H * fit.coefficients;
        Gp delta = Gp::from_spec(fit.spec).condition(Dataset(data.inputs, residuals));

        upper.push_back({basis, fit.coefficients, std::move(delta)});
        partial = RecursiveModel(level1, upper);
    }
    return partial;
}

}  // namespace mfbo
