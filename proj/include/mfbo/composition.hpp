#pragma once

#include <mfbo/common.hpp>
#include <mfbo/gp.hpp>
#include <mfbo/gp_fit.hpp>
#include <mfbo/hierarchy.hpp>

#include <utility>
#include <vector>

namespace mfbo {

/// Simplified nonlinear auto-regressive model: each level t >= 2 is a GP over
/// the augmented input (x, mean_{t-1}(x)) with a product kernel, so the level
/// below enters through its posterior mean as a deterministic extra
/// coordinate. Uncertainty is not propagated through the composition.
class NonlinearArModel {
public:
    NonlinearArModel(Gp level1, std::vector<Gp> upper)
        : level1_(std::move(level1)), upper_(std::move(upper)) {}

    int levels() const { return 1 + static_cast<int>(upper_.size()); }

    Vec augment(int level, const Vec& x) const {
        Vec aug(x.size() + 1);
        aug.head(x.size()) = x;
        aug[x.size()] = predict(level - 1, x).first;
        return aug;
    }

    std::pair<double, double> predict(int level, const Vec& x) const {
        if (level == 0) return level1_.predict(x);
        return upper_[level - 1].predict(augment(level, x));
    }

    std::pair<Vec, Mat> joint(int level, const Mat& points) const {
        if (level == 0) return level1_.joint(points);
        Mat aug(points.rows(), points.cols() + 1);
        for (Eigen::Index i = 0; i < points.rows(); ++i)
            aug.row(i) = augment(level, points.row(i).transpose()).transpose();
        return upper_[level - 1].joint(aug);
    }

private:
    Gp level1_;
    std::vector<Gp> upper_;
};

inline NonlinearArModel fit_nonlinear_autoregressive(const FidelityHierarchy& hierarchy,
                                                     const std::vector<KernelSpec>& kernel_inits,
                                                     const FitOptions& options = {}) {
    hierarchy.validate();
    const int T = hierarchy.levels();
    if (static_cast<int>(kernel_inits.size()) != T)
        throw ArgumentError("fit_nonlinear_autoregressive: one kernel spec per level required");
    const int d = hierarchy.dim();

    auto level_options = [&](int t) {
        FitOptions opts = options;
        opts.seed = Rng(options.seed).fork(2000 + t).seed();
        return opts;
    };
    const bool fixed = options.bounds && options.bounds->all_parameters_fixed();

    KernelSpec spec1 = fixed ? kernel_inits[0]
                             : fit_hyperparameters(kernel_inits[0], hierarchy.datasets[0],
                                                   level_options(0));
    Gp level1 = Gp::from_spec(spec1).condition(hierarchy.datasets[0]);

    std::vector<Gp> upper;
    NonlinearArModel partial(level1, {});
    for (int t = 1; t < T; ++t) {
        const Dataset& data = hierarchy.datasets[t];
        if (data.empty())
            throw ArgumentError("fit_nonlinear_autoregressive: empty dataset at a level");

        Mat aug(data.size(), d + 1);
        for (int i = 0; i < data.size(); ++i)
            aug.row(i) = partial.augment(t, data.inputs.row(i).transpose()).transpose();
        Dataset aug_data(aug, data.outputs);

        KernelSpec init = kernel_inits[t];
        if (init.dim() == d) {
            // extend the design kernel with a lengthscale for the feature axis
            KernelSpec extended = init;
            extended.lengthscales = Vec(d + 1);
            extended.lengthscales.head(d) = init.lengthscales;
            extended.lengthscales[d] = 1.0;
            extended.family = KernelFamily::ProductWithFidelity;
            init = extended;
        }
        KernelSpec fitted =
            fixed ? init : fit_hyperparameters(init, aug_data, level_options(t));
        upper.push_back(Gp::from_spec(fitted).condition(aug_data));
        partial = NonlinearArModel(level1, upper);
    }
    return partial;
}

}  // namespace mfbo
