#pragma once

#include <mfbo/common.hpp>
#include <mfbo/gp.hpp>
#include <mfbo/gp_fit.hpp>
#include <mfbo/hierarchy.hpp>
#include <mfbo/lmc.hpp>

#include <utility>
#include <vector>

namespace mfbo {

/// Input-augmentation prior: one GP over (x, t) where t is a real fidelity
/// label, conditioned on all levels' data jointly. Levels sit side by side;
/// information moves between them through the fidelity kernel's correlation.
/// High-fidelity predictions are a slice of the extended function at t_H.
class InputAugmentedModel {
public:
    InputAugmentedModel(Gp gp, Vec labels, int hf_index)
        : gp_(std::move(gp)), labels_(std::move(labels)), hf_index_(hf_index) {}

    int levels() const { return static_cast<int>(labels_.size()); }
    int hf_index() const { return hf_index_; }
    const Vec& labels() const { return labels_; }
    const Gp& extended_gp() const { return gp_; }

    Vec augment(int level, const Vec& x) const {
        Vec aug(x.size() + 1);
        aug.head(x.size()) = x;
        aug[x.size()] = labels_[level];
        return aug;
    }

    std::pair<double, double> predict(int level, const Vec& x) const {
        return gp_.predict(augment(level, x));
    }

    std::pair<Vec, Mat> joint(int level, const Mat& points) const {
        Mat aug(points.rows(), points.cols() + 1);
        for (Eigen::Index i = 0; i < points.rows(); ++i)
            aug.row(i) = augment(level, points.row(i).transpose()).transpose();
        return gp_.joint(aug);
    }

    Correlation correlation(int level_a, int level_b, const Vec& x) const {
        Mat pair(2, x.size() + 1);
        pair.row(0) = augment(level_a, x).transpose();
        pair.row(1) = augment(level_b, x).transpose();
        auto [mu, C] = gp_.joint(pair);
        return correlation_from_joint(C);
    }

private:
    Gp gp_;
    Vec labels_;
    int hf_index_;
};

/// Default fidelity labels: t = 1..T mapped uniformly onto [0, 1].
inline Vec default_fidelity_labels(int levels) {
    Vec labels(levels);
    for (int t = 0; t < levels; ++t)
        labels[t] = levels == 1 ? 1.0 : static_cast<double>(t) / (levels - 1);
    return labels;
}

inline InputAugmentedModel fit_input_augmented(const FidelityHierarchy& hierarchy,
                                               const Vec& fidelity_labels,
                                               const KernelSpec& kernel_init,
                                               const FitOptions& options = {}) {
    hierarchy.validate();
    const int T = hierarchy.levels();
    if (fidelity_labels.size() != T)
        throw ArgumentError("fit_input_augmented: one label per level required");
    for (int a = 0; a < T; ++a)
        for (int b = a + 1; b < T; ++b)
            if (fidelity_labels[a] == fidelity_labels[b])
                throw ArgumentError("fit_input_augmented: duplicate labels for distinct levels");

    const int d = hierarchy.dim();
    int total = 0;
    for (const auto& data : hierarchy.datasets) total += data.size();
    Mat pooled(total, d + 1);
    Vec outputs(total);
    int row = 0;
    for (int t = 0; t < T; ++t) {
        const Dataset& data = hierarchy.datasets[t];
        for (int i = 0; i < data.size(); ++i, ++row) {
            pooled.block(row, 0, 1, d) = data.inputs.row(i);
            pooled(row, d) = fidelity_labels[t];
            outputs[row] = data.outputs[i];
        }
    }
    Dataset pooled_data(pooled, outputs);

    KernelSpec init = kernel_init;
    if (init.dim() == d) {
        KernelSpec extended = init;
        extended.lengthscales = Vec(d + 1);
        extended.lengthscales.head(d) = init.lengthscales;
        extended.lengthscales[d] = 1.0;
        extended.family = KernelFamily::ProductWithFidelity;
        init = extended;
    }
    if (init.dim() != d + 1)
        throw ArgumentError("fit_input_augmented: kernel must cover (x, t)");

    const bool fixed = options.bounds && options.bounds->all_parameters_fixed();
    KernelSpec fitted = fixed ? init : fit_hyperparameters(init, pooled_data, options);
    return InputAugmentedModel(Gp::from_spec(fitted).condition(pooled_data), fidelity_labels,
                               T - 1);
}

}  // namespace mfbo
