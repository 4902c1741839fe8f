#pragma once

#include <mfbo/common.hpp>
#include <mfbo/kernel.hpp>
#include <mfbo/rng.hpp>

#include <Eigen/Cholesky>

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace mfbo {

using MeanFn = std::function<double(const Vec&)>;
using CovFn = std::function<double(const Vec&, const Vec&)>;

inline MeanFn zero_mean() {
    return [](const Vec&) { return 0.0; };
}

inline MeanFn constant_mean(double c) {
    return [c](const Vec&) { return c; };
}

/// Inputs paired with observed values; optional per-row fidelity labels.
struct Dataset {
    Mat inputs;   // n x d
    Vec outputs;  // n
    std::vector<int> fidelity;  // empty, or one label per row

    Dataset() = default;
    Dataset(Mat X, Vec y) : inputs(std::move(X)), outputs(std::move(y)) {
        if (inputs.rows() != outputs.size())
            throw ArgumentError("dataset: inputs and outputs must have the same length");
    }

    int size() const { return static_cast<int>(inputs.rows()); }
    int dim() const { return static_cast<int>(inputs.cols()); }
    bool empty() const { return inputs.rows() == 0; }

    void append(const Vec& x, double y) {
        if (inputs.rows() == 0) {
            inputs.resize(1, x.size());
            inputs.row(0) = x.transpose();
            outputs.resize(1);
            outputs[0] = y;
            return;
        }
        if (x.size() != inputs.cols())
            throw ArgumentError("dataset: appended input has wrong dimension");
        inputs.conservativeResize(inputs.rows() + 1, Eigen::NoChange);
        inputs.row(inputs.rows() - 1) = x.transpose();
        outputs.conservativeResize(outputs.size() + 1);
        outputs[outputs.size() - 1] = y;
    }
};

/// Cholesky factorization with the standard jitter ladder: 1e-10 added to the
/// diagonal, escalated x10 up to 1e-6, then a numerical failure.
inline Mat cholesky_with_jitter(const Mat& A, double* jitter_used = nullptr) {
    for (double jitter = 1e-10; jitter <= 1.000001e-6; jitter *= 10.0) {
        Mat work = A;
        work.diagonal().array() += jitter;
        Eigen::LLT<Mat> llt(work);
        if (llt.info() == Eigen::Success) {
            Mat L = llt.matrixL();
            if (L.diagonal().minCoeff() > 0.0 && L.allFinite()) {
                if (jitter_used) *jitter_used = jitter;
                return L;
            }
        }
    }
    throw NumericalError("cholesky: matrix not positive definite after jitter escalation");
}

/// Gaussian process over functions, prior or posterior. Fitted instances are
/// immutable; concurrent read-only prediction is safe.
class Gp {
public:
    Gp(MeanFn mean, CovFn cov, double noise_variance = 0.0)
        : mean_(mean ? std::move(mean) : zero_mean()),
          cov_(std::move(cov)),
          noise_(noise_variance) {
        if (!cov_) throw ArgumentError("gp: covariance function required");
        if (noise_ < 0.0) throw ArgumentError("gp: noise variance must be non-negative");
    }

    static Gp from_spec(const KernelSpec& spec, MeanFn mean = nullptr) {
        spec.validate();
        Gp gp(std::move(mean),
              [spec](const Vec& a, const Vec& b) { return kernel_eval(spec, a, b); },
              spec.noise_variance);
        gp.spec_ = spec;
        return gp;
    }

    /// Parametric kernel spec when the covariance came from one.
    const std::optional<KernelSpec>& spec() const { return spec_; }
    double noise_variance() const { return noise_; }
    bool has_data() const { return X_.rows() > 0; }
    int data_count() const { return static_cast<int>(X_.rows()); }
    const Mat& training_inputs() const { return X_; }
    const Vec& training_outputs() const { return y_; }

    /// Exact conditioning on observations. Empty data returns the prior.
    Gp condition(const Dataset& data) const {
        Gp post = *this;
        if (data.empty()) return post;
        post.X_ = data.inputs;
        post.y_ = data.outputs;
        Mat K = cov_matrix(data.inputs, data.inputs);
        K.diagonal().array() += noise_;
        post.L_ = cholesky_with_jitter(K, &post.jitter_);
        Vec residual = data.outputs;
        for (int i = 0; i < data.size(); ++i)
            residual[i] -= mean_(data.inputs.row(i).transpose());
        post.alpha_ = solve_chol(post.L_, residual);
        return post;
    }

    double mean(const Vec& x) const {
        double m = mean_(x);
        if (has_data()) m += cov_vector(x).dot(alpha_);
        return m;
    }

    /// Predictive mean and (non-negative) variance at a point.
    std::pair<double, double> predict(const Vec& x) const {
        const double prior_var = cov_(x, x);
        if (!has_data()) return {mean_(x), std::max(prior_var, 0.0)};
        const Vec kx = cov_vector(x);
        const Vec v = L_.triangularView<Eigen::Lower>().solve(kx);
        const double var = prior_var - v.squaredNorm();
        return {mean_(x) + kx.dot(alpha_), std::max(var, 0.0)};
    }

    /// Predictive covariance between two points.
    double covariance(const Vec& x, const Vec& y) const {
        double c = cov_(x, y);
        if (has_data()) {
            const Vec vx = L_.triangularView<Eigen::Lower>().solve(cov_vector(x));
            const Vec vy = L_.triangularView<Eigen::Lower>().solve(cov_vector(y));
            c -= vx.dot(vy);
        }
        return c;
    }

    /// Joint predictive law (mean vector, covariance matrix) over rows of `points`.
    std::pair<Vec, Mat> joint(const Mat& points) const {
        const Eigen::Index m = points.rows();
        Vec mu(m);
        for (Eigen::Index i = 0; i < m; ++i) mu[i] = mean_(points.row(i).transpose());
        Mat C = cov_matrix(points, points);
        if (has_data()) {
            Mat Kxp = cov_matrix(X_, points);  // n x m
            mu += Kxp.transpose() * alpha_;
            Mat V = L_.triangularView<Eigen::Lower>().solve(Kxp);
            C -= V.transpose() * V;
        }
        return {std::move(mu), std::move(C)};
    }

    /// One draw from the joint law over rows of `points`.
    Vec sample_joint(const Mat& points, Rng& rng) const {
        auto [mu, C] = joint(points);
        Mat L = cholesky_with_jitter(C);
        Vec z(mu.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
        return mu + L * z;
    }

private:
    Vec cov_vector(const Vec& x) const {
        Vec k(X_.rows());
        for (Eigen::Index i = 0; i < X_.rows(); ++i) k[i] = cov_(X_.row(i).transpose(), x);
        return k;
    }

    Mat cov_matrix(const Mat& A, const Mat& B) const {
        Mat K(A.rows(), B.rows());
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            for (Eigen::Index j = 0; j < B.rows(); ++j)
                K(i, j) = cov_(A.row(i).transpose(), B.row(j).transpose());
        return K;
    }

    static Vec solve_chol(const Mat& L, const Vec& b) {
        Vec y = L.triangularView<Eigen::Lower>().solve(b);
        return L.transpose().triangularView<Eigen::Upper>().solve(y);
    }

    MeanFn mean_;
    CovFn cov_;
    double noise_;
    std::optional<KernelSpec> spec_;

    Mat X_;
    Vec y_;
    Mat L_;
    Vec alpha_;
    double jitter_ = 0.0;
};

/// Exact posterior of `prior` given `data`.
inline Gp gp_posterior(const Gp& prior, const Dataset& data) { return prior.condition(data); }

}  // namespace mfbo
