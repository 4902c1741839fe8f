#pragma once

#include <mfbo/common.hpp>

#include <cmath>
#include <string>

namespace mfbo {

enum class KernelFamily {
    SquaredExponentialArd,
    Matern52Ard,
    /// Squared-exponential over an input augmented with a fidelity label in the
    /// last coordinate; algebraically the product of a design kernel over x and
    /// a fidelity kernel over t.
    ProductWithFidelity,
};

inline const char* to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::SquaredExponentialArd: return "squared-exponential-ard";
        case KernelFamily::Matern52Ard: return "matern-5/2-ard";
        case KernelFamily::ProductWithFidelity: return "product-with-fidelity";
    }
    return "unknown";
}

struct KernelSpec {
    KernelFamily family = KernelFamily::SquaredExponentialArd;
    Vec lengthscales;            // one per input dimension, strictly positive
    double amplitude = 1.0;      // output variance scale, strictly positive
    double noise_variance = 0.0; // observation noise, non-negative

    int dim() const { return static_cast<int>(lengthscales.size()); }

    void validate() const {
        if (lengthscales.size() == 0)
            throw ArgumentError("kernel: at least one lengthscale required");
        for (Eigen::Index i = 0; i < lengthscales.size(); ++i)
            if (!(lengthscales[i] > 0.0) || !std::isfinite(lengthscales[i]))
                throw ArgumentError("kernel: lengthscales must be strictly positive");
        if (!(amplitude > 0.0) || !std::isfinite(amplitude))
            throw ArgumentError("kernel: amplitude must be strictly positive");
        if (noise_variance < 0.0 || !std::isfinite(noise_variance))
            throw ArgumentError("kernel: noise variance must be non-negative");
    }

    static KernelSpec squared_exponential(int dim, double lengthscale = 1.0,
                                          double amplitude = 1.0, double noise = 0.0) {
        KernelSpec spec;
        spec.family = KernelFamily::SquaredExponentialArd;
        spec.lengthscales = Vec::Constant(dim, lengthscale);
        spec.amplitude = amplitude;
        spec.noise_variance = noise;
        return spec;
    }

    static KernelSpec matern52(int dim, double lengthscale = 1.0, double amplitude = 1.0,
                               double noise = 0.0) {
        KernelSpec spec = squared_exponential(dim, lengthscale, amplitude, noise);
        spec.family = KernelFamily::Matern52Ard;
        return spec;
    }
};

/// Covariance between two inputs. Noise is not included; it enters Gram
/// diagonals only.
inline double kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& y) {
    if (x.size() != spec.lengthscales.size() || y.size() != spec.lengthscales.size())
        throw ArgumentError("kernel_eval: input dimension does not match lengthscale count");

    double r2 = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double u = (x[i] - y[i]) / spec.lengthscales[i];
        r2 += u * u;
    }

    switch (spec.family) {
        case KernelFamily::SquaredExponentialArd:
        case KernelFamily::ProductWithFidelity:
            return spec.amplitude * std::exp(-0.5 * r2);
        case KernelFamily::Matern52Ard: {
            const double r = std::sqrt(r2);
            const double sqrt5r = std::sqrt(5.0) * r;
            return spec.amplitude * (1.0 + sqrt5r + 5.0 * r2 / 3.0) * std::exp(-sqrt5r);
        }
    }
    throw ArgumentError("kernel_eval: unknown kernel family");
}

/// Gram matrix K(X, X) without noise.
inline Mat kernel_gram(const KernelSpec& spec, const Mat& X) {
    const Eigen::Index n = X.rows();
    Mat K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double value = kernel_eval(spec, X.row(i).transpose(), X.row(j).transpose());
            K(i, j) = value;
            K(j, i) = value;
        }
    }
    return K;
}

/// Cross-covariance K(A, B) without noise.
inline Mat kernel_cross(const KernelSpec& spec, const Mat& A, const Mat& B) {
    Mat K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < B.rows(); ++j)
            K(i, j) = kernel_eval(spec, A.row(i).transpose(), B.row(j).transpose());
    return K;
}

/// Partial derivative of k(x,y) with respect to lengthscale gamma_i.
inline double kernel_grad_lengthscale(const KernelSpec& spec, const Vec& x, const Vec& y, int i) {
    const double gamma = spec.lengthscales[i];
    const double u = (x[i] - y[i]) / gamma;
    switch (spec.family) {
        case KernelFamily::SquaredExponentialArd:
        case KernelFamily::ProductWithFidelity:
            return kernel_eval(spec, x, y) * u * u / gamma;
        case KernelFamily::Matern52Ard: {
            double r2 = 0.0;
            for (Eigen::Index k = 0; k < x.size(); ++k) {
                const double v = (x[k] - y[k]) / spec.lengthscales[k];
                r2 += v * v;
            }
            const double r = std::sqrt(r2);
            const double sqrt5 = std::sqrt(5.0);
            // dk/dr = -a (5r/3)(1 + sqrt5 r) e^{-sqrt5 r}; dr/dgamma_i = -u_i^2 / (r gamma_i)
            if (r == 0.0) return 0.0;
            return spec.amplitude * (5.0 * r / 3.0) * (1.0 + sqrt5 * r) * std::exp(-sqrt5 * r) *
                   u * u / (r * gamma);
        }
    }
    throw ArgumentError("kernel_grad_lengthscale: unknown kernel family");
}

/// Partial derivative of k(x,y) with respect to the amplitude.
inline double kernel_grad_amplitude(const KernelSpec& spec, const Vec& x, const Vec& y) {
    return kernel_eval(spec, x, y) / spec.amplitude;
}

}  // namespace mfbo
