#include <mfbo/gp_fit.hpp>
#include <mfbo/lowdisc.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace mfbo;

namespace {

Dataset random_dataset(int n, int dim, KernelFamily family, Rng& rng) {
    Mat X(n, dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) X(i, j) = rng.uniform(-1.0, 1.0);
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    (void)family;
    return Dataset(X, y);
}

}  // namespace

TEST_CASE("lml gradient matches central finite differences") {
    Rng rng(314);
    for (KernelFamily family :
         {KernelFamily::SquaredExponentialArd, KernelFamily::Matern52Ard}) {
        for (int trial = 0; trial < 10; ++trial) {
            const int dim = 2;
            Dataset data = random_dataset(10, dim, family, rng);
            KernelSpec spec;
            spec.family = family;
            spec.lengthscales = Vec(dim);
            for (int i = 0; i < dim; ++i) spec.lengthscales[i] = rng.uniform(0.3, 1.5);
            spec.amplitude = rng.uniform(0.5, 2.0);
            spec.noise_variance = rng.uniform(0.01, 0.3);

            Vec grad = log_marginal_likelihood_gradient(spec, data);
            const double h = 1e-6;
            for (int which = 0; which < dim + 2; ++which) {
                auto perturbed = [&](double factor) {
                    KernelSpec s = spec;
                    if (which < dim)
                        s.lengthscales[which] *= factor;
                    else if (which == dim)
                        s.amplitude *= factor;
                    else
                        s.noise_variance *= factor;
                    return log_marginal_likelihood(s, data);
                };
                // central difference in log space: theta -> theta * exp(+-h)
                double fd = (perturbed(std::exp(h)) - perturbed(std::exp(-h))) / (2.0 * h);
                double scale = std::max({std::abs(fd), std::abs(grad[which]), 1e-8});
                REQUIRE(std::abs(grad[which] - fd) / scale < 1e-5);
            }
        }
    }
}

TEST_CASE("fit with all parameters fixed returns the input spec") {
    KernelSpec spec = KernelSpec::squared_exponential(1, 0.37, 1.9, 0.02);
    Mat X(3, 1);
    X << 0.0, 0.5, 1.0;
    Vec y(3);
    y << 1.0, -1.0, 0.5;
    FitOptions options;
    options.bounds = HyperBounds::all_fixed(spec);
    KernelSpec fitted = fit_hyperparameters(spec, Dataset(X, y), options);
    REQUIRE(fitted.lengthscales[0] == spec.lengthscales[0]);
    REQUIRE(fitted.amplitude == spec.amplitude);
    REQUIRE(fitted.noise_variance == spec.noise_variance);
}

TEST_CASE("fit recovers the lengthscale of a known generator") {
    // Oracle: draw one noise-free function sample from a known SE GP, then
    // check maximum marginal likelihood recovers a lengthscale near the truth.
    KernelSpec truth = KernelSpec::squared_exponential(1, 0.2);
    Mat X = low_discrepancy_design(Domain::unit_cube(1), 50, 77);
    Rng rng(4242);
    Vec y = Gp::from_spec(truth).sample_joint(X, rng);

    KernelSpec init = KernelSpec::squared_exponential(1, 1.0, 1.0, 1e-6);
    KernelSpec fitted = fit_hyperparameters(init, Dataset(X, y), 8, 1);
    REQUIRE(fitted.lengthscales[0] >= 0.1);
    REQUIRE(fitted.lengthscales[0] <= 0.4);
}

TEST_CASE("constant outputs drive fitted noise to the floor") {
    Mat X = low_discrepancy_design(Domain::unit_cube(1), 12, 5);
    Vec y = Vec::Constant(12, 3.7);
    KernelSpec init = KernelSpec::squared_exponential(1, 0.5, 1.0, 0.1);
    KernelSpec fitted = fit_hyperparameters(init, Dataset(X, y), 8, 2);
    REQUIRE(fitted.noise_variance <= 1e-6);
}

TEST_CASE("fit determinism given the seed") {
    Rng rng(9);
    Dataset data = random_dataset(12, 1, KernelFamily::SquaredExponentialArd, rng);
    KernelSpec init = KernelSpec::squared_exponential(1);
    KernelSpec a = fit_hyperparameters(init, data, 4, 123);
    KernelSpec b = fit_hyperparameters(init, data, 4, 123);
    REQUIRE(a.lengthscales[0] == b.lengthscales[0]);
    REQUIRE(a.amplitude == b.amplitude);
    REQUIRE(a.noise_variance == b.noise_variance);
}

TEST_CASE("fit requires at least two points") {
    Mat X(1, 1);
    X << 0.5;
    Vec y(1);
    y << 1.0;
    REQUIRE_THROWS_AS(
        fit_hyperparameters(KernelSpec::squared_exponential(1), Dataset(X, y), 4),
        ArgumentError);
}

TEST_CASE("gls fit recovers linear mean coefficients exactly representable data") {
    // y = 2 * h(x) with h(x) = x, plus a tiny GP residual budget.
    const int n = 8;
    Mat X(n, 1);
    for (int i = 0; i < n; ++i) X(i, 0) = i / (n - 1.0);
    Mat H(n, 1);
    H.col(0) = X.col(0);
    Vec y = 2.0 * H.col(0);

    KernelSpec init = KernelSpec::squared_exponential(1, 0.5, 1.0, 1e-6);
    FitOptions options;
    options.restarts = 4;
    GlsFitResult fit = fit_hyperparameters_gls(init, X, y, H, options);
    REQUIRE(fit.coefficients.size() == 1);
    REQUIRE(fit.coefficients[0] == Catch::Approx(2.0).margin(1e-6));
}
