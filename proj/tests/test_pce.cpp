#include <mfbo/lowdisc.hpp>
#include <mfbo/pce.hpp>
#include <mfbo/quadrature.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace mfbo;

namespace {

Mat uniform_samples(int n, int d, std::uint64_t seed) {
    Mat pts = halton_points(n, d, seed);
    return (2.0 * pts.array() - 1.0).matrix();
}

}  // namespace

TEST_CASE("total-degree multi-index sets") {
    auto trivial = total_degree_multi_indices(1, 0);
    REQUIRE(trivial.size() == 1);
    REQUIRE(trivial.indices[0] == MultiIndex{0});

    auto set22 = total_degree_multi_indices(2, 2);
    REQUIRE(set22.size() == 6);
    std::vector<MultiIndex> expect = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    REQUIRE(set22.indices == expect);

    REQUIRE(total_degree_multi_indices(3, 2).size() == 10);
    REQUIRE(total_degree_multi_indices(5, 3).size() == 56);  // (3+5)!/(3!5!)

    REQUIRE_THROWS_AS(total_degree_multi_indices(40, 10), ArgumentError);  // > 10^6
}

TEST_CASE("orthonormal basis values") {
    RandomInput uniform = RandomInput::uniform(1);
    REQUIRE(basis_eval(uniform, {0}, Vec::Constant(1, 0.77)) == 1.0);
    REQUIRE(basis_eval(uniform, {1}, Vec::Constant(1, 1.0)) ==
            Catch::Approx(std::sqrt(3.0)).epsilon(1e-12));

    RandomInput normal = RandomInput::normal(1);
    REQUIRE(basis_eval(normal, {2}, Vec::Constant(1, 0.0)) ==
            Catch::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));

    REQUIRE_THROWS_AS(basis_eval(uniform, {0, 1}, Vec::Constant(1, 0.0)), ArgumentError);
}

TEST_CASE("discrete orthonormality under a gauss rule") {
    // Gram of the d=2, p=2 basis under a tensor Gauss-Legendre rule of order 3
    // (exact through degree 5, enough for products of degree-2 basis pairs),
    // with weights scaled to the uniform density 1/2 per dimension.
    RandomInput input = RandomInput::uniform(2);
    auto set = total_degree_multi_indices(2, 2);
    auto rule = tensor_product({gauss_legendre(3), gauss_legendre(3)});

    Mat gram = Mat::Zero(set.size(), set.size());
    for (int q = 0; q < rule.count(); ++q) {
        Vec xi = rule.nodes.row(q).transpose();
        double w = rule.weights[q] * 0.25;
        Vec psi(set.size());
        for (int k = 0; k < set.size(); ++k) psi[k] = basis_eval(input, set.indices[k], xi);
        gram += w * psi * psi.transpose();
    }
    REQUIRE((gram - Mat::Identity(set.size(), set.size())).cwiseAbs().maxCoeff() < 1e-10);

    // Same check for the Hermite basis under Gauss-Hermite (probability weights).
    RandomInput norm_input = RandomInput::normal(1);
    auto norm_set = total_degree_multi_indices(1, 3);
    auto hermite = gauss_hermite(4);
    Mat ngram = Mat::Zero(norm_set.size(), norm_set.size());
    for (int q = 0; q < hermite.count(); ++q) {
        Vec xi = hermite.nodes.row(q).transpose();
        Vec psi(norm_set.size());
        for (int k = 0; k < norm_set.size(); ++k)
            psi[k] = basis_eval(norm_input, norm_set.indices[k], xi);
        ngram += hermite.weights[q] * psi * psi.transpose();
    }
    REQUIRE((ngram - Mat::Identity(norm_set.size(), norm_set.size())).cwiseAbs().maxCoeff() <
            1e-10);
}

TEST_CASE("least-squares fit of a constant") {
    RandomInput input = RandomInput::uniform(2);
    auto set = total_degree_multi_indices(2, 2);
    Mat xs = uniform_samples(30, 2, 3);
    Vec ys = Vec::Constant(30, 7.0);
    auto surrogate = fit_pce_least_squares(input, set, xs, ys);
    REQUIRE(surrogate.coefficients[0] == Catch::Approx(7.0).margin(1e-10));
    for (int k = 1; k < set.size(); ++k)
        REQUIRE(std::abs(surrogate.coefficients[k]) < 1e-10);
}

TEST_CASE("least-squares fit recovers the linear coefficient") {
    RandomInput input = RandomInput::uniform(1);
    auto set = total_degree_multi_indices(1, 2);
    Mat xs = uniform_samples(50, 1, 9);
    Vec ys = xs.col(0);
    auto surrogate = fit_pce_least_squares(input, set, xs, ys);
    // xi = (1/sqrt(3)) * (sqrt(3) xi): the degree-1 coefficient is 1/sqrt(3).
    REQUIRE(surrogate.coefficients[1] == Catch::Approx(1.0 / std::sqrt(3.0)).margin(1e-8));
    REQUIRE(std::abs(surrogate.coefficients[0]) < 1e-8);
    REQUIRE(std::abs(surrogate.coefficients[2]) < 1e-8);
}

TEST_CASE("exactly representable polynomials are reproduced to 1e-8") {
    RandomInput input = RandomInput::uniform(2);
    const int p = 2;
    auto set = total_degree_multi_indices(2, p);
    auto poly = [](const Vec& xi) {
        return 1.5 - 0.3 * xi[0] + 0.8 * xi[1] + 0.25 * xi[0] * xi[0] - 1.1 * xi[0] * xi[1];
    };
    const int n = 3 * set.size();
    Mat xs = uniform_samples(n, 2, 21);
    Vec ys(n);
    for (int i = 0; i < n; ++i) ys[i] = poly(xs.row(i).transpose());
    auto surrogate = fit_pce_least_squares(input, set, xs, ys);
    REQUIRE_FALSE(surrogate.low_oversampling);

    Mat held_out = uniform_samples(100, 2, 77);
    for (int i = 0; i < held_out.rows(); ++i) {
        Vec xi = held_out.row(i).transpose();
        REQUIRE(std::abs(surrogate.predict(xi) - poly(xi)) < 1e-8);
    }
}

TEST_CASE("oversampling warning and sample-count precondition") {
    RandomInput input = RandomInput::uniform(1);
    auto set = total_degree_multi_indices(1, 3);  // K = 4
    Mat xs = uniform_samples(5, 1, 4);            // n = 5 < 1.5 K = 6
    Vec ys = xs.col(0);
    auto surrogate = fit_pce_least_squares(input, set, xs, ys);
    REQUIRE(surrogate.low_oversampling);

    Mat too_few = uniform_samples(3, 1, 4);
    REQUIRE_THROWS_AS(fit_pce_least_squares(input, set, too_few, too_few.col(0)),
                      ArgumentError);
}

TEST_CASE("multi-fidelity pce: degenerate discrepancies") {
    RandomInput input = RandomInput::uniform(2);
    auto lf_set = total_degree_multi_indices(2, 2);
    auto disc_set = total_degree_multi_indices(2, 1);
    auto lf_fn = [](const Vec& xi) { return xi[0] + xi[1] * xi[1]; };

    Mat lf_xs = uniform_samples(40, 2, 11);
    Vec lf_ys(40);
    for (int i = 0; i < 40; ++i) lf_ys[i] = lf_fn(lf_xs.row(i).transpose());
    Mat hf_xs = uniform_samples(12, 2, 13);

    SECTION("identical fidelities yield a zero discrepancy") {
        Vec hf_ys(12);
        for (int i = 0; i < 12; ++i) hf_ys[i] = lf_fn(hf_xs.row(i).transpose());
        auto mf = fit_mf_pce(input, lf_set, disc_set, lf_xs, lf_ys, hf_xs, hf_ys);
        for (int k = 0; k < mf.discrepancy.coefficients.size(); ++k)
            REQUIRE(std::abs(mf.discrepancy.coefficients[k]) < 1e-8);
    }

    SECTION("constant shift lands in the discrepancy constant") {
        Vec hf_ys(12);
        for (int i = 0; i < 12; ++i) hf_ys[i] = lf_fn(hf_xs.row(i).transpose()) + 1.0;
        auto mf = fit_mf_pce(input, lf_set, disc_set, lf_xs, lf_ys, hf_xs, hf_ys);
        REQUIRE(mf.discrepancy.coefficients[0] == Catch::Approx(1.0).margin(1e-8));
        for (int k = 1; k < mf.discrepancy.coefficients.size(); ++k)
            REQUIRE(std::abs(mf.discrepancy.coefficients[k]) < 1e-8);
    }
}

TEST_CASE("multi-fidelity pce beats hf-only pce at equal hf budget") {
    // LF(xi) = xi_1 + xi_2^2, HF = LF + 0.1 xi_1 xi_2; 60 LF + 12 HF samples
    // against an HF-only fit on the same 12 HF samples.
    RandomInput input = RandomInput::uniform(2);
    auto lf_fn = [](const Vec& xi) { return xi[0] + xi[1] * xi[1]; };
    auto hf_fn = [&](const Vec& xi) { return lf_fn(xi) + 0.1 * xi[0] * xi[1]; };

    auto lf_set = total_degree_multi_indices(2, 2);
    auto disc_set = total_degree_multi_indices(2, default_discrepancy_order(2));

    Mat lf_xs = uniform_samples(60, 2, 101);
    Vec lf_ys(60);
    for (int i = 0; i < 60; ++i) lf_ys[i] = lf_fn(lf_xs.row(i).transpose());
    Mat hf_xs = uniform_samples(12, 2, 202);
    Vec hf_ys(12);
    for (int i = 0; i < 12; ++i) hf_ys[i] = hf_fn(hf_xs.row(i).transpose());

    auto mf = fit_mf_pce(input, lf_set, disc_set, lf_xs, lf_ys, hf_xs, hf_ys);
    // HF-only comparator: the largest total-degree order the 12 HF samples
    // support at the conservative end of the 1.5-3 oversampling rule
    // (3K <= n gives p = 1 here).
    int hf_order = 0;
    while (3 * total_degree_multi_indices(2, hf_order + 1).size() <= hf_xs.rows()) ++hf_order;
    auto hf_only =
        fit_pce_least_squares(input, total_degree_multi_indices(2, hf_order), hf_xs, hf_ys);

    Rng rng(909);
    double mf_sse = 0.0, hf_sse = 0.0;
    const int m = 1000;
    for (int i = 0; i < m; ++i) {
        Vec xi(2);
        xi[0] = rng.uniform(-1.0, 1.0);
        xi[1] = rng.uniform(-1.0, 1.0);
        const double truth = hf_fn(xi);
        mf_sse += std::pow(mf.predict(xi) - truth, 2);
        hf_sse += std::pow(hf_only.predict(xi) - truth, 2);
    }
    REQUIRE(std::sqrt(mf_sse / m) < std::sqrt(hf_sse / m));
}

TEST_CASE("pce moments and sobol indices") {
    RandomInput input = RandomInput::uniform(1);
    PceSurrogate surrogate;
    surrogate.input = input;
    surrogate.index_set = total_degree_multi_indices(1, 2);
    surrogate.coefficients = Vec(3);
    surrogate.coefficients << 2.0, 1.0, 0.5;
    auto moments = pce_moments(surrogate);
    REQUIRE(moments.mean == 2.0);
    REQUIRE(moments.variance == Catch::Approx(1.25));
    REQUIRE_FALSE(moments.degenerate);

    PceSurrogate two_dim;
    two_dim.input = RandomInput::uniform(2);
    two_dim.index_set = total_degree_multi_indices(2, 1);
    two_dim.coefficients = Vec(3);
    two_dim.coefficients << 0.0, 1.0, 1.0;
    auto split = pce_moments(two_dim);
    REQUIRE(split.main_sobol[0] == Catch::Approx(0.5));
    REQUIRE(split.main_sobol[1] == Catch::Approx(0.5));

    PceSurrogate constant;
    constant.input = input;
    constant.index_set = total_degree_multi_indices(1, 0);
    constant.coefficients = Vec::Constant(1, 3.0);
    auto degenerate = pce_moments(constant);
    REQUIRE(degenerate.variance == 0.0);
    REQUIRE(degenerate.degenerate);
}

TEST_CASE("mc estimate: constants, definitional mse, sampling error") {
    RandomInput input = RandomInput::uniform(1);
    auto constant = mc_estimate([](const Vec&) { return 5.0; }, input, 100, 1);
    REQUIRE(constant.mean == 5.0);
    REQUIRE(constant.variance == 0.0);
    REQUIRE(constant.mse == 0.0);

    auto linear = mc_estimate([](const Vec& xi) { return xi[0]; }, input, 10000, 7);
    REQUIRE(std::abs(linear.mean) < 3.0 * std::sqrt((1.0 / 3.0) / 10000.0));
    REQUIRE(linear.mse == linear.variance / 10000.0);

    REQUIRE_THROWS_AS(mc_estimate([](const Vec&) { return 0.0; }, input, 1, 1), ArgumentError);
}

TEST_CASE("mc convergence slope is about -1/2") {
    RandomInput input = RandomInput::uniform(1);
    auto fn = [](const Vec& xi) { return xi[0] * xi[0]; };
    const double truth = 1.0 / 3.0;
    const int repeats = 200;

    std::vector<double> log_m, log_rmse;
    for (int m : {100, 1000, 10000}) {
        double sse = 0.0;
        for (int r = 0; r < repeats; ++r) {
            auto est = mc_estimate(fn, input, m, 1000 + 31ULL * m + r);
            sse += std::pow(est.mean - truth, 2);
        }
        log_m.push_back(std::log10(static_cast<double>(m)));
        log_rmse.push_back(0.5 * std::log10(sse / repeats));
    }
    // least-squares slope through the three points
    double mx = (log_m[0] + log_m[1] + log_m[2]) / 3.0;
    double my = (log_rmse[0] + log_rmse[1] + log_rmse[2]) / 3.0;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 3; ++i) {
        num += (log_m[i] - mx) * (log_rmse[i] - my);
        den += (log_m[i] - mx) * (log_m[i] - mx);
    }
    const double slope = num / den;
    REQUIRE(slope == Catch::Approx(-0.5).margin(0.1));
}

TEST_CASE("moment cross-check: mc on the surrogate reproduces pce mean") {
    RandomInput input = RandomInput::uniform(2);
    auto set = total_degree_multi_indices(2, 2);
    auto fn = [](const Vec& xi) { return 0.5 + xi[0] + 0.3 * xi[1] * xi[1]; };
    Mat xs = uniform_samples(40, 2, 55);
    Vec ys(40);
    for (int i = 0; i < 40; ++i) ys[i] = fn(xs.row(i).transpose());
    auto surrogate = fit_pce_least_squares(input, set, xs, ys);
    auto moments = pce_moments(surrogate);

    auto mc = mc_estimate([&](const Vec& xi) { return surrogate.predict(xi); }, input, 100000, 3);
    const double se = std::sqrt(mc.mse);
    REQUIRE(std::abs(mc.mean - moments.mean) < 4.0 * se);
}
