#include <mfbo/lowdisc.hpp>
#include <mfbo/quadrature.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <set>

using namespace mfbo;

namespace {

// Oracle evaluation of a symmetric 1-D rule on a monomial: symmetric node
// pairs are summed together so odd powers cancel exactly.
double integrate_monomial(const QuadratureScheme& scheme, int power) {
    const int n = scheme.count();
    double sum = 0.0;
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        sum += scheme.weights[i] * std::pow(scheme.nodes(i, 0), power) +
               scheme.weights[j] * std::pow(scheme.nodes(j, 0), power);
    }
    if (n % 2 == 1)
        sum += scheme.weights[n / 2] * std::pow(scheme.nodes(n / 2, 0), power);
    return sum;
}

// Moments of the standard normal: E[xi^{2k}] = (2k-1)!!, odd moments zero.
double normal_moment(int power) {
    if (power % 2 == 1) return 0.0;
    double value = 1.0;
    for (int k = power - 1; k > 1; k -= 2) value *= k;
    return value;
}

double legendre_moment(int power) {
    if (power % 2 == 1) return 0.0;
    return 2.0 / (power + 1);
}

}  // namespace

TEST_CASE("gauss-legendre small orders match the hand-solved rules") {
    auto rule1 = gauss_legendre(1);
    REQUIRE(rule1.count() == 1);
    REQUIRE(rule1.nodes(0, 0) == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(rule1.weights[0] == Catch::Approx(2.0).margin(1e-14));

    auto rule2 = gauss_legendre(2);
    REQUIRE(rule2.nodes(0, 0) == Catch::Approx(-0.5773502692).margin(1e-10));
    REQUIRE(rule2.nodes(1, 0) == Catch::Approx(0.5773502692).margin(1e-10));
    REQUIRE(rule2.weights[0] == Catch::Approx(1.0).margin(1e-13));
    REQUIRE(rule2.weights[1] == Catch::Approx(1.0).margin(1e-13));

    auto rule3 = gauss_legendre(3);
    REQUIRE(rule3.nodes(0, 0) == Catch::Approx(-0.7745966692).margin(1e-10));
    REQUIRE(rule3.nodes(1, 0) == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(rule3.weights[0] == Catch::Approx(5.0 / 9.0).margin(1e-13));
    REQUIRE(rule3.weights[1] == Catch::Approx(8.0 / 9.0).margin(1e-13));
    REQUIRE(rule3.weights[2] == Catch::Approx(5.0 / 9.0).margin(1e-13));
}

TEST_CASE("gauss-hermite small orders match the hand-solved rules") {
    auto rule1 = gauss_hermite(1);
    REQUIRE(rule1.nodes(0, 0) == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(rule1.weights[0] == Catch::Approx(1.0).margin(1e-14));

    auto rule2 = gauss_hermite(2);
    REQUIRE(rule2.nodes(0, 0) == Catch::Approx(-1.0).margin(1e-13));
    REQUIRE(rule2.nodes(1, 0) == Catch::Approx(1.0).margin(1e-13));
    REQUIRE(rule2.weights[0] == Catch::Approx(0.5).margin(1e-13));

    auto rule3 = gauss_hermite(3);
    REQUIRE(rule3.nodes(0, 0) == Catch::Approx(-std::sqrt(3.0)).margin(1e-12));
    REQUIRE(rule3.nodes(1, 0) == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(rule3.weights[1] == Catch::Approx(2.0 / 3.0).margin(1e-13));
    REQUIRE(rule3.weights[0] == Catch::Approx(1.0 / 6.0).margin(1e-13));
}

TEST_CASE("gauss rules are exact through degree 2n-1") {
    for (int n : {1, 2, 3, 4, 5, 8, 12, 16}) {
        auto legendre = gauss_legendre(n);
        auto hermite = gauss_hermite(n);
        for (int power = 0; power <= 2 * n - 1; ++power) {
            REQUIRE(std::abs(integrate_monomial(legendre, power) - legendre_moment(power)) <
                    1e-12);
            // Hermite moments grow to ~1e15; the exactness bound is scaled by
            // the moment magnitude, the largest representable precision.
            REQUIRE(std::abs(integrate_monomial(hermite, power) - normal_moment(power)) <
                    1e-12 * std::max(1.0, std::abs(normal_moment(power))));
        }
    }
}

TEST_CASE("weight sums: probability rules to 1, legendre to 2^s") {
    for (int n : {1, 3, 7, 20, 64}) {
        REQUIRE(gauss_hermite(n).weight_sum() == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(gauss_legendre(n).weight_sum() == Catch::Approx(2.0).margin(1e-12));
    }
    auto square = tensor_product({gauss_legendre(2), gauss_legendre(3)});
    REQUIRE(square.weight_sum() == Catch::Approx(4.0).margin(1e-12));
}

TEST_CASE("clenshaw-curtis levels 0 and 1 are the closed small rules") {
    auto level0 = clenshaw_curtis(0);
    REQUIRE(level0.count() == 1);
    REQUIRE(level0.nodes(0, 0) == 0.0);
    REQUIRE(level0.weights[0] == 2.0);

    auto level1 = clenshaw_curtis(1);
    REQUIRE(level1.count() == 3);
    REQUIRE(level1.nodes(0, 0) == -1.0);
    REQUIRE(level1.nodes(1, 0) == 0.0);
    REQUIRE(level1.nodes(2, 0) == 1.0);
    REQUIRE(level1.weights[0] == Catch::Approx(1.0 / 3.0).margin(1e-14));
    REQUIRE(level1.weights[1] == Catch::Approx(4.0 / 3.0).margin(1e-14));
    REQUIRE(level1.weights[2] == Catch::Approx(1.0 / 3.0).margin(1e-14));
}

TEST_CASE("clenshaw-curtis nodes nest exactly across consecutive levels") {
    for (int level = 1; level + 1 <= 6; ++level) {
        auto coarse = clenshaw_curtis(level);
        auto fine = clenshaw_curtis(level + 1);
        std::set<double> fine_nodes;
        for (int i = 0; i < fine.count(); ++i) fine_nodes.insert(fine.nodes(i, 0));
        for (int i = 0; i < coarse.count(); ++i)
            REQUIRE(fine_nodes.count(coarse.nodes(i, 0)) == 1);  // exact set inclusion
    }
}

TEST_CASE("clenshaw-curtis weights are positive and integrate smooth functions") {
    for (int level : {1, 2, 3, 4, 5, 6}) {
        auto rule = clenshaw_curtis(level);
        REQUIRE(rule.weights.minCoeff() > 0.0);
        REQUIRE(rule.weight_sum() == Catch::Approx(2.0).margin(1e-12));
    }
    // CC at level 4 (17 nodes) nails exp on [-1,1].
    auto rule = clenshaw_curtis(4);
    double sum = 0.0;
    for (int i = 0; i < rule.count(); ++i) sum += rule.weights[i] * std::exp(rule.nodes(i, 0));
    REQUIRE(sum == Catch::Approx(std::exp(1.0) - std::exp(-1.0)).margin(1e-12));
}

TEST_CASE("gauss beats an equal-spaced trapezoid on exp by many orders") {
    const double truth = std::exp(1.0) - std::exp(-1.0);
    auto gauss = gauss_legendre(10);
    double gauss_value = 0.0;
    for (int i = 0; i < gauss.count(); ++i)
        gauss_value += gauss.weights[i] * std::exp(gauss.nodes(i, 0));

    double trap_value = 0.0;  // 10-point composite trapezoid oracle
    const int pts = 10;
    const double h = 2.0 / (pts - 1);
    for (int i = 0; i < pts; ++i) {
        const double x = -1.0 + i * h;
        const double f = std::exp(x);
        trap_value += (i == 0 || i == pts - 1) ? 0.5 * h * f : h * f;
    }

    const double gauss_rel = std::abs(gauss_value - truth) / truth;
    const double trap_rel = std::abs(trap_value - truth) / truth;
    REQUIRE(gauss_rel < 1e-10);
    REQUIRE(trap_rel > 1e-3);
}

TEST_CASE("unsupported orders and levels are rejected") {
    REQUIRE_THROWS_AS(gauss_legendre(65), ArgumentError);
    REQUIRE_THROWS_AS(gauss_hermite(0), ArgumentError);
    REQUIRE_THROWS_AS(clenshaw_curtis(17), ArgumentError);
}

TEST_CASE("tensor product counts, weights, and size guard") {
    auto singleton = tensor_product({gauss_legendre(1), gauss_legendre(1)});
    REQUIRE(singleton.count() == 1);
    REQUIRE(singleton.nodes.row(0).norm() == 0.0);
    REQUIRE(singleton.weights[0] == Catch::Approx(4.0).margin(1e-13));

    auto grid = tensor_product({gauss_legendre(2), gauss_legendre(3)});
    REQUIRE(grid.count() == 6);
    REQUIRE(grid.dimension() == 2);

    std::vector<QuadratureScheme> too_many(4, gauss_legendre(64));
    REQUIRE_THROWS_AS(tensor_product(too_many), ArgumentError);
}

TEST_CASE("quadrature objective evaluation") {
    QuadratureObjective objective;
    objective.scheme = gauss_legendre(2);
    objective.domain = Domain::unit_cube(1);

    SECTION("x * xi^2 integrates to (2/3) x exactly") {
        objective.integrand = [](const Vec& x, const Vec& xi) { return x[0] * xi[0] * xi[0]; };
        Vec x(1);
        x[0] = 0.8;
        REQUIRE(quadrature_objective_eval(objective, x) ==
                Catch::Approx(2.0 / 3.0 * 0.8).margin(1e-14));
    }

    SECTION("probability rule passes a xi-independent integrand through") {
        QuadratureObjective prob;
        prob.scheme = gauss_hermite(4);
        prob.domain = Domain::unit_cube(1);
        prob.integrand = [](const Vec& x, const Vec&) { return 3.0 * x[0] + 1.0; };
        Vec x(1);
        x[0] = 0.5;
        REQUIRE(quadrature_objective_eval(prob, x) == Catch::Approx(2.5).margin(1e-12));
    }

    SECTION("odd noise term cancels under a symmetric rule") {
        objective.integrand = [](const Vec& x, const Vec& xi) { return x[0] * x[0] + xi[0]; };
        Vec x(1);
        x[0] = 0.3;
        REQUIRE(quadrature_objective_eval(objective, x) ==
                Catch::Approx(0.09 * 2.0).margin(1e-14));
    }

    SECTION("non-finite integrand names the node") {
        objective.integrand = [](const Vec&, const Vec& xi) {
            return xi[0] > 0 ? std::numeric_limits<double>::infinity() : 0.0;
        };
        Vec x(1);
        x[0] = 0.0;
        REQUIRE_THROWS_WITH(quadrature_objective_eval(objective, x),
                            Catch::Matchers::ContainsSubstring("node 1"));
    }
}

TEST_CASE("sparsify: identity, single term, renormalization") {
    QuadratureObjective objective;
    objective.scheme = gauss_hermite(3);
    objective.domain = Domain::unit_cube(1);
    objective.integrand = [](const Vec& x, const Vec& xi) { return x[0] + xi[0] * xi[0]; };
    Vec x(1);
    x[0] = 0.25;

    auto full = sparsify(objective, {0, 1, 2});
    REQUIRE(full.eval(x) == Catch::Approx(quadrature_objective_eval(objective, x)).margin(1e-14));

    auto single = sparsify(objective, {1});
    double expect = objective.scheme.weights[1] *
                    (x[0] + objective.scheme.nodes(1, 0) * objective.scheme.nodes(1, 0));
    REQUIRE(single.eval(x) == Catch::Approx(expect).margin(1e-14));

    auto renorm = sparsify(objective, {1}, Reweight::Renormalize);
    double g = x[0] + objective.scheme.nodes(1, 0) * objective.scheme.nodes(1, 0);
    REQUIRE(renorm.eval(x) == Catch::Approx(g).margin(1e-14));

    REQUIRE_THROWS_AS(sparsify(objective, {}), ArgumentError);
    REQUIRE_THROWS_AS(sparsify(objective, {7}), ArgumentError);
}

TEST_CASE("sparsify_largest keeps the heaviest nodes with index ties stable") {
    QuadratureObjective objective;
    objective.scheme = clenshaw_curtis(2);  // symmetric rule: paired weights tie
    objective.domain = Domain::unit_cube(1);
    objective.integrand = [](const Vec&, const Vec&) { return 1.0; };
    auto top = sparsify_largest(objective, 2);
    // center node has the largest weight; the tied pair resolves to the lower index
    REQUIRE(top.index_set.size() == 2);
    REQUIRE(top.index_set[0] == 1);
    REQUIRE(top.index_set[1] == 2);
}

TEST_CASE("nested chain structure and incremental costs") {
    Integrand g = [](const Vec& x, const Vec& xi) { return x[0] + xi[0]; };
    auto chain = nested_chain(g, Domain::unit_cube(1), QuadratureFamily::ClenshawCurtis,
                              {0, 1, 2});
    REQUIRE(chain.level_count() == 3);
    REQUIRE(chain.levels[0].scheme.count() == 1);
    REQUIRE(chain.levels[1].scheme.count() == 3);
    REQUIRE(chain.levels[2].scheme.count() == 5);
    REQUIRE(chain.levels[0].new_node_count == 1);
    REQUIRE(chain.levels[1].new_node_count == 2);
    REQUIRE(chain.levels[2].new_node_count == 2);

    auto single = nested_chain(g, Domain::unit_cube(1), QuadratureFamily::ClenshawCurtis, {3});
    REQUIRE(single.level_count() == 1);

    REQUIRE_THROWS_AS(
        nested_chain(g, Domain::unit_cube(1), QuadratureFamily::GaussLegendre, {0, 1}),
        ArgumentError);
    REQUIRE_THROWS_AS(
        nested_chain(g, Domain::unit_cube(1), QuadratureFamily::ClenshawCurtis, {2, 1}),
        ArgumentError);
}

TEST_CASE("sparsified prefixes correlate positively with the full objective") {
    // Forrester-style integrand family; correlation over a seeded design.
    Integrand g = [](const Vec& x, const Vec& xi) {
        const double t = 6.0 * x[0] - 2.0;
        return t * t * std::sin(12.0 * x[0] - 4.0 - xi[0]);
    };
    auto chain = nested_chain(g, Domain::unit_cube(1), QuadratureFamily::ClenshawCurtis,
                              {0, 1, 2});
    Mat design = low_discrepancy_design(Domain::unit_cube(1), 200, 31);
    const int hf = chain.level_count() - 1;
    for (int level = 0; level < hf; ++level) {
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (int i = 0; i < design.rows(); ++i) {
            Vec x = design.row(i).transpose();
            double lo = chain.eval(level, x);
            double hi_value = chain.eval(hf, x);
            sx += lo;
            sy += hi_value;
            sxx += lo * lo;
            syy += hi_value * hi_value;
            sxy += lo * hi_value;
        }
        const double n = design.rows();
        double corr = (n * sxy - sx * sy) /
                      std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
        REQUIRE(corr > 0.0);
    }
}
