#include <mfbo/lowdisc.hpp>
#include <mfbo/rng.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace mfbo;

TEST_CASE("rng streams are reproducible and fork-independent") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

    Rng parent(7);
    Rng child_before = parent.fork(3);
    parent.uniform();
    parent.normal();
    Rng child_after = parent.fork(3);
    REQUIRE(child_before.next_u64() == child_after.next_u64());
}

TEST_CASE("rng normal moments") {
    Rng rng(123);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double z = rng.normal();
        sum += z;
        sum2 += z * z;
    }
    REQUIRE(std::abs(sum / n) < 0.01);
    REQUIRE(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("initial design: containment and determinism") {
    Domain domain = Domain::unit_cube(1);
    auto single = initial_design(domain, {1}, 5);
    REQUIRE(single.size() == 1);
    REQUIRE(single[0].rows() == 1);
    REQUIRE(domain.contains(single[0].row(0).transpose()));

    auto again = initial_design(domain, {1}, 5);
    REQUIRE(single[0] == again[0]);

    auto other = initial_design(domain, {1}, 6);
    REQUIRE(single[0] != other[0]);
}

TEST_CASE("initial design: quadrant balance of 128 points in the unit square") {
    // Low-discrepancy sanity bound: every quadrant holds between 16 and 48 of
    // 128 points, across a handful of seeds.
    for (std::uint64_t seed : {0ULL, 1ULL, 2ULL, 17ULL, 123456ULL}) {
        Mat pts = low_discrepancy_design(Domain::unit_cube(2), 128, seed);
        int counts[4] = {0, 0, 0, 0};
        for (int i = 0; i < pts.rows(); ++i) {
            int q = (pts(i, 0) >= 0.5 ? 1 : 0) + (pts(i, 1) >= 0.5 ? 2 : 0);
            ++counts[q];
        }
        for (int q = 0; q < 4; ++q) {
            REQUIRE(counts[q] >= 16);
            REQUIRE(counts[q] <= 48);
        }
    }
}

TEST_CASE("initial design rejects empty levels") {
    REQUIRE_THROWS_AS(initial_design(Domain::unit_cube(2), {4, 0}, 1), ArgumentError);
}
