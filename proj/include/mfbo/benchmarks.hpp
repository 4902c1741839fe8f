#pragma once

#include <mfbo/campaign.hpp>
#include <mfbo/pce.hpp>
#include <mfbo/quadrature.hpp>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace mfbo {

/// Forrester test pair: f_H(x) = (6x-2)^2 sin(12x-4) on [0,1] with the
/// standard shifted-and-scaled low-fidelity companion.
inline double forrester_hf(double x) {
    const double t = 6.0 * x - 2.0;
    return t * t * std::sin(12.0 * x - 4.0);
}

inline double forrester_lf(double x) { return 0.5 * forrester_hf(x) + 10.0 * (x - 0.5) - 5.0; }

struct BenchmarkSpec {
    std::string name;
    std::string description;
    int dimension = 1;
    Objective objective;
};

namespace detail {

/// 1-D minimum by dense grid plus golden-section refinement.
inline std::pair<double, double> grid_minimize(const std::function<double(double)>& f, double lo,
                                               double hi, int grid) {
    double best_x = lo, best_f = f(lo);
    for (int i = 1; i <= grid; ++i) {
        const double x = lo + (hi - lo) * i / grid;
        const double fx = f(x);
        if (fx < best_f) {
            best_f = fx;
            best_x = x;
        }
    }
    double a = std::max(lo, best_x - (hi - lo) / grid);
    double b = std::min(hi, best_x + (hi - lo) / grid);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    for (int it = 0; it < 80; ++it) {
        if (f(c) < f(d))
            b = d;
        else
            a = c;
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

}  // namespace detail

inline BenchmarkSpec make_forrester_benchmark() {
    BenchmarkSpec spec;
    spec.name = "forrester";
    spec.description = "forrester 1-d pair, lf = 0.5 hf + 10(x-1/2) - 5, costs {0.2, 1}";
    spec.dimension = 1;
    spec.objective.evaluators = {[](const Vec& x) { return forrester_lf(x[0]); },
                                 [](const Vec& x) { return forrester_hf(x[0]); }};
    spec.objective.costs = Vec(2);
    spec.objective.costs << 0.2, 1.0;
    spec.objective.domain = Domain::unit_cube(1);
    auto [xmin, fmin] = detail::grid_minimize(forrester_hf, 0.0, 1.0, 100000);
    spec.objective.known_optimum = fmin;
    spec.objective.optimum_location = Vec::Constant(1, xmin);
    return spec;
}

/// Quadrature-Forrester family: g(x, xi) = (6x-2)^2 sin(12x-4-xi) integrated
/// over xi in [-1, 1] by a nested Clenshaw-Curtis chain. Each chain level is a
/// fidelity level; integrand values are cached per (x, node), so repeated or
/// refined evaluations are charged only for fresh integrand calls.
struct QuadForresterBenchmark {
    NestedQuadratureChain chain;
    Objective objective;
    std::shared_ptr<long long> integrand_calls;
};

inline QuadForresterBenchmark make_quad_forrester(const std::vector<int>& levels = {0, 1, 2}) {
    Integrand g = [](const Vec& x, const Vec& xi) {
        const double t = 6.0 * x[0] - 2.0;
        return t * t * std::sin(12.0 * x[0] - 4.0 - xi[0]);
    };
    QuadForresterBenchmark bench;
    bench.chain = nested_chain(g, Domain::unit_cube(1), QuadratureFamily::ClenshawCurtis,
                               levels);
    bench.integrand_calls = std::make_shared<long long>(0);

    struct Cache {
        std::map<std::pair<double, double>, double> values;  // (x, node) -> g
    };
    auto cache = std::make_shared<Cache>();
    auto chain_ptr = std::make_shared<NestedQuadratureChain>(bench.chain);
    auto calls = bench.integrand_calls;

    const int T = static_cast<int>(levels.size());
    bench.objective.domain = Domain::unit_cube(1);
    bench.objective.costs = Vec(T);
    for (int t = 0; t < T; ++t)
        bench.objective.costs[t] = chain_ptr->levels[t].scheme.count();

    for (int t = 0; t < T; ++t) {
        bench.objective.evaluators.push_back([chain_ptr, cache, calls, t](const Vec& x) {
            const auto& scheme = chain_ptr->levels[t].scheme;
            double total = 0.0;
            for (int i = 0; i < scheme.count(); ++i) {
                const std::pair<double, double> key{x[0], scheme.nodes(i, 0)};
                auto it = cache->values.find(key);
                double gi;
                if (it == cache->values.end()) {
                    gi = chain_ptr->integrand(x, scheme.nodes.row(i).transpose());
                    cache->values.emplace(key, gi);
                    ++*calls;
                } else {
                    gi = it->second;
                }
                total += scheme.weights[i] * gi;
            }
            return total;
        });
    }
    // cost of an evaluation = integrand calls it would trigger now
    bench.objective.cost_fn = [chain_ptr, cache](int level, const Vec& x) {
        const auto& scheme = chain_ptr->levels[level].scheme;
        int fresh = 0;
        for (int i = 0; i < scheme.count(); ++i)
            if (!cache->values.count({x[0], scheme.nodes(i, 0)})) ++fresh;
        return std::max(static_cast<double>(fresh), 1e-9);
    };

    const int top = T - 1;
    auto hf_eval = [chain_ptr, top](double x) {
        Vec v(1);
        v[0] = x;
        double total = 0.0;
        const auto& scheme = chain_ptr->levels[top].scheme;
        for (int i = 0; i < scheme.count(); ++i)
            total += scheme.weights[i] * chain_ptr->integrand(v, scheme.nodes.row(i).transpose());
        return total;
    };
    auto [xmin, fmin] = detail::grid_minimize(hf_eval, 0.0, 1.0, 20000);
    bench.objective.known_optimum = fmin;
    bench.objective.optimum_location = Vec::Constant(1, xmin);
    return bench;
}

inline BenchmarkSpec make_quad_forrester_benchmark() {
    auto bench = make_quad_forrester();
    BenchmarkSpec spec;
    spec.name = "quad-forrester";
    spec.description =
        "forrester integrand family over xi in [-1,1], nested clenshaw-curtis chain {0,1,2}";
    spec.dimension = 1;
    spec.objective = bench.objective;
    return spec;
}

/// The synthetic PCE pair as a 2-d optimization benchmark:
/// lf = x1 + x2^2, hf = lf + 0.1 x1 x2 on [-1,1]^2.
inline double pce_pair_lf(const Vec& x) { return x[0] + x[1] * x[1]; }
inline double pce_pair_hf(const Vec& x) { return pce_pair_lf(x) + 0.1 * x[0] * x[1]; }

inline BenchmarkSpec make_pce_pair_benchmark() {
    BenchmarkSpec spec;
    spec.name = "pce-pair";
    spec.description = "synthetic pair lf = x1 + x2^2, hf = lf + 0.1 x1 x2 on [-1,1]^2";
    spec.dimension = 2;
    spec.objective.evaluators = {pce_pair_lf, pce_pair_hf};
    spec.objective.costs = Vec(2);
    spec.objective.costs << 0.2, 1.0;
    spec.objective.domain = Domain(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
    // minimize x1 + x2^2 + 0.1 x1 x2: x1 = -1, then x2 = 0.05
    spec.objective.known_optimum = -1.0025;
    Vec loc(2);
    loc << -1.0, 0.05;
    spec.objective.optimum_location = loc;
    return spec;
}

using BenchmarkRegistry = std::map<std::string, BenchmarkSpec>;

inline BenchmarkRegistry register_builtin_benchmarks() {
    BenchmarkRegistry registry;
    for (auto&& spec : {make_forrester_benchmark(), make_quad_forrester_benchmark(),
                        make_pce_pair_benchmark()}) {
        if (registry.count(spec.name)) throw ArgumentError("duplicate benchmark name");
        registry.emplace(spec.name, spec);
    }
    return registry;
}

}  // namespace mfbo
