#pragma once

#include <mfbo/common.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace mfbo {

enum class QuadratureFamily { GaussLegendre, GaussHermite, ClenshawCurtis, TensorProduct };

inline const char* to_string(QuadratureFamily family) {
    switch (family) {
        case QuadratureFamily::GaussLegendre: return "gauss-legendre";
        case QuadratureFamily::GaussHermite: return "gauss-hermite";
        case QuadratureFamily::ClenshawCurtis: return "clenshaw-curtis";
        case QuadratureFamily::TensorProduct: return "tensor-product";
    }
    return "unknown";
}

/// Nodes and strictly positive weights approximating an integral.
struct QuadratureScheme {
    Mat nodes;    // n x s
    Vec weights;  // n, strictly positive
    QuadratureFamily family = QuadratureFamily::GaussLegendre;
    int level = 0;  // order for Gauss rules, level for Clenshaw-Curtis

    int count() const { return static_cast<int>(nodes.rows()); }
    int dimension() const { return static_cast<int>(nodes.cols()); }
    double weight_sum() const { return weights.sum(); }
};

namespace detail {

/// Roots and Christoffel weights of the degree-n orthogonal polynomial of a
/// symmetric three-term recurrence p_{k+1} = x p_k - b_k p_{k-1}. Roots are
/// found by interlacing bisection plus Newton polish on the orthonormal
/// recurrence; weights use the Christoffel sum 1 / sum_k ptilde_k(x)^2 with
/// ptilde_0 = 1/sqrt(mu0).
struct OrthogonalRule {
    std::vector<double> roots;
    std::vector<double> weights;
};

inline OrthogonalRule gauss_rule_from_recurrence(int n, const std::vector<double>& b, double mu0,
                                                 double bracket) {
    // Orthonormal evaluation of (p~_0 .. p~_n) and the derivative of p~_n.
    auto eval = [&](double x, int degree) {
        double prev = 0.0;
        double cur = 1.0 / std::sqrt(mu0);
        double dprev = 0.0;
        double dcur = 0.0;
        for (int k = 0; k < degree; ++k) {
            const double sb_next = std::sqrt(b[k + 1]);
            const double sb_prev = (k > 0) ? std::sqrt(b[k]) : 0.0;
            const double next = (x * cur - sb_prev * prev) / sb_next;
            const double dnext = (x * dcur + cur - sb_prev * dprev) / sb_next;
            prev = cur;
            cur = next;
            dprev = dcur;
            dcur = dnext;
        }
        return std::pair<double, double>(cur, dcur);
    };

    // Roots of successive degrees interlace; walk degrees up from 1.
    std::vector<double> roots{0.0};  // degree 1 root of a symmetric family
    for (int degree = 2; degree <= n; ++degree) {
        std::vector<double> next;
        next.reserve(degree);
        std::vector<double> edges;
        edges.push_back(-bracket);
        edges.insert(edges.end(), roots.begin(), roots.end());
        edges.push_back(bracket);
        for (int i = 0; i + 1 < static_cast<int>(edges.size()); ++i) {
            double lo = edges[i], hi = edges[i + 1];
            double flo = eval(lo, degree).first;
            double fhi = eval(hi, degree).first;
            if (flo == 0.0) {
                next.push_back(lo);
                continue;
            }
            // Bisection to a tight bracket, then Newton.
            for (int it = 0; it < 80 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
                double mid = 0.5 * (lo + hi);
                double fmid = eval(mid, degree).first;
                if ((flo < 0.0) == (fmid < 0.0)) {
                    lo = mid;
                    flo = fmid;
                } else {
                    hi = mid;
                    fhi = fmid;
                }
            }
            double x = 0.5 * (lo + hi);
            for (int it = 0; it < 50; ++it) {
                auto [p, dp] = eval(x, degree);
                if (dp == 0.0) break;
                double step = p / dp;
                x -= step;
                if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
            }
            next.push_back(x);
        }
        roots = std::move(next);
    }

    // Symmetrize: the family is even, so roots come in +- pairs.
    const int half = n / 2;
    for (int i = 0; i < half; ++i) {
        double mag = 0.5 * (std::abs(roots[i]) + std::abs(roots[n - 1 - i]));
        roots[i] = -mag;
        roots[n - 1 - i] = mag;
    }
    if (n % 2 == 1) roots[half] = 0.0;

    OrthogonalRule rule;
    rule.roots = roots;
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        double prev = 0.0;
        double cur = 1.0 / std::sqrt(mu0);
        sum += cur * cur;
        for (int k = 0; k + 1 < n; ++k) {
            const double sb_next = std::sqrt(b[k + 1]);
            const double sb_prev = (k > 0) ? std::sqrt(b[k]) : 0.0;
            const double nxt = (rule.roots[i] * cur - sb_prev * prev) / sb_next;
            prev = cur;
            cur = nxt;
            sum += cur * cur;
        }
        rule.weights[i] = 1.0 / sum;
    }
    // Symmetrize weights as well.
    for (int i = 0; i < half; ++i) {
        double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

}  // namespace detail

inline constexpr int kMaxGaussOrder = 64;
inline constexpr int kMaxClenshawCurtisLevel = 16;

/// n-point Gauss-Legendre rule on [-1,1] (weight function 1, weights sum to 2).
/// Exact for polynomials of degree <= 2n-1.
inline QuadratureScheme gauss_legendre(int n) {
    if (n < 1) throw ArgumentError("gauss_legendre: order must be at least 1");
    if (n > kMaxGaussOrder) throw ArgumentError("gauss_legendre: unsupported order (max 64)");
    std::vector<double> b(n + 1, 0.0);
    for (int k = 1; k <= n; ++k) b[k] = k * k / (4.0 * k * k - 1.0);
    auto rule = detail::gauss_rule_from_recurrence(n, b, 2.0, 1.0);
    QuadratureScheme scheme;
    scheme.family = QuadratureFamily::GaussLegendre;
    scheme.level = n;
    scheme.nodes.resize(n, 1);
    scheme.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        scheme.nodes(i, 0) = rule.roots[i];
        scheme.weights[i] = rule.weights[i];
    }
    return scheme;
}

/// n-point Gauss-Hermite rule in the probabilists' convention: exact for
/// polynomials of degree <= 2n-1 under the standard normal law; weights sum to 1.
inline QuadratureScheme gauss_hermite(int n) {
    if (n < 1) throw ArgumentError("gauss_hermite: order must be at least 1");
    if (n > kMaxGaussOrder) throw ArgumentError("gauss_hermite: unsupported order (max 64)");
    std::vector<double> b(n + 1, 0.0);
    for (int k = 1; k <= n; ++k) b[k] = static_cast<double>(k);
    auto rule = detail::gauss_rule_from_recurrence(n, b, 1.0, 2.0 * std::sqrt(n + 1.0));
    QuadratureScheme scheme;
    scheme.family = QuadratureFamily::GaussHermite;
    scheme.level = n;
    scheme.nodes.resize(n, 1);
    scheme.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        scheme.nodes(i, 0) = rule.roots[i];
        scheme.weights[i] = rule.weights[i];
    }
    return scheme;
}

/// Nested Clenshaw-Curtis rule on [-1,1] with 2^level + 1 nodes (one node at
/// level 0). Node sets are exactly nested across levels: every node is
/// cos(j*pi)/2^level evaluated from the same expression, so coarser nodes
/// reappear bit-identically at finer levels.
inline QuadratureScheme clenshaw_curtis(int level) {
    if (level < 0) throw ArgumentError("clenshaw_curtis: level must be non-negative");
    if (level > kMaxClenshawCurtisLevel)
        throw ArgumentError("clenshaw_curtis: unsupported level (max 16)");

    QuadratureScheme scheme;
    scheme.family = QuadratureFamily::ClenshawCurtis;
    scheme.level = level;
    if (level == 0) {
        scheme.nodes = Mat::Zero(1, 1);
        scheme.weights = Vec::Constant(1, 2.0);
        return scheme;
    }

    const int m = 1 << level;  // nodes = m + 1
    const int n = m + 1;
    scheme.nodes.resize(n, 1);
    scheme.weights.resize(n);

    // Nodes cos(j*pi/m), stored ascending; mirrored so +-pairs match exactly.
    for (int j = 0; j <= m / 2; ++j) {
        const double x = std::cos(j * std::numbers::pi / m);
        scheme.nodes(m - j, 0) = x;
        scheme.nodes(j, 0) = -x;
    }
    scheme.nodes(m / 2, 0) = 0.0;

    // Classic Clenshaw-Curtis weights for m+1 points (m even).
    auto interior_weight = [&](int j) {
        double sum = 0.0;
        for (int k = 0; k <= m / 2; ++k) {
            double term = std::cos(2.0 * k * j * std::numbers::pi / m) / (1.0 - 4.0 * k * k);
            if (k == 0 || k == m / 2) term *= 0.5;
            sum += term;
        }
        return 4.0 * sum / m;
    };
    const double endpoint = 1.0 / (static_cast<double>(m) * m - 1.0);
    scheme.weights[0] = endpoint;
    scheme.weights[m] = endpoint;
    for (int j = 1; j < m; ++j) scheme.weights[m - j] = interior_weight(j);
    return scheme;
}

/// Tensor product of per-dimension rules: Cartesian nodes, product weights.
/// The last rule's index varies fastest.
inline QuadratureScheme tensor_product(const std::vector<QuadratureScheme>& rules) {
    if (rules.empty()) throw ArgumentError("tensor_product: at least one rule required");
    long long count = 1;
    int dim = 0;
    for (const auto& rule : rules) {
        count *= rule.count();
        dim += rule.dimension();
        if (count > 1000000) throw ArgumentError("tensor_product: node count exceeds 10^6");
    }

    QuadratureScheme scheme;
    scheme.family = QuadratureFamily::TensorProduct;
    scheme.nodes.resize(count, dim);
    scheme.weights.resize(count);
    for (long long flat = 0; flat < count; ++flat) {
        long long rest = flat;
        double weight = 1.0;
        int col = dim;
        for (int r = static_cast<int>(rules.size()) - 1; r >= 0; --r) {
            const auto& rule = rules[r];
            const int idx = static_cast<int>(rest % rule.count());
            rest /= rule.count();
            col -= rule.dimension();
            scheme.nodes.block(flat, col, 1, rule.dimension()) = rule.nodes.row(idx);
            weight *= rule.weights[idx];
        }
        scheme.weights[flat] = weight;
    }
    return scheme;
}

using Integrand = std::function<double(const Vec& x, const Vec& xi)>;

/// Objective of the form f(x) = sum_i w_i g(x, xi_i): a weighted sum of
/// condition-specific performances, or a quadrature approximation of an
/// integral objective.
struct QuadratureObjective {
    Integrand integrand;
    QuadratureScheme scheme;
    Domain domain;
};

/// Evaluate the weighted sum at x, in fixed node order for reproducibility.
inline double quadrature_objective_eval(const QuadratureObjective& objective, const Vec& x) {
    double total = 0.0;
    for (int i = 0; i < objective.scheme.count(); ++i) {
        const double gi = objective.integrand(x, objective.scheme.nodes.row(i).transpose());
        if (!std::isfinite(gi))
            throw NumericalError("quadrature objective: integrand not finite at node " +
                                 std::to_string(i));
        total += objective.scheme.weights[i] * gi;
    }
    return total;
}

enum class Reweight { None, Renormalize };

/// Partial quadrature sum over an index subset; a low-fidelity model for the
/// full weighted-sum objective.
struct SparsifiedLfm {
    Integrand integrand;
    Mat nodes;            // subset nodes, parent order
    Vec weights;          // subset weights after optional reweighting
    std::vector<int> index_set;

    double eval(const Vec& x) const {
        double total = 0.0;
        for (int i = 0; i < nodes.rows(); ++i) {
            const double gi = integrand(x, nodes.row(i).transpose());
            if (!std::isfinite(gi))
                throw NumericalError("sparsified lfm: integrand not finite at node " +
                                     std::to_string(index_set[i]));
            total += weights[i] * gi;
        }
        return total;
    }
};

inline SparsifiedLfm sparsify(const QuadratureObjective& objective, std::vector<int> index_set,
                              Reweight reweight = Reweight::None) {
    if (index_set.empty()) throw ArgumentError("sparsify: index set must be non-empty");
    std::sort(index_set.begin(), index_set.end());
    index_set.erase(std::unique(index_set.begin(), index_set.end()), index_set.end());
    for (int i : index_set)
        if (i < 0 || i >= objective.scheme.count())
            throw ArgumentError("sparsify: index out of range");

    SparsifiedLfm lfm;
    lfm.integrand = objective.integrand;
    lfm.index_set = index_set;
    lfm.nodes.resize(index_set.size(), objective.scheme.dimension());
    lfm.weights.resize(index_set.size());
    for (std::size_t i = 0; i < index_set.size(); ++i) {
        lfm.nodes.row(i) = objective.scheme.nodes.row(index_set[i]);
        lfm.weights[i] = objective.scheme.weights[index_set[i]];
    }
    if (reweight == Reweight::Renormalize)
        lfm.weights *= objective.scheme.weight_sum() / lfm.weights.sum();
    return lfm;
}

/// Size-k sparsification keeping the k largest-weight nodes (ties broken by
/// lower node index).
inline SparsifiedLfm sparsify_largest(const QuadratureObjective& objective, int k,
                                      Reweight reweight = Reweight::None) {
    if (k < 1 || k > objective.scheme.count())
        throw ArgumentError("sparsify_largest: subset size out of range");
    std::vector<int> order(objective.scheme.count());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return objective.scheme.weights[a] > objective.scheme.weights[b];
    });
    order.resize(k);
    return sparsify(objective, order, reweight);
}

/// One level of a nested low-fidelity chain.
struct NestedChainLevel {
    QuadratureScheme scheme;
    int cc_level = 0;
    int new_node_count = 0;  // integrand calls beyond the previous chain level
};

/// A hierarchy of sparsified quadrature objectives built from a nested rule:
/// coarse nodes are reused at finer levels, so stepping up a level only costs
/// the integrand calls at the new nodes. The last level is the high-fidelity
/// objective.
struct NestedQuadratureChain {
    Integrand integrand;
    Domain domain;
    std::vector<NestedChainLevel> levels;

    int level_count() const { return static_cast<int>(levels.size()); }

    double eval(int level, const Vec& x) const {
        const auto& entry = levels.at(level);
        double total = 0.0;
        for (int i = 0; i < entry.scheme.count(); ++i) {
            const double gi = integrand(x, entry.scheme.nodes.row(i).transpose());
            if (!std::isfinite(gi))
                throw NumericalError("nested chain: integrand not finite at node " +
                                     std::to_string(i));
            total += entry.scheme.weights[i] * gi;
        }
        return total;
    }
};

inline NestedQuadratureChain nested_chain(Integrand integrand, const Domain& domain,
                                          QuadratureFamily family,
                                          const std::vector<int>& levels) {
    if (family != QuadratureFamily::ClenshawCurtis)
        throw ArgumentError("nested_chain: only nested rule families are supported here");
    if (levels.empty()) throw ArgumentError("nested_chain: at least one level required");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] <= levels[i - 1])
            throw ArgumentError("nested_chain: levels must be strictly increasing");

    NestedQuadratureChain chain;
    chain.integrand = std::move(integrand);
    chain.domain = domain;
    int previous_count = 0;
    for (int level : levels) {
        NestedChainLevel entry;
        entry.scheme = clenshaw_curtis(level);
        entry.cc_level = level;
        entry.new_node_count = entry.scheme.count() - previous_count;
        previous_count = entry.scheme.count();
        chain.levels.push_back(std::move(entry));
    }
    return chain;
}

inline NestedQuadratureChain nested_chain(const QuadratureObjective& objective,
                                          QuadratureFamily family,
                                          const std::vector<int>& levels) {
    return nested_chain(objective.integrand, objective.domain, family, levels);
}

}  // namespace mfbo
