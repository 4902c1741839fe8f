#pragma once

#include <mfbo/common.hpp>

#include <string>
#include <vector>

namespace mfbo {

/// Pool of sample candidates with multi-dimensional low-fidelity outputs and,
/// optionally, their surrogate approximations (for the loss term).
struct CandidatePool {
    std::vector<std::string> ids;       // one identifier per candidate
    Mat lf_outputs;                     // |P| x q
    Mat surrogate_outputs;              // |P| x q, or empty when no losses

    int size() const { return static_cast<int>(lf_outputs.rows()); }
    int output_dim() const { return static_cast<int>(lf_outputs.cols()); }
    bool has_losses() const { return surrogate_outputs.rows() > 0; }

    void validate() const {
        if (lf_outputs.rows() == 0) throw ArgumentError("candidate pool is empty");
        if (lf_outputs.cols() < 1) throw ArgumentError("candidate outputs need dimension >= 1");
        if (!ids.empty() && static_cast<int>(ids.size()) != size())
            throw ArgumentError("candidate pool: id count does not match output count");
        if (has_losses() && (surrogate_outputs.rows() != lf_outputs.rows() ||
                             surrogate_outputs.cols() != lf_outputs.cols()))
            throw ArgumentError("candidate pool: surrogate outputs differ in shape");
    }
};

/// Selected candidates in order plus an orthonormal basis of the span of
/// their low-fidelity output vectors.
struct SelectionState {
    std::vector<int> selected;
    Mat basis;  // q x r, orthonormal columns

    int rank() const { return static_cast<int>(basis.cols()); }

    /// Grow the span by one vector; vectors already inside the span (residual
    /// below 1e-10) leave the basis unchanged.
    void absorb(const Vec& v) {
        Vec residual = v;
        // Modified Gram-Schmidt with one re-orthogonalization pass.
        for (int pass = 0; pass < 2; ++pass)
            for (int c = 0; c < basis.cols(); ++c)
                residual -= basis.col(c).dot(residual) * basis.col(c);
        const double norm = residual.norm();
        if (norm < 1e-10) return;
        basis.conservativeResize(v.size(), basis.cols() + 1);
        basis.col(basis.cols() - 1) = residual / norm;
    }
};

/// Euclidean distance from v to the span of the selected outputs; the empty
/// span gives ||v||.
inline double distance_to_span(const Vec& v, const SelectionState& state) {
    if (state.basis.cols() == 0) return v.norm();
    if (v.size() != state.basis.rows())
        throw ArgumentError("distance_to_span: vector dimension does not match basis");
    Vec residual = v;
    for (int c = 0; c < state.basis.cols(); ++c)
        residual -= state.basis.col(c).dot(residual) * state.basis.col(c);
    const double norm = residual.norm();
    // Rounding residue of an in-span vector must read as an exact zero, or it
    // would beat the lowest-index tie rule among fully covered candidates.
    return norm <= 1e-12 * v.norm() ? 0.0 : norm;
}

/// Greedy score of one candidate: distance-to-span of its LF output plus the
/// weighted surrogate approximation loss.
inline double selection_score(const CandidatePool& pool, const SelectionState& state,
                              double span_weight, int candidate) {
    double score = distance_to_span(pool.lf_outputs.row(candidate).transpose(), state);
    if (pool.has_losses())
        score += span_weight * (pool.lf_outputs.row(candidate) -
                                pool.surrogate_outputs.row(candidate))
                                   .norm();
    return score;
}

/// Index of the unselected candidate maximizing the greedy score; ties break
/// to the lowest candidate index.
inline int select_next(const CandidatePool& pool, const SelectionState& state,
                       double span_weight) {
    pool.validate();
    std::vector<bool> taken(pool.size(), false);
    for (int i : state.selected) taken[i] = true;

    int best = -1;
    double best_score = 0.0;
    for (int i = 0; i < pool.size(); ++i) {
        if (taken[i]) continue;
        const double score = selection_score(pool, state, span_weight, i);
        if (best < 0 || score > best_score) {
            best = i;
            best_score = score;
        }
    }
    if (best < 0) throw ArgumentError("select_next: no unselected candidates remain");
    return best;
}

/// k rounds of greedy selection, each absorbing the chosen LF output into the
/// span. Default weight: 1 when losses are supplied, 0 otherwise.
inline std::vector<int> greedy_select(const CandidatePool& pool, int k, double span_weight) {
    pool.validate();
    if (k < 1 || k > pool.size())
        throw ArgumentError("greedy_select: k must be between 1 and the pool size");

    SelectionState state;
    state.basis.resize(pool.output_dim(), 0);
    for (int round = 0; round < k; ++round) {
        const int pick = select_next(pool, state, span_weight);
        state.selected.push_back(pick);
        state.absorb(pool.lf_outputs.row(pick).transpose());
    }
    return state.selected;
}

inline std::vector<int> greedy_select(const CandidatePool& pool, int k) {
    return greedy_select(pool, k, pool.has_losses() ? 1.0 : 0.0);
}

}  // namespace mfbo
