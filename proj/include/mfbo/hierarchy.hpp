#pragma once

#include <mfbo/common.hpp>
#include <mfbo/gp.hpp>

#include <vector>

namespace mfbo {

/// Ordered hierarchy of fidelity levels t = 1..T: per-level datasets and
/// strictly positive evaluation costs, lowest fidelity first.
struct FidelityHierarchy {
    std::vector<Dataset> datasets;
    Vec costs;

    int levels() const { return static_cast<int>(datasets.size()); }
    int top() const { return levels() - 1; }

    void validate(bool require_nondecreasing_costs = true) const {
        if (datasets.empty()) throw ArgumentError("hierarchy: at least one level required");
        if (costs.size() != static_cast<Eigen::Index>(datasets.size()))
            throw ArgumentError("hierarchy: one cost per level required");
        for (Eigen::Index t = 0; t < costs.size(); ++t) {
            if (!(costs[t] > 0.0))
                throw ArgumentError("hierarchy: costs must be strictly positive");
            if (require_nondecreasing_costs && t > 0 && costs[t] < costs[t - 1])
                throw ArgumentError("hierarchy: costs must be non-decreasing across fidelities");
        }
        int dim = -1;
        for (const auto& data : datasets) {
            if (data.empty()) continue;
            if (dim < 0) dim = data.dim();
            if (data.dim() != dim)
                throw ArgumentError("hierarchy: datasets disagree on input dimension");
        }
    }

    int dim() const {
        for (const auto& data : datasets)
            if (!data.empty()) return data.dim();
        return 0;
    }
};

}  // namespace mfbo
