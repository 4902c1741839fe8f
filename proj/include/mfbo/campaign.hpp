#pragma once

#include <mfbo/acq_opt.hpp>
#include <mfbo/acquisition.hpp>
#include <mfbo/augmented.hpp>
#include <mfbo/composition.hpp>
#include <mfbo/gp_fit.hpp>
#include <mfbo/hierarchy.hpp>
#include <mfbo/lowdisc.hpp>
#include <mfbo/recursive.hpp>

#include <algorithm>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mfbo {

/// Optimization target with one evaluator per fidelity level, the last being
/// the high-fidelity ground truth. Costs may be static per level or dynamic
/// through `cost_fn` (e.g. incremental quadrature evaluation).
struct Objective {
    std::vector<std::function<double(const Vec&)>> evaluators;
    Vec costs;
    Domain domain;
    std::function<double(int, const Vec&)> cost_fn;  // optional; overrides costs
    std::optional<double> known_optimum;
    std::optional<Vec> optimum_location;

    int levels() const { return static_cast<int>(evaluators.size()); }
    int hf() const { return levels() - 1; }

    double cost(int level, const Vec& x) const {
        if (cost_fn) return cost_fn(level, x);
        return costs[level];
    }

    void validate() const {
        if (evaluators.empty()) throw ArgumentError("objective: at least one evaluator required");
        for (const auto& fn : evaluators)
            if (!fn) throw ArgumentError("objective: null evaluator");
        if (!cost_fn) {
            if (costs.size() != levels())
                throw ArgumentError("objective: one cost per level required");
            for (Eigen::Index i = 0; i < costs.size(); ++i)
                if (!(costs[i] > 0.0))
                    throw ArgumentError("objective: costs must be strictly positive");
        }
        if (domain.dim() < 1) throw ArgumentError("objective: domain required");
    }
};

struct HistoryRecord {
    int iteration = 0;  // 0 marks the initial design
    int level = 0;
    Vec x;
    double y = 0.0;
    double cost = 0.0;
    double cum_cost = 0.0;
    double best_hf = std::numeric_limits<double>::infinity();
};

struct CampaignHistory {
    std::vector<HistoryRecord> records;
    std::uint64_t seed = 0;
    std::string config_digest;
    double initial_design_cost = 0.0;
    bool failed = false;

    double final_best() const {
        return records.empty() ? std::numeric_limits<double>::infinity()
                               : records.back().best_hf;
    }
    double final_cum_cost() const {
        return records.empty() ? 0.0 : records.back().cum_cost;
    }
};

enum class SurrogateType { SingleGp, Recursive, NonlinearAr, InputAugmented };

inline const char* to_string(SurrogateType type) {
    switch (type) {
        case SurrogateType::SingleGp: return "gp";
        case SurrogateType::Recursive: return "recursive";
        case SurrogateType::NonlinearAr: return "nonlinear-ar";
        case SurrogateType::InputAugmented: return "input-augmented";
    }
    return "unknown";
}

struct ModelSpec {
    SurrogateType type = SurrogateType::Recursive;
    KernelFamily kernel = KernelFamily::SquaredExponentialArd;
    int restarts = 8;
    std::vector<int> initial_design;  // per level; empty uses the defaults
};

/// Uniform surface the campaign loop needs from any fitted prior.
class Surrogate {
public:
    virtual ~Surrogate() = default;
    virtual void fit(const FidelityHierarchy& hierarchy, std::uint64_t seed) = 0;
    virtual std::pair<double, double> predict(int level, const Vec& x) const = 0;
    virtual std::pair<Vec, Mat> joint(int level, const Mat& points) const = 0;
    virtual Correlation hf_correlation(int level, const Vec& x) const = 0;
};

namespace detail {

inline KernelSpec default_kernel_init(KernelFamily family, const Domain& domain,
                                      const Dataset& data) {
    const int d = domain.dim();
    KernelSpec spec;
    spec.family = family;
    spec.lengthscales = 0.3 * (domain.upper - domain.lower);
    double var = 1.0;
    if (data.size() > 1) {
        const double mean = data.outputs.mean();
        var = (data.outputs.array() - mean).square().sum() / (data.size() - 1);
    }
    spec.amplitude = std::min(std::max(var, 1e-2), 1e3);
    spec.noise_variance = 1e-6;
    (void)d;
    return spec;
}

class SingleGpSurrogate final : public Surrogate {
public:
    SingleGpSurrogate(KernelFamily family, int restarts, Domain domain)
        : family_(family), restarts_(restarts), domain_(std::move(domain)) {}

    void fit(const FidelityHierarchy& hierarchy, std::uint64_t seed) override {
        const Dataset& data = hierarchy.datasets.back();
        FitOptions options;
        options.restarts = restarts_;
        options.seed = seed;
        KernelSpec spec =
            fit_hyperparameters(default_kernel_init(family_, domain_, data), data, options);
        gp_ = Gp::from_spec(spec).condition(data);
    }

    std::pair<double, double> predict(int, const Vec& x) const override {
        return gp_->predict(x);
    }
    std::pair<Vec, Mat> joint(int, const Mat& points) const override {
        return gp_->joint(points);
    }
    Correlation hf_correlation(int, const Vec& x) const override {
        return gp_->predict(x).second > 1e-12 ? Correlation{1.0, false} : Correlation{0.0, true};
    }

private:
    KernelFamily family_;
    int restarts_;
    Domain domain_;
    std::optional<Gp> gp_;
};

class RecursiveSurrogate final : public Surrogate {
public:
    RecursiveSurrogate(KernelFamily family, int restarts, Domain domain)
        : family_(family), restarts_(restarts), domain_(std::move(domain)) {}

    void fit(const FidelityHierarchy& hierarchy, std::uint64_t seed) override {
        FitOptions options;
        options.restarts = restarts_;
        options.seed = seed;
        const int T = hierarchy.levels();
        std::vector<KernelSpec> inits;
        std::vector<std::vector<MeanFn>> bases;
        for (int t = 0; t < T; ++t) {
            inits.push_back(default_kernel_init(family_, domain_, hierarchy.datasets[t]));
            if (t > 0) bases.push_back(constant_basis());
        }
        model_ = fit_recursive(hierarchy, bases, inits, options);
        top_ = T - 1;
    }

    std::pair<double, double> predict(int level, const Vec& x) const override {
        return model_->predict(level, x);
    }
    std::pair<Vec, Mat> joint(int level, const Mat& points) const override {
        return model_->joint(level, points);
    }
    Correlation hf_correlation(int level, const Vec& x) const override {
        return model_->correlation(level, top_, x);
    }

private:
    KernelFamily family_;
    int restarts_;
    Domain domain_;
    std::optional<RecursiveModel> model_;
    int top_ = 0;
};

class NonlinearArSurrogate final : public Surrogate {
public:
    NonlinearArSurrogate(KernelFamily family, int restarts, Domain domain)
        : family_(family), restarts_(restarts), domain_(std::move(domain)) {}

    void fit(const FidelityHierarchy& hierarchy, std::uint64_t seed) override {
        FitOptions options;
        options.restarts = restarts_;
        options.seed = seed;
        std::vector<KernelSpec> inits;
        for (int t = 0; t < hierarchy.levels(); ++t)
            inits.push_back(default_kernel_init(family_, domain_, hierarchy.datasets[t]));
        model_ = fit_nonlinear_autoregressive(hierarchy, inits, options);
        top_ = hierarchy.levels() - 1;
    }

    std::pair<double, double> predict(int level, const Vec& x) const override {
        return model_->predict(level, x);
    }
    std::pair<Vec, Mat> joint(int level, const Mat& points) const override {
        return model_->joint(level, points);
    }
    Correlation hf_correlation(int level, const Vec& x) const override {
        // no joint law across composition levels; fall back to full correlation
        // for the top level and degeneracy for collapsed lower levels
        if (level == top_)
            return predict(level, x).second > 1e-12 ? Correlation{1.0, false}
                                                    : Correlation{0.0, true};
        const double var = predict(level, x).second;
        return var > 1e-12 ? Correlation{1.0, false} : Correlation{0.0, true};
    }

private:
    KernelFamily family_;
    int restarts_;
    Domain domain_;
    std::optional<NonlinearArModel> model_;
    int top_ = 0;
};

class InputAugmentedSurrogate final : public Surrogate {
public:
    InputAugmentedSurrogate(KernelFamily family, int restarts, Domain domain)
        : family_(family), restarts_(restarts), domain_(std::move(domain)) {}

    void fit(const FidelityHierarchy& hierarchy, std::uint64_t seed) override {
        FitOptions options;
        options.restarts = restarts_;
        options.seed = seed;
        Dataset pooled;
        for (const auto& data : hierarchy.datasets)
            for (int i = 0; i < data.size(); ++i)
                pooled.append(data.inputs.row(i).transpose(), data.outputs[i]);
        KernelSpec init = default_kernel_init(family_, domain_, pooled);
        model_ = fit_input_augmented(hierarchy, default_fidelity_labels(hierarchy.levels()),
                                     init, options);
    }

    std::pair<double, double> predict(int level, const Vec& x) const override {
        return model_->predict(level, x);
    }
    std::pair<Vec, Mat> joint(int level, const Mat& points) const override {
        return model_->joint(level, points);
    }
    Correlation hf_correlation(int level, const Vec& x) const override {
        return model_->correlation(level, model_->hf_index(), x);
    }

private:
    KernelFamily family_;
    int restarts_;
    Domain domain_;
    std::optional<InputAugmentedModel> model_;
};

}  // namespace detail

inline std::unique_ptr<Surrogate> make_surrogate(const ModelSpec& spec, const Domain& domain) {
    switch (spec.type) {
        case SurrogateType::SingleGp:
            return std::make_unique<detail::SingleGpSurrogate>(spec.kernel, spec.restarts,
                                                               domain);
        case SurrogateType::Recursive:
            return std::make_unique<detail::RecursiveSurrogate>(spec.kernel, spec.restarts,
                                                                domain);
        case SurrogateType::NonlinearAr:
            return std::make_unique<detail::NonlinearArSurrogate>(spec.kernel, spec.restarts,
                                                                  domain);
        case SurrogateType::InputAugmented:
            return std::make_unique<detail::InputAugmentedSurrogate>(spec.kernel, spec.restarts,
                                                                     domain);
    }
    throw ArgumentError("make_surrogate: unknown surrogate type");
}

/// Default initial design sizes: max(5, 2d) high-fidelity points, four times
/// that at every lower level.
inline std::vector<int> default_initial_design(int levels, int dim, bool single_fidelity) {
    const int hf_count = std::max(5, 2 * dim);
    std::vector<int> counts(levels, 4 * hf_count);
    counts.back() = hf_count;
    if (single_fidelity)
        for (int t = 0; t + 1 < levels; ++t) counts[t] = 0;
    return counts;
}

/// The Bayesian optimization loop: initial design, refit, acquisition
/// maximization, fidelity pick, budget accounting, logging. Fully reproducible
/// given the seed; stops before any evaluation that would exceed the budget.
inline CampaignHistory run_campaign(const Objective& objective, const ModelSpec& model_spec,
                                    const AcquisitionSpec& acq_spec,
                                    const MfPolicySpec& policy, double budget,
                                    std::uint64_t seed) {
    objective.validate();
    acq_spec.validate();
    policy.validate();
    if (!(budget > 0.0)) throw ArgumentError("run_campaign: budget must be positive");

    const int T = objective.levels();
    const int hf = objective.hf();
    const int d = objective.domain.dim();
    const bool single = policy.mode == MfPolicyMode::SingleFidelity || T == 1;
    Rng root(seed);

    CampaignHistory history;
    history.seed = seed;

    // --- initial design ---
    std::vector<int> counts = model_spec.initial_design.empty()
                                  ? default_initial_design(T, d, single)
                                  : model_spec.initial_design;
    if (static_cast<int>(counts.size()) != T)
        throw ArgumentError("run_campaign: initial design needs one count per level");
    if (counts[hf] < 1)
        throw ArgumentError("run_campaign: the high-fidelity level needs initial points");

    std::vector<int> design_counts = counts;
    for (int& c : design_counts) c = std::max(c, 1);  // generator needs >= 1; unused levels drop out
    auto designs = initial_design(objective.domain, design_counts, root.fork(1).seed());

    FidelityHierarchy hierarchy;
    hierarchy.datasets.resize(T);
    hierarchy.costs = objective.cost_fn ? Vec::Ones(T) : objective.costs;

    double cum_cost = 0.0;
    double best_hf = std::numeric_limits<double>::infinity();
    auto evaluate_and_log = [&](int iteration, int level, const Vec& x) {
        const double cost = objective.cost(level, x);
        const double y = objective.evaluators[level](x);
        cum_cost += cost;
        if (level == hf) best_hf = std::min(best_hf, y);
        history.records.push_back({iteration, level, x, y, cost, cum_cost, best_hf});
        hierarchy.datasets[level].append(x, y);
    };

    double initial_cost = 0.0;
    for (int t = T - 1; t >= 0; --t) {
        if (counts[t] == 0) continue;
        for (int i = 0; i < counts[t]; ++i)
            initial_cost += objective.cost(t, designs[t].row(i).transpose());
    }
    if (initial_cost > budget + 1e-12)
        throw ArgumentError("run_campaign: budget below the initial design cost");

    // high-fidelity level first so the incumbent is defined from record one
    for (int t = T - 1; t >= 0; --t)
        for (int i = 0; i < counts[t]; ++i)
            evaluate_and_log(0, t, designs[t].row(i).transpose());
    history.initial_design_cost = cum_cost;

    // --- adaptive loop ---
    auto surrogate = make_surrogate(model_spec, objective.domain);
    int consecutive_lf = 0;
    int iterations_since_fit = 0;
    bool fitted = false;

    constexpr int kMaxIterations = 10000;  // safety stop for zero-cost cycles
    for (int iteration = 1; iteration <= kMaxIterations; ++iteration) {
        int total_points = 0;
        for (const auto& data : hierarchy.datasets) total_points += data.size();
        const bool refit_due = !fitted || total_points <= 50 || iterations_since_fit >= 5;
        if (refit_due) {
            bool ok = false;
            for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
                try {
                    surrogate->fit(hierarchy, root.fork(10 * iteration + attempt).seed());
                    ok = true;
                } catch (const NumericalError&) {
                }
            }
            if (!ok) {
                history.failed = true;
                break;
            }
            fitted = true;
            iterations_since_fit = 0;
        }
        ++iterations_since_fit;

        // location from the high-fidelity acquisition surface
        Vec x_next;
        if (acq_spec.kind == AcquisitionKind::ThompsonSampling) {
            Mat lattice = low_discrepancy_design(objective.domain, acq_spec.ts_candidates,
                                                 root.fork(3 * iteration + 1).seed());
            auto [mu, C] = surrogate->joint(hf, lattice);
            const int pick = thompson_select(mu, C, root.fork(3 * iteration + 2).seed());
            x_next = lattice.row(pick).transpose();
        } else {
            auto base_score = [&](const Vec& x) {
                auto [mean, var] = surrogate->predict(hf, x);
                const double sd = std::sqrt(std::max(var, 0.0));
                return acq_spec.kind == AcquisitionKind::ExpectedImprovement
                           ? expected_improvement(mean, sd, best_hf)
                           : ucb_score(mean, sd, acq_spec.ucb_beta);
            };
            try {
                x_next = maximize_acquisition(base_score, objective.domain, 8,
                                              root.fork(3 * iteration).seed())
                             .x;
            } catch (const NumericalError&) {
                history.failed = true;
                break;
            }
        }

        Rng eps_rng = root.fork(3 * iteration + 7);
        x_next = epsilon_greedy_pick(x_next, objective.domain, policy.epsilon, eps_rng);

        // fidelity level
        int level = hf;
        if (!single && T > 1) {
            if (consecutive_lf >= policy.force_hf_after) {
                level = hf;
            } else {
                double best_gamma = -std::numeric_limits<double>::infinity();
                for (int t = 0; t < T; ++t) {
                    const double cost = objective.cost(t, x_next);
                    if (!(cost > 0.0)) continue;
                    double gamma = 0.0;
                    switch (policy.mode) {
                        case MfPolicyMode::TwoStage: {
                            const double corr =
                                t == hf ? 1.0 : surrogate->hf_correlation(t, x_next).value;
                            gamma = mf_score_cost(mf_score_correlation(1.0, corr), cost);
                            break;
                        }
                        case MfPolicyMode::JointCorrelation: {
                            const double corr =
                                t == hf ? 1.0 : surrogate->hf_correlation(t, x_next).value;
                            gamma = mf_score_correlation(1.0, corr);
                            break;
                        }
                        case MfPolicyMode::JointCost:
                            gamma = mf_score_cost(1.0, cost);
                            break;
                        case MfPolicyMode::SingleFidelity:
                            gamma = t == hf ? 1.0 : 0.0;
                            break;
                    }
                    if (gamma >= best_gamma) {  // ties resolve to the higher level
                        best_gamma = gamma;
                        level = t;
                    }
                }
            }
        }

        const double cost = objective.cost(level, x_next);
        if (cum_cost + cost > budget + 1e-12) break;

        try {
            evaluate_and_log(iteration, level, x_next);
        } catch (const NumericalError&) {
            history.failed = true;
            break;
        }
        consecutive_lf = level == hf ? 0 : consecutive_lf + 1;
    }
    return history;
}

/// Cost spent beyond the initial design when the incumbent first reaches the
/// target; the budget with a censoring flag when it never does.
struct CostToTarget {
    double cost = 0.0;
    bool censored = false;
};

inline CostToTarget cost_to_target(const CampaignHistory& history, double target,
                                   double budget) {
    for (const auto& record : history.records)
        if (record.best_hf <= target)
            return {std::max(0.0, record.cum_cost - history.initial_design_cost), false};
    return {budget, true};
}

struct ComparisonRow {
    std::uint64_t seed = 0;
    double sf_cost = 0.0;
    bool sf_censored = false;
    double mf_cost = 0.0;
    bool mf_censored = false;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    double target = 0.0;
    double sf_median = 0.0;
    double mf_median = 0.0;
};

struct ArmConfig {
    ModelSpec model;
    AcquisitionSpec acquisition;
    MfPolicySpec policy;
};

inline double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Paired single- vs multi-fidelity comparison: per seed, the HF-equivalent
/// cost to reach the target incumbent, plus medians over the seeds.
inline ComparisonTable compare_sf_mf(const Objective& objective, const ArmConfig& sf_arm,
                                     const ArmConfig& mf_arm, double target, double budget,
                                     const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw ArgumentError("compare_sf_mf: at least one seed required");
    ComparisonTable table;
    table.target = target;
    std::vector<double> sf_costs, mf_costs;
    for (std::uint64_t seed : seeds) {
        auto sf_history = run_campaign(objective, sf_arm.model, sf_arm.acquisition,
                                       sf_arm.policy, budget, seed);
        auto mf_history = run_campaign(objective, mf_arm.model, mf_arm.acquisition,
                                       mf_arm.policy, budget, seed);
        auto sf = cost_to_target(sf_history, target, budget);
        auto mf = cost_to_target(mf_history, target, budget);
        table.rows.push_back({seed, sf.cost, sf.censored, mf.cost, mf.censored});
        sf_costs.push_back(sf.cost);
        mf_costs.push_back(mf.cost);
    }
    table.sf_median = median_of(sf_costs);
    table.mf_median = median_of(mf_costs);
    return table;
}

}  // namespace mfbo
