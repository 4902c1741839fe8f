#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace mfbo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid arguments: dimension mismatches, out-of-range values, unsupported orders.
class ArgumentError : public Error {
public:
    explicit ArgumentError(const std::string& what) : Error(what) {}
};

/// Invalid run configuration (bad keys, missing seed, unresolvable names).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Numerical breakdown: singular systems after jitter escalation, non-finite values.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(what) {}
};

/// Axis-aligned bounded search domain.
struct Domain {
    Vec lower;
    Vec upper;

    Domain() = default;
    Domain(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size())
            throw ArgumentError("domain bounds have mismatched dimensions");
        for (Eigen::Index i = 0; i < lower.size(); ++i) {
            if (!(lower[i] < upper[i]))
                throw ArgumentError("domain lower bound must be strictly below upper bound");
            if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
                throw ArgumentError("domain bounds must be finite");
        }
    }

    static Domain unit_cube(int dim) {
        return Domain(Vec::Zero(dim), Vec::Ones(dim));
    }

    int dim() const { return static_cast<int>(lower.size()); }

    bool contains(const Vec& x, double tol = 0.0) const {
        if (x.size() != lower.size()) return false;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
        return true;
    }

    Vec clamp(Vec x) const {
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x[i] = std::min(std::max(x[i], lower[i]), upper[i]);
        return x;
    }
};

/// Correlation value paired with a degeneracy flag; degenerate (zero-variance)
/// cases report 0 instead of NaN so fidelity policies stay total.
struct Correlation {
    double value = 0.0;
    bool degenerate = false;
};

}  // namespace mfbo
