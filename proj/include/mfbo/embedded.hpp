#pragma once

#include <mfbo/common.hpp>
#include <mfbo/gp.hpp>

#include <functional>
#include <utility>

namespace mfbo {

/// Hybrid adjustment prior f_H = rho(x) f_L(x) + delta(x) with independent GP
/// priors on rho and delta and a fast deterministic LFM f_L. The result is a
/// GP with
///   mean m_rho(x) f_L(x) + m_delta(x)
///   cov  k_rho(x,x') f_L(x) f_L(x') + k_delta(x,x'),
/// i.e. the low-fidelity model sits directly inside the prior. Conditioning on
/// high-fidelity data is plain GP conditioning; the observation noise is taken
/// from the delta GP.
inline Gp build_embedded_lfm_prior(std::function<double(const Vec&)> lfm, const Gp& rho_gp,
                                   const Gp& delta_gp) {
    if (!lfm) throw ArgumentError("embedded lfm prior: low-fidelity model required");

    auto mean = [lfm, rho_gp, delta_gp](const Vec& x) {
        return rho_gp.mean(x) * lfm(x) + delta_gp.mean(x);
    };
    auto cov = [lfm, rho_gp, delta_gp](const Vec& x, const Vec& y) {
        return rho_gp.covariance(x, y) * lfm(x) * lfm(y) + delta_gp.covariance(x, y);
    };
    return Gp(std::move(mean), std::move(cov), delta_gp.noise_variance());
}

}  // namespace mfbo
