// SPDX-License-Identifier: Apache-2.0
#include "nbtoa/toa_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace nbtoa {

ToaParams ToaParams::defaults_for_rate(double sampling_rate_hz)
{
    if (!(sampling_rate_hz > 0.0)) throw ConfigError("ToA defaults need a positive sampling rate");
    const double factor = sampling_rate_hz / kReferenceRateHz;
    ToaParams p;
    p.max_peak_distance = static_cast<int>(std::lround(10.0 * factor));
    p.sage.half_window = std::max(1, static_cast<int>(std::lround(4.0 * factor)));
    if (factor >= 4.0) {
        p.sage.initial_taps = 9;
    } else if (factor >= 0.5) {
        p.sage.initial_taps = 5;
    } else {
        p.sage.initial_taps = 2;
    }
    return p;
}

void ToaParams::validate() const
{
    if (max_peak_distance < 0) throw ConfigError("d_max must be >= 0");
    if (!(weak_tap_fraction > 0.0 && weak_tap_fraction < 1.0)) throw ConfigError("eta3 must lie in (0, 1)");
    if (max_outer_iterations < 0) throw ConfigError("outer iteration cap must be >= 0");
    sage.validate();
}

PeakEstimate ml_single_path(const Correlation& corr)
{
    if (corr.values.empty()) throw DomainError("ml_single_path: empty correlation");
    const std::size_t d = argmax_abs(corr.values);
    return {static_cast<int>(d), corr.values[d]};
}

TapEstimate prune_far(const TapEstimate& est, int d_peak, int d_max)
{
    if (est.size() == 0) throw DomainError("prune_far: empty estimate");
    TapEstimate out;
    out.noise_var = est.noise_var;
    for (std::size_t i = 0; i < est.size(); ++i) {
        if (std::abs(est.delays[i] - d_peak) <= d_max) {
            out.delays.push_back(est.delays[i]);
            out.coeffs.push_back(est.coeffs[i]);
        }
    }
    if (out.size() == 0) {
        std::size_t nearest = 0;
        for (std::size_t i = 1; i < est.size(); ++i) {
            if (std::abs(est.delays[i] - d_peak) < std::abs(est.delays[nearest] - d_peak)) nearest = i;
        }
        out.delays.push_back(est.delays[nearest]);
        out.coeffs.push_back(est.coeffs[nearest]);
    }
    return out;
}

TapEstimate prune_weak(const TapEstimate& est, double eta3)
{
    if (est.size() == 0) throw DomainError("prune_weak: empty estimate");
    TapEstimate out = est;
    while (out.size() > 1) {
        const double total = out.total_power();
        std::size_t weakest = 0;
        for (std::size_t i = 1; i < out.size(); ++i) {
            if (std::norm(out.coeffs[i]) < std::norm(out.coeffs[weakest])) weakest = i;
        }
        if (!(std::norm(out.coeffs[weakest]) < eta3 * total)) break;
        out.delays.erase(out.delays.begin() + static_cast<std::ptrdiff_t>(weakest));
        out.coeffs.erase(out.coeffs.begin() + static_cast<std::ptrdiff_t>(weakest));
    }
    return out;
}

ToaResult estimate_toa(const Correlation& corr, const Acf& acf, const ToaParams& params)
{
    params.validate();
    if (corr.values.empty()) throw DomainError("estimate_toa: empty correlation");

    ToaResult result;
    result.peak = ml_single_path(corr);

    const auto refine = [&](const TapEstimate& est) {
        return prune_weak(prune_far(est, result.peak.delay, params.max_peak_distance), params.weak_tap_fraction);
    };

    auto L0 = std::min<std::size_t>(static_cast<std::size_t>(params.sage.initial_taps), corr.window_len());
    TapEstimate est = refine(run_sage(corr, acf, L0, params.sage));
    while (est.size() < L0) {
        if (result.outer_iterations >= params.max_outer_iterations) {
            result.hit_iteration_cap = true;
            break;
        }
        L0 = est.size();
        est = refine(run_sage(corr, acf, L0, params.sage, est));
        ++result.outer_iterations;
    }

    TapEstimate peak_fit;
    peak_fit.delays = {result.peak.delay};
    peak_fit.coeffs = {result.peak.coeff};
    result.fit_noise = fit_objective(corr, acf, est);
    result.peak_noise = fit_objective(corr, acf, peak_fit);
    est.noise_var = result.fit_noise;

    if (result.fit_noise >= result.peak_noise) {
        result.used_fallback = true;
        peak_fit.noise_var = result.peak_noise;
        est = peak_fit;
    }
    result.toa = *std::min_element(est.delays.begin(), est.delays.end());
    result.taps = std::move(est);
    return result;
}

}  // namespace nbtoa
