// SPDX-License-Identifier: Apache-2.0
#include "nbtoa/sage_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace nbtoa {

namespace {

// resid[d] += scale * h * gamma(d - delay) over the window.
void add_tap(std::vector<cplx>& resid, const Acf& acf, cplx h, int delay, double scale)
{
    const cplx a = scale * h;
    const auto D = static_cast<std::ptrdiff_t>(resid.size());
    const auto ml = static_cast<std::ptrdiff_t>(acf.max_lag());
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, delay - ml);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(D - 1, delay + ml);
    for (std::ptrdiff_t d = lo; d <= hi; ++d) resid[static_cast<std::size_t>(d)] += a * acf(d - delay);
}

double mean_norm(const std::vector<cplx>& v)
{
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return s / static_cast<double>(v.size());
}

void check_estimate(const TapEstimate& est, std::size_t window)
{
    if (est.delays.size() != est.coeffs.size()) throw DomainError("tap estimate: delay/coefficient count mismatch");
    for (int d : est.delays) {
        if (d < 0 || static_cast<std::size_t>(d) >= window) {
            throw DomainError("tap estimate: delay " + std::to_string(d) + " outside the correlation window");
        }
    }
}

}  // namespace

void SageParams::validate() const
{
    if (sweeps < 1) throw ConfigError("SAGE: sweeps (M) must be >= 1");
    if (half_window < 0) throw ConfigError("SAGE: half window (E) must be >= 0");
    if (initial_taps < 1) throw ConfigError("SAGE: initial tap count (L0) must be >= 1");
}

double TapEstimate::total_power() const
{
    double p = 0.0;
    for (const auto& h : coeffs) p += std::norm(h);
    return p;
}

TapEstimate initialize(const Correlation& corr, std::size_t L)
{
    const std::size_t D = corr.window_len();
    if (L == 0) throw DomainError("initialize: L must be >= 1");
    if (L > D) throw DomainError("initialize: L = " + std::to_string(L) + " exceeds window " + std::to_string(D));
    std::vector<std::size_t> order(D);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::norm(corr.values[a]) > std::norm(corr.values[b]); });
    TapEstimate est;
    for (std::size_t i = 0; i < L; ++i) {
        est.delays.push_back(static_cast<int>(order[i]));
        est.coeffs.push_back(corr.values[order[i]]);
    }
    return est;
}

Correlation residual_trace(const Correlation& corr, const Acf& acf, const TapEstimate& est, std::optional<std::size_t> exclude)
{
    check_estimate(est, corr.window_len());
    if (exclude && *exclude >= est.size()) throw DomainError("residual_trace: excluded tap index out of range");
    Correlation out = corr;
    for (std::size_t i = 0; i < est.size(); ++i) {
        if (exclude && *exclude == i) continue;
        add_tap(out.values, acf, est.coeffs[i], est.delays[i], -1.0);
    }
    return out;
}

double estimate_noise(const Correlation& resid, const Acf& acf, cplx h, int delay)
{
    if (delay < 0 || static_cast<std::size_t>(delay) >= resid.window_len()) throw DomainError("estimate_noise: delay outside window");
    std::vector<cplx> r = resid.values;
    add_tap(r, acf, h, delay, -1.0);
    return mean_norm(r);
}

TapUpdate update_tap(const Correlation& resid, const Acf& acf, double noise_var, const SageParams& params)
{
    if (params.half_window < 0) throw DomainError("update_tap: E must be >= 0");
    if (resid.values.empty()) throw DomainError("update_tap: empty residual");
    const auto D = static_cast<std::ptrdiff_t>(resid.window_len());
    const auto delay = static_cast<std::ptrdiff_t>(argmax_abs(resid.values));

    const int E = params.half_window;
    cplx acc{};
    for (int k = -E; k <= E; ++k) {
        const std::ptrdiff_t d = delay + k;
        if (d < 0 || d >= D) continue;
        acc += std::conj(acf(k)) * resid.values[static_cast<std::size_t>(d)];
    }
    const double divisor = params.divisor == CoeffDivisor::TwoE ? std::max(2.0 * E, 1.0) : 2.0 * E + 1.0;
    cplx h = acc / divisor;

    const double power = std::norm(h);
    if (power > 0.0) h /= (1.0 + noise_var / power);
    return {static_cast<int>(delay), h};
}

double fit_objective(const Correlation& corr, const Acf& acf, const TapEstimate& est)
{
    return mean_norm(residual_trace(corr, acf, est, std::nullopt).values);
}

TapEstimate run_sage(const Correlation& corr, const Acf& acf, std::size_t L, const SageParams& params,
                     const std::optional<TapEstimate>& init, SageTrace* trace)
{
    params.validate();
    if (corr.values.empty()) throw DomainError("run_sage: empty correlation");
    TapEstimate est;
    if (init) {
        check_estimate(*init, corr.window_len());
        if (init->size() == 0) throw DomainError("run_sage: empty initial estimate");
        if (init->size() != L) throw DomainError("run_sage: initial estimate has " + std::to_string(init->size()) + " taps, expected " + std::to_string(L));
        est = *init;
    } else {
        est = initialize(corr, L);
    }

    std::vector<cplx> resid = residual_trace(corr, acf, est, std::nullopt).values;
    if (trace) {
        trace->objective.clear();
        trace->objective.push_back(mean_norm(resid));
    }
    if (est.size() == 1) {
        est.noise_var = mean_norm(resid);
        return est;
    }

    std::vector<std::size_t> order(est.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (params.visit_order == VisitOrder::StrongestFirst) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return std::norm(est.coeffs[a]) > std::norm(est.coeffs[b]); });
    }

    Correlation work;
    work.nprs_len = corr.nprs_len;
    for (int m = 0; m < params.sweeps; ++m) {
        for (std::size_t l : order) {
            add_tap(resid, acf, est.coeffs[l], est.delays[l], 1.0);
            work.values = resid;
            est.noise_var = estimate_noise(work, acf, est.coeffs[l], est.delays[l]);
            const TapUpdate upd = update_tap(work, acf, est.noise_var, params);
            est.delays[l] = upd.delay;
            est.coeffs[l] = upd.coeff;
            add_tap(resid, acf, upd.coeff, upd.delay, -1.0);
        }
        if (trace) trace->objective.push_back(mean_norm(resid));
    }
    return est;
}

}  // namespace nbtoa
