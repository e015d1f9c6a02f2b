// SPDX-License-Identifier: Apache-2.0
#include "nbtoa/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nbtoa {

namespace {

void require_papr_input(const Correlation& corr, double peak)
{
    if (corr.window_len() < 2) throw DomainError("PAPR needs a window of at least 2 lags");
    if (!(peak > 0.0)) throw DomainError("PAPR of an all-zero correlation is undefined");
}

}  // namespace

std::size_t argmax_abs(std::span<const cplx> values)
{
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t d = 0; d < values.size(); ++d) {
        const double m = std::norm(values[d]);
        if (m > best_mag) {
            best_mag = m;
            best = d;
        }
    }
    return best;
}

Correlation cross_correlate(const SampleBuffer& y, const SampleBuffer& s, std::size_t window_len)
{
    if (window_len == 0) throw DomainError("cross_correlate: window must hold at least one lag");
    if (s.samples.empty()) throw DomainError("cross_correlate: empty reference");
    const std::size_t S = s.size();
    if (y.size() < window_len + S - 1) {
        throw DomainError("cross_correlate: received buffer has " + std::to_string(y.size()) + " samples, need " +
                          std::to_string(window_len + S - 1));
    }
    Correlation corr;
    corr.nprs_len = S;
    corr.values.resize(window_len);
    const cplx* ref = s.samples.data();
    for (std::size_t d = 0; d < window_len; ++d) {
        const cplx* rx = y.samples.data() + d;
        double re = 0.0;
        double im = 0.0;
        for (std::size_t m = 0; m < S; ++m) {
            // rx * conj(ref), spelled out to keep the inner loop free of complex-multiply NaN checks.
            const double ar = rx[m].real(), ai = rx[m].imag();
            const double br = ref[m].real(), bi = ref[m].imag();
            re += ar * br + ai * bi;
            im += ai * br - ar * bi;
        }
        corr.values[d] = {re, im};
    }
    return corr;
}

double papr_traditional(const Correlation& corr)
{
    double peak = 0.0;
    double sum = 0.0;
    for (const auto& r : corr.values) {
        const double a = std::abs(r);
        peak = std::max(peak, a);
        sum += a;
    }
    require_papr_input(corr, peak);
    return peak / (sum / static_cast<double>(corr.window_len()));
}

double papr_acf_removed(const Correlation& corr, const Acf& acf)
{
    const std::size_t p = argmax_abs(corr.values);
    const double peak = std::abs(corr.values[p]);
    require_papr_input(corr, peak);
    const cplx rp = corr.values[p];
    double sum = 0.0;
    for (std::size_t d = 0; d < corr.window_len(); ++d) {
        const auto lag = static_cast<std::ptrdiff_t>(d) - static_cast<std::ptrdiff_t>(p);
        sum += std::abs(corr.values[d] - rp * acf(lag));
    }
    const double mean = sum / static_cast<double>(corr.window_len());
    if (mean == 0.0) return std::numeric_limits<double>::infinity();
    return peak / mean;
}

int threshold_toa(const Correlation& corr, double eta2)
{
    if (!(eta2 > 0.0 && eta2 < 1.0)) throw DomainError("threshold_toa: eta2 must lie in (0, 1)");
    if (corr.values.empty()) throw DomainError("threshold_toa: empty correlation");
    double peak = 0.0;
    for (const auto& r : corr.values) peak = std::max(peak, std::abs(r));
    if (!(peak > 0.0)) throw DomainError("threshold_toa: all-zero correlation");
    for (std::size_t d = 0; d < corr.window_len(); ++d) {
        if (std::abs(corr.values[d]) / peak > eta2) return static_cast<int>(d);
    }
    return static_cast<int>(argmax_abs(corr.values));
}

DetectionResult detect(const Correlation& corr, const Acf& acf, double eta1, double eta2, PaprMethod method)
{
    DetectionResult r;
    r.papr = method == PaprMethod::Traditional ? papr_traditional(corr) : papr_acf_removed(corr, acf);
    r.detected = r.papr > eta1;
    if (r.detected) r.toa_estimate = threshold_toa(corr, eta2);
    return r;
}

}  // namespace nbtoa
