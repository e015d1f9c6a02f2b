// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nbtoa/common.hpp"
#include "nbtoa/correlator.hpp"
#include "nbtoa/nprs_signal.hpp"

namespace nbtoa {

/// Divisor used when averaging the ACF-weighted trace around a tap.
enum class CoeffDivisor {
    TwoE,        ///< 1/(2E), E = 0 mapped to 1 (default)
    TwoEPlusOne  ///< 1/(2E+1), the number of summed terms
};

enum class VisitOrder {
    StrongestFirst,  ///< taps visited by descending |h| at the start of the run
    Stored           ///< taps visited in their stored order
};

struct SageParams {
    int sweeps = 8;       ///< M
    int half_window = 4;  ///< E
    int initial_taps = 5; ///< L0
    CoeffDivisor divisor = CoeffDivisor::TwoE;
    VisitOrder visit_order = VisitOrder::StrongestFirst;

    void validate() const;
    friend bool operator==(const SageParams&, const SageParams&) = default;
};

/// Delays, trace-domain coefficients and the residual noise power of an L-tap fit.
struct TapEstimate {
    std::vector<int> delays;
    std::vector<cplx> coeffs;
    double noise_var = 0.0;

    std::size_t size() const { return delays.size(); }
    double total_power() const;
    friend bool operator==(const TapEstimate&, const TapEstimate&) = default;
};

struct TapUpdate {
    int delay = 0;
    cplx coeff{};
};

/// Per-run diagnostics. objective[0] is the fit residual after initialization,
/// objective[m] the residual after sweep m.
struct SageTrace {
    std::vector<double> objective;
};

/// Delays of the L largest |R[d]| (ties to the smaller lag), coefficients R at those lags.
TapEstimate initialize(const Correlation& corr, std::size_t L);

/// R[d] - sum_{i != exclude} h_i gamma(d - d_i); exclude = nullopt removes every tap.
Correlation residual_trace(const Correlation& corr, const Acf& acf, const TapEstimate& est, std::optional<std::size_t> exclude);

/// (1/D) sum_d |resid[d] - h gamma(d - delay)|^2.
double estimate_noise(const Correlation& resid, const Acf& acf, cplx h, int delay);

/// New delay at the residual's magnitude peak, coefficient from the windowed ACF match followed
/// by the shrinkage h / (1 + noise_var / |h|^2).
TapUpdate update_tap(const Correlation& resid, const Acf& acf, double noise_var, const SageParams& params);

/// (1/D) sum_d |R[d] - sum_i h_i gamma(d - d_i)|^2, the quantity the sweeps drive down.
double fit_objective(const Correlation& corr, const Acf& acf, const TapEstimate& est);

/// Successive cancellation over a fixed number of taps. When `init` is given its size is the tap
/// count and it seeds the sweeps; otherwise initialize(corr, L) does. With one tap the sweeps are
/// skipped and only the noise power is filled in.
TapEstimate run_sage(const Correlation& corr, const Acf& acf, std::size_t L, const SageParams& params,
                     const std::optional<TapEstimate>& init = std::nullopt, SageTrace* trace = nullptr);

}  // namespace nbtoa
