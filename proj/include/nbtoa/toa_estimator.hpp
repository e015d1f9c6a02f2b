// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nbtoa/common.hpp"
#include "nbtoa/correlator.hpp"
#include "nbtoa/nprs_signal.hpp"
#include "nbtoa/sage_core.hpp"

namespace nbtoa {

struct ToaParams {
    int max_peak_distance = 10;        ///< d_max
    double weak_tap_fraction = 0.1;    ///< eta3
    int max_outer_iterations = 10;
    SageParams sage;

    /// Defaults scaled to a sampling rate: d_max and E grow with rate / 1.92 MHz,
    /// L0 is 9 / 5 / 2 at 30.72 MHz / 1.92 MHz / 240 kHz.
    static ToaParams defaults_for_rate(double sampling_rate_hz);
    void validate() const;
    friend bool operator==(const ToaParams&, const ToaParams&) = default;
};

struct PeakEstimate {
    int delay = 0;
    cplx coeff{};
};

struct ToaResult {
    int toa = 0;
    TapEstimate taps;
    bool used_fallback = false;
    int outer_iterations = 0;
    bool hit_iteration_cap = false;
    PeakEstimate peak;
    double fit_noise = 0.0;   ///< residual power of the surviving multi-tap fit
    double peak_noise = 0.0;  ///< residual power of the single-tap peak fit
};

/// Single-path ML estimate: the magnitude peak of R and its value.
PeakEstimate ml_single_path(const Correlation& corr);

/// Drops taps with |d - d_peak| > d_max, keeping order. Never returns an empty estimate:
/// if every tap is too far, the one nearest d_peak is kept.
TapEstimate prune_far(const TapEstimate& est, int d_peak, int d_max);

/// Repeatedly drops the weakest tap while |h|^2 < eta3 * sum |h_i|^2; the last tap always stays.
TapEstimate prune_weak(const TapEstimate& est, double eta3);

/// Full estimator: SAGE with L0 taps, pruning, warm-started re-runs until the tap count stops
/// shrinking, then the single-path fallback when the multi-tap fit is no better than the peak fit.
ToaResult estimate_toa(const Correlation& corr, const Acf& acf, const ToaParams& params);

}  // namespace nbtoa
