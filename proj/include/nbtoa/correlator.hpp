// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nbtoa/common.hpp"
#include "nbtoa/nprs_signal.hpp"

namespace nbtoa {

/// Sliding correlation trace R[d], d in [0, D-1], against an S-sample reference.
struct Correlation {
    std::vector<cplx> values;
    std::size_t nprs_len = 0;

    std::size_t window_len() const { return values.size(); }
    cplx operator[](std::size_t d) const { return values[d]; }
};

struct DetectionResult {
    double papr = 0.0;
    bool detected = false;
    std::optional<int> toa_estimate;
};

enum class PaprMethod { Traditional, AcfRemoved };

/// R[d] = sum_{k=d}^{d+S-1} y[k] s*[k-d]. Requires length(y) >= D + S - 1.
Correlation cross_correlate(const SampleBuffer& y, const SampleBuffer& s, std::size_t window_len);

/// max|R| / mean|R|.
double papr_traditional(const Correlation& corr);

/// Same numerator; the denominator averages |R[d] - R[p] gamma(d - p)| with p the peak lag.
double papr_acf_removed(const Correlation& corr, const Acf& acf);

/// First d with |R[d]| / max|R| > eta2.
int threshold_toa(const Correlation& corr, double eta2);

/// Presence test PAPR > eta1 followed, when present, by the threshold ToA.
DetectionResult detect(const Correlation& corr, const Acf& acf, double eta1, double eta2, PaprMethod method);

/// Index of the largest |R[d]|, ties resolved to the smaller index.
std::size_t argmax_abs(std::span<const cplx> values);

}  // namespace nbtoa
