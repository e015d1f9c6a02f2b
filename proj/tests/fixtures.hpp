// SPDX-License-Identifier: Apache-2.0
// Shared reference signals for the unit tests, built once per process.
#pragma once

#include "nbtoa/nprs_signal.hpp"

namespace fixture {

inline const nbtoa::SampleBuffer& reference_192()
{
    static const auto s = nbtoa::generate_nprs_subframe(1.92e6, 0, 1);
    return s;
}

inline const nbtoa::Acf& acf_192()
{
    static const auto g = nbtoa::compute_acf(reference_192(), 120);
    return g;
}

inline double energy_192() { return reference_192().energy(); }

}  // namespace fixture
