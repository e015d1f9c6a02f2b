// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nbtoa/common.hpp"
#include "nbtoa/nprs_signal.hpp"

namespace nbtoa {

enum class ProfileName { Awgn, Epa, Eva, Etu, Custom };

std::string to_string(ProfileName name);
/// Case-insensitive; throws ConfigError for unknown names.
ProfileName parse_profile_name(std::string_view text);

/// Tapped delay line in integer samples at a given rate.
struct ChannelProfile {
    ProfileName name = ProfileName::Awgn;
    std::vector<int> tap_delays_samples;
    std::vector<double> tap_powers_db;
    /// CUSTOM only: when present, these gains are used verbatim instead of Rayleigh draws.
    std::optional<std::vector<cplx>> fixed_gains;

    /// Throws ConfigError unless delays start at 0, increase strictly and match the power list.
    void validate() const;
    friend bool operator==(const ChannelProfile&, const ChannelProfile&) = default;
};

/// Drawn tap gains h_i for one subframe.
struct ChannelRealization {
    std::vector<cplx> coefficients;
    std::vector<int> delays;
    bool normalized = false;

    std::size_t size() const { return coefficients.size(); }
    double total_power() const;
};

/// Built-in power-delay profiles, tabulated at 30.72 MHz, 1.92 MHz and 240 kHz.
/// The 30.72 MHz EPA row uses delays [0,1,2,3,6,13,16] (seven taps to match its seven powers).
ChannelProfile builtin_profile(ProfileName name, double sampling_rate_hz);

/// CUSTOM profile with random Rayleigh taps at the given relative powers.
ChannelProfile custom_profile(std::vector<int> delays, std::vector<double> powers_db);
/// CUSTOM profile with constant gains (no fading).
ChannelProfile custom_fixed_profile(std::vector<int> delays, std::vector<cplx> gains);

/// Block-fading draw: h_i ~ CN(0, p_i / sum p). Fixed-gain profiles pass through untouched.
ChannelRealization realize_channel(const ChannelProfile& profile, std::uint64_t seed);

/// d = floor(tau * rate) with tau in seconds.
int delay_in_samples(double tau_seconds, double sampling_rate_hz);

/// y[n] = sum_i h_i s[n - toa_offset - d_i], zero elsewhere, length total_len.
SampleBuffer apply_channel(const SampleBuffer& s, const ChannelRealization& chan, int toa_offset, std::size_t total_len);

/// Adds CN(0, sigma_s_sq / 10^(snr_db/10)) noise to every sample.
SampleBuffer add_awgn(const SampleBuffer& y, double snr_db, double sigma_s_sq, std::uint64_t seed);

/// Noise variance per complex sample implied by an SNR in dB.
double noise_variance(double snr_db, double sigma_s_sq);

}  // namespace nbtoa
