// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nbtoa/common.hpp"

namespace nbtoa {

inline constexpr std::size_t kSubcarriersPerPrb = 12;
inline constexpr std::size_t kSymbolsPerSubframe = 14;
inline constexpr std::size_t kSymbolsPerSlot = 7;
inline constexpr double kSubcarrierSpacingHz = 15e3;

/// OFDM symbols (subframe index) that carry positioning pilots. Symbols 0-2 hold control.
inline constexpr std::array<std::size_t, 9> kNprsSymbols = {3, 5, 6, 8, 9, 10, 11, 12, 13};

/// LTE-style numerology with normal cyclic prefix.
///
/// The cyclic prefix of the first symbol in each slot is longer; at 1.92 MHz this gives
/// {10, 9, 9, 9, 9, 9, 9} per slot and exactly 1920 samples per 1 ms subframe.
struct Numerology {
    double sampling_rate_hz = 0.0;
    std::size_t fft_size = 0;
    double subcarrier_spacing_hz = kSubcarrierSpacingHz;
    std::size_t symbols_per_subframe = kSymbolsPerSubframe;
    std::vector<std::size_t> cp_lengths;

    /// Normal-CP numerology for a power-of-two FFT size >= 16 (16 -> 240 kHz, 128 -> 1.92 MHz,
    /// 2048 -> 30.72 MHz).
    static Numerology for_fft_size(std::size_t fft_size);
    static Numerology for_rate(double sampling_rate_hz);

    std::size_t subframe_length() const;
    /// Sample index where symbol `l` (cyclic prefix included) begins.
    std::size_t symbol_start(std::size_t l) const;
    /// Throws ConfigError if the rate/FFT/CP relations do not hold.
    void validate() const;
};

/// One PRB by one subframe of resource elements, indexed (subcarrier, symbol).
class ResourceGrid {
public:
    explicit ResourceGrid(int cell_id_shift = 0);

    cplx cell(std::size_t subcarrier, std::size_t symbol) const { return cells_[index(subcarrier, symbol)]; }
    bool is_nprs(std::size_t subcarrier, std::size_t symbol) const { return mask_[index(subcarrier, symbol)]; }
    int cell_id_shift() const { return cell_id_shift_; }

    void set_cell(std::size_t subcarrier, std::size_t symbol, cplx value) { cells_[index(subcarrier, symbol)] = value; }
    void set_nprs(std::size_t subcarrier, std::size_t symbol, cplx value);

    /// Sum of |cell|^2 over the grid.
    double energy() const;
    std::size_t nprs_count() const;

    friend bool operator==(const ResourceGrid&, const ResourceGrid&) = default;

private:
    static std::size_t index(std::size_t subcarrier, std::size_t symbol);

    std::array<cplx, kSubcarriersPerPrb * kSymbolsPerSubframe> cells_{};
    std::array<bool, kSubcarriersPerPrb * kSymbolsPerSubframe> mask_{};
    int cell_id_shift_ = 0;
};

/// Complex baseband samples at a known rate.
struct SampleBuffer {
    std::vector<cplx> samples;
    double sampling_rate_hz = 0.0;

    std::size_t size() const { return samples.size(); }
    double energy() const;
    /// Average power per sample over the whole buffer (sigma_s^2 for a transmitted subframe).
    double mean_power() const;
    /// Throws DomainError on empty buffers, non-positive rates or non-finite samples.
    void validate() const;
};

/// Normalized autocorrelation gamma(d) for lags in [-max_lag, max_lag]; zero outside.
class Acf {
public:
    Acf(std::vector<cplx> values, std::size_t max_lag, double normalization);

    cplx operator()(std::ptrdiff_t lag) const
    {
        const auto ml = static_cast<std::ptrdiff_t>(max_lag_);
        if (lag < -ml || lag > ml) return {};
        return values_[static_cast<std::size_t>(lag + ml)];
    }

    std::size_t max_lag() const { return max_lag_; }
    /// Energy divisor sum |s[k]|^2 applied during normalization.
    double normalization() const { return normalization_; }
    std::span<const cplx> values() const { return values_; }

    /// Width (in samples) of the contiguous region around lag 0 where |gamma|^2 >= 1/2.
    std::size_t half_power_width() const;

private:
    std::vector<cplx> values_;
    std::size_t max_lag_ = 0;
    double normalization_ = 1.0;
};

/// Pilot mask plus seeded QPSK values. Within each half-PRB the pilot sits on subcarrier
/// (6 - l + shift) mod 6, l being the symbol index inside its slot. Throws DomainError for a
/// shift outside 0..5.
ResourceGrid generate_nprs_grid(int cell_id_shift, std::uint64_t seed);

/// OFDM synthesis with the inverse DFT scaled by 1/sqrt(fft_size).
///
/// Subcarrier k of the PRB is placed on frequency bin (k - 5) mod fft_size. With this scaling the
/// energy of each symbol body equals the energy of its grid column; the cyclic prefix adds
/// cp_len/fft_size on top for constant-envelope bodies.
SampleBuffer ofdm_modulate(const ResourceGrid& grid, const Numerology& num);

/// gamma(d) = sum_k s[k] s*[k-d] / sum_k |s[k]|^2 with zero padding outside the buffer.
Acf compute_acf(const SampleBuffer& s, std::size_t max_lag);

/// Convenience: generate the grid and modulate it at the requested rate.
SampleBuffer generate_nprs_subframe(double sampling_rate_hz, int cell_id_shift, std::uint64_t seed);

}  // namespace nbtoa
