// SPDX-License-Identifier: Apache-2.0
#include "nbtoa/nprs_signal.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace nbtoa {

// ---------------------------------------------------------------------------
// Numerology

Numerology Numerology::for_fft_size(std::size_t fft_size)
{
    if (fft_size < 16 || !std::has_single_bit(fft_size)) {
        throw ConfigError("fft_size must be a power of two >= 16, got " + std::to_string(fft_size));
    }
    Numerology num;
    num.fft_size = fft_size;
    num.sampling_rate_hz = kSubcarrierSpacingHz * static_cast<double>(fft_size);
    // Per slot the CPs add up to fft_size/2 samples (7.5 symbol durations per 0.5 ms slot).
    const std::size_t cp_short = 9 * fft_size / 128;
    const std::size_t cp_long = fft_size / 2 - 6 * cp_short;
    num.cp_lengths.reserve(kSymbolsPerSubframe);
    for (std::size_t l = 0; l < kSymbolsPerSubframe; ++l) {
        num.cp_lengths.push_back(l % kSymbolsPerSlot == 0 ? cp_long : cp_short);
    }
    return num;
}

Numerology Numerology::for_rate(double sampling_rate_hz)
{
    const double bins = sampling_rate_hz / kSubcarrierSpacingHz;
    const double rounded = std::round(bins);
    if (!(sampling_rate_hz > 0.0) || std::abs(bins - rounded) > 1e-9) {
        throw ConfigError("sampling rate " + std::to_string(sampling_rate_hz) + " Hz is not a multiple of 15 kHz");
    }
    return for_fft_size(static_cast<std::size_t>(rounded));
}

std::size_t Numerology::subframe_length() const
{
    std::size_t total = 0;
    for (auto cp : cp_lengths) total += cp + fft_size;
    return total;
}

std::size_t Numerology::symbol_start(std::size_t l) const
{
    std::size_t start = 0;
    for (std::size_t i = 0; i < l; ++i) start += cp_lengths[i] + fft_size;
    return start;
}

void Numerology::validate() const
{
    if (fft_size == 0 || !(subcarrier_spacing_hz > 0.0)) throw ConfigError("numerology: empty FFT or spacing");
    if (std::abs(static_cast<double>(fft_size) * subcarrier_spacing_hz - sampling_rate_hz) > 1e-6 * sampling_rate_hz) {
        throw ConfigError("numerology: fft_size * subcarrier spacing != sampling rate");
    }
    if (symbols_per_subframe != kSymbolsPerSubframe || cp_lengths.size() != symbols_per_subframe) {
        throw ConfigError("numerology: expected 14 symbols with one CP length each");
    }
    const double expected = sampling_rate_hz * 1e-3;
    if (std::abs(static_cast<double>(subframe_length()) - expected) > 0.5) {
        throw ConfigError("numerology: CP and symbol lengths do not fill a 1 ms subframe");
    }
    if (fft_size < kSubcarriersPerPrb) throw ConfigError("numerology: FFT smaller than one PRB");
}

// ---------------------------------------------------------------------------
// ResourceGrid

ResourceGrid::ResourceGrid(int cell_id_shift) : cell_id_shift_(cell_id_shift) {}

std::size_t ResourceGrid::index(std::size_t subcarrier, std::size_t symbol)
{
    if (subcarrier >= kSubcarriersPerPrb || symbol >= kSymbolsPerSubframe) {
        throw DomainError("resource element (" + std::to_string(subcarrier) + ", " + std::to_string(symbol) +
                          ") outside one PRB subframe");
    }
    return symbol * kSubcarriersPerPrb + subcarrier;
}

void ResourceGrid::set_nprs(std::size_t subcarrier, std::size_t symbol, cplx value)
{
    const auto i = index(subcarrier, symbol);
    cells_[i] = value;
    mask_[i] = true;
}

double ResourceGrid::energy() const
{
    double e = 0.0;
    for (const auto& c : cells_) e += std::norm(c);
    return e;
}

std::size_t ResourceGrid::nprs_count() const
{
    std::size_t n = 0;
    for (bool m : mask_) n += m ? 1 : 0;
    return n;
}

ResourceGrid generate_nprs_grid(int cell_id_shift, std::uint64_t seed)
{
    if (cell_id_shift < 0 || cell_id_shift > 5) {
        throw DomainError("cell_id_shift must be in 0..5, got " + std::to_string(cell_id_shift));
    }
    ResourceGrid grid(cell_id_shift);
    std::mt19937_64 rng(seed);
    constexpr double a = std::numbers::sqrt2 / 2.0;
    for (auto symbol : kNprsSymbols) {
        const auto l = static_cast<int>(symbol % kSymbolsPerSlot);
        const auto k0 = static_cast<std::size_t>((6 - l + cell_id_shift) % 6);
        for (std::size_t half = 0; half < 2; ++half) {
            const auto bits = rng() >> 62;
            const cplx qpsk((bits & 1U) ? -a : a, (bits & 2U) ? -a : a);
            grid.set_nprs(6 * half + k0, symbol, qpsk);
        }
    }
    return grid;
}

// ---------------------------------------------------------------------------
// OFDM synthesis

SampleBuffer ofdm_modulate(const ResourceGrid& grid, const Numerology& num)
{
    num.validate();
    const std::size_t n_fft = num.fft_size;
    std::vector<cplx> twiddle(n_fft);
    for (std::size_t m = 0; m < n_fft; ++m) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n_fft);
        twiddle[m] = {std::cos(phase), std::sin(phase)};
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_fft));
    const auto half = static_cast<std::ptrdiff_t>(kSubcarriersPerPrb / 2) - 1;

    SampleBuffer out;
    out.sampling_rate_hz = num.sampling_rate_hz;
    out.samples.reserve(num.subframe_length());
    std::vector<cplx> body(n_fft);
    for (std::size_t l = 0; l < num.symbols_per_subframe; ++l) {
        std::fill(body.begin(), body.end(), cplx{});
        for (std::size_t k = 0; k < kSubcarriersPerPrb; ++k) {
            const cplx value = grid.cell(k, l);
            if (value == cplx{}) continue;
            const auto freq = static_cast<std::ptrdiff_t>(k) - half;
            const auto bin = static_cast<std::size_t>((freq + static_cast<std::ptrdiff_t>(n_fft)) % static_cast<std::ptrdiff_t>(n_fft));
            for (std::size_t n = 0; n < n_fft; ++n) body[n] += value * twiddle[(bin * n) % n_fft];
        }
        for (auto& v : body) v *= scale;
        const std::size_t cp = num.cp_lengths[l];
        out.samples.insert(out.samples.end(), body.end() - static_cast<std::ptrdiff_t>(cp), body.end());
        out.samples.insert(out.samples.end(), body.begin(), body.end());
    }
    return out;
}

SampleBuffer generate_nprs_subframe(double sampling_rate_hz, int cell_id_shift, std::uint64_t seed)
{
    return ofdm_modulate(generate_nprs_grid(cell_id_shift, seed), Numerology::for_rate(sampling_rate_hz));
}

// ---------------------------------------------------------------------------
// SampleBuffer / ACF

double SampleBuffer::energy() const
{
    double e = 0.0;
    for (const auto& v : samples) e += std::norm(v);
    return e;
}

double SampleBuffer::mean_power() const
{
    return samples.empty() ? 0.0 : energy() / static_cast<double>(samples.size());
}

void SampleBuffer::validate() const
{
    if (samples.empty()) throw DomainError("sample buffer is empty");
    if (!(sampling_rate_hz > 0.0)) throw DomainError("sample buffer has non-positive sampling rate");
    for (const auto& v : samples) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DomainError("sample buffer holds non-finite values");
    }
}

Acf::Acf(std::vector<cplx> values, std::size_t max_lag, double normalization)
    : values_(std::move(values)), max_lag_(max_lag), normalization_(normalization)
{
    if (values_.size() != 2 * max_lag_ + 1) throw DomainError("ACF storage does not match its lag range");
}

std::size_t Acf::half_power_width() const
{
    auto ml = static_cast<std::ptrdiff_t>(max_lag_);
    std::ptrdiff_t right = 0;
    while (right + 1 <= ml && std::norm((*this)(right + 1)) >= 0.5) ++right;
    std::ptrdiff_t left = 0;
    while (left - 1 >= -ml && std::norm((*this)(left - 1)) >= 0.5) --left;
    return static_cast<std::size_t>(right - left + 1);
}

Acf compute_acf(const SampleBuffer& s, std::size_t max_lag)
{
    if (s.samples.empty()) throw DomainError("compute_acf: empty buffer");
    if (max_lag >= s.size()) throw DomainError("compute_acf: max_lag must be shorter than the signal");
    const double energy = s.energy();
    if (!(energy > 0.0)) throw DomainError("compute_acf: signal has zero energy");

    const auto& x = s.samples;
    std::vector<cplx> values(2 * max_lag + 1);
    values[max_lag] = 1.0;
    for (std::size_t d = 1; d <= max_lag; ++d) {
        cplx acc{};
        for (std::size_t k = d; k < x.size(); ++k) acc += x[k] * std::conj(x[k - d]);
        acc /= energy;
        values[max_lag + d] = acc;
        values[max_lag - d] = std::conj(acc);
    }
    return Acf(std::move(values), max_lag, energy);
}

}  // namespace nbtoa
