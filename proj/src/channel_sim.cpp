// SPDX-License-Identifier: Apache-2.0
#include "nbtoa/channel_sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

namespace nbtoa {

namespace {

bool same_rate(double a, double b) { return std::abs(a - b) <= 1e-6 * b; }

struct TableRow {
    ProfileName name;
    double rate_hz;
    std::vector<int> delays;
    std::vector<double> powers_db;
};

const std::vector<TableRow>& profile_table()
{
    static const std::vector<TableRow> table = {
        // 30.72 MHz
        {ProfileName::Epa, 30.72e6, {0, 1, 2, 3, 6, 13, 16}, {0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8}},
        {ProfileName::Eva, 30.72e6, {0, 1, 5, 10, 11, 22, 33, 53, 77}, {0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9}},
        {ProfileName::Etu, 30.72e6, {0, 2, 4, 6, 7, 15, 49, 71, 154}, {-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0}},
        // 1.92 MHz
        {ProfileName::Epa, 1.92e6, {0, 1}, {0.0, -25.7}},
        {ProfileName::Eva, 1.92e6, {0, 1, 2, 3, 5}, {0.0, -2.3, -10.9, -15.9, -20.8}},
        {ProfileName::Etu, 1.92e6, {0, 1, 3, 4, 10}, {0.0, -6.4, -9.4, -11.4, -13.4}},
        // 240 kHz
        {ProfileName::Epa, 240e3, {0}, {0.0}},
        {ProfileName::Eva, 240e3, {0, 1}, {0.0, -23.1}},
        {ProfileName::Etu, 240e3, {0, 1}, {0.0, -14.9}},
    };
    return table;
}

}  // namespace

std::string to_string(ProfileName name)
{
    switch (name) {
    case ProfileName::Awgn: return "AWGN";
    case ProfileName::Epa: return "EPA";
    case ProfileName::Eva: return "EVA";
    case ProfileName::Etu: return "ETU";
    case ProfileName::Custom: return "CUSTOM";
    }
    return "?";
}

ProfileName parse_profile_name(std::string_view text)
{
    std::string upper(text);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    for (auto name : {ProfileName::Awgn, ProfileName::Epa, ProfileName::Eva, ProfileName::Etu, ProfileName::Custom}) {
        if (upper == to_string(name)) return name;
    }
    throw ConfigError("unknown channel profile '" + std::string(text) + "'");
}

void ChannelProfile::validate() const
{
    if (tap_delays_samples.empty()) throw ConfigError("channel profile has no taps");
    if (tap_delays_samples.size() != tap_powers_db.size()) throw ConfigError("channel profile: delay and power lists differ in length");
    if (tap_delays_samples.front() != 0) throw ConfigError("channel profile: first delay must be 0");
    for (std::size_t i = 1; i < tap_delays_samples.size(); ++i) {
        if (tap_delays_samples[i] <= tap_delays_samples[i - 1]) throw ConfigError("channel profile: delays must increase strictly");
    }
    for (double p : tap_powers_db) {
        if (!std::isfinite(p)) throw ConfigError("channel profile: non-finite tap power");
    }
    if (fixed_gains && fixed_gains->size() != tap_delays_samples.size()) {
        throw ConfigError("channel profile: fixed gains do not match the tap count");
    }
    if (fixed_gains && name != ProfileName::Custom) throw ConfigError("channel profile: fixed gains require a CUSTOM profile");
}

double ChannelRealization::total_power() const
{
    double p = 0.0;
    for (const auto& h : coefficients) p += std::norm(h);
    return p;
}

ChannelProfile builtin_profile(ProfileName name, double sampling_rate_hz)
{
    const bool known_rate = same_rate(sampling_rate_hz, 30.72e6) || same_rate(sampling_rate_hz, 1.92e6) || same_rate(sampling_rate_hz, 240e3);
    if (!known_rate) throw ConfigError("no tabulated profiles at " + std::to_string(sampling_rate_hz) + " Hz");
    if (name == ProfileName::Awgn) return ChannelProfile{ProfileName::Awgn, {0}, {0.0}, std::nullopt};
    for (const auto& row : profile_table()) {
        if (row.name == name && same_rate(row.rate_hz, sampling_rate_hz)) {
            return ChannelProfile{row.name, row.delays, row.powers_db, std::nullopt};
        }
    }
    throw ConfigError("profile " + to_string(name) + " is not a built-in table row");
}

ChannelProfile custom_profile(std::vector<int> delays, std::vector<double> powers_db)
{
    ChannelProfile p{ProfileName::Custom, std::move(delays), std::move(powers_db), std::nullopt};
    p.validate();
    return p;
}

ChannelProfile custom_fixed_profile(std::vector<int> delays, std::vector<cplx> gains)
{
    ChannelProfile p;
    p.name = ProfileName::Custom;
    p.tap_delays_samples = std::move(delays);
    for (const auto& g : gains) p.tap_powers_db.push_back(10.0 * std::log10(std::max(std::norm(g), 1e-300)));
    p.fixed_gains = std::move(gains);
    p.validate();
    return p;
}

ChannelRealization realize_channel(const ChannelProfile& profile, std::uint64_t seed)
{
    profile.validate();
    ChannelRealization r;
    r.delays = profile.tap_delays_samples;
    if (profile.fixed_gains) {
        r.coefficients = *profile.fixed_gains;
        r.normalized = false;
        return r;
    }
    std::vector<double> linear;
    double total = 0.0;
    for (double p_db : profile.tap_powers_db) {
        linear.push_back(std::pow(10.0, p_db / 10.0));
        total += linear.back();
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    r.coefficients.reserve(linear.size());
    for (double p : linear) {
        const double sigma = std::sqrt(p / total / 2.0);
        const double re = gauss(rng);
        const double im = gauss(rng);
        r.coefficients.emplace_back(sigma * re, sigma * im);
    }
    r.normalized = true;
    return r;
}

int delay_in_samples(double tau_seconds, double sampling_rate_hz)
{
    // The small epsilon keeps exact multiples of the sample period (e.g. 160 Ts) from
    // flooring one sample low after the floating-point product.
    return static_cast<int>(std::floor(tau_seconds * sampling_rate_hz + 1e-9));
}

SampleBuffer apply_channel(const SampleBuffer& s, const ChannelRealization& chan, int toa_offset, std::size_t total_len)
{
    if (toa_offset < 0) throw DomainError("apply_channel: negative ToA offset");
    if (chan.coefficients.size() != chan.delays.size() || chan.delays.empty()) {
        throw DomainError("apply_channel: malformed channel realization");
    }
    const int max_delay = *std::max_element(chan.delays.begin(), chan.delays.end());
    if (*std::min_element(chan.delays.begin(), chan.delays.end()) < 0) throw DomainError("apply_channel: negative tap delay");
    if (total_len < static_cast<std::size_t>(toa_offset + max_delay) + s.size()) {
        throw DomainError("apply_channel: total_len " + std::to_string(total_len) + " cannot hold the delayed signal");
    }
    SampleBuffer y;
    y.sampling_rate_hz = s.sampling_rate_hz;
    y.samples.assign(total_len, cplx{});
    for (std::size_t i = 0; i < chan.size(); ++i) {
        const auto start = static_cast<std::size_t>(toa_offset + chan.delays[i]);
        const cplx h = chan.coefficients[i];
        for (std::size_t n = 0; n < s.size(); ++n) y.samples[start + n] += h * s.samples[n];
    }
    return y;
}

double noise_variance(double snr_db, double sigma_s_sq)
{
    return sigma_s_sq / std::pow(10.0, snr_db / 10.0);
}

SampleBuffer add_awgn(const SampleBuffer& y, double snr_db, double sigma_s_sq, std::uint64_t seed)
{
    if (!(sigma_s_sq > 0.0)) throw DomainError("add_awgn: sigma_s_sq must be positive");
    const double sigma = std::sqrt(noise_variance(snr_db, sigma_s_sq) / 2.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SampleBuffer out = y;
    for (auto& v : out.samples) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v += cplx(sigma * re, sigma * im);
    }
    return out;
}

}  // namespace nbtoa
