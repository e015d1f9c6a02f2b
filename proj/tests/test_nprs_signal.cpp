// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "nbtoa/nprs_signal.hpp"
#include "oracles.hpp"

using namespace nbtoa;

TEST_CASE("numerology at the three analysis rates")
{
    const auto n192 = Numerology::for_rate(1.92e6);
    CHECK(n192.fft_size == 128);
    CHECK(n192.cp_lengths == std::vector<std::size_t>{10, 9, 9, 9, 9, 9, 9, 10, 9, 9, 9, 9, 9, 9});
    CHECK(n192.subframe_length() == 1920);
    CHECK(14 * 128 + 2 * 10 + 12 * 9 == 1920);
    CHECK_NOTHROW(n192.validate());

    const auto n3072 = Numerology::for_rate(30.72e6);
    CHECK(n3072.fft_size == 2048);
    CHECK(n3072.cp_lengths.front() == 160);
    CHECK(n3072.cp_lengths[1] == 144);
    CHECK(n3072.subframe_length() == 30720);

    const auto n240 = Numerology::for_rate(240e3);
    CHECK(n240.fft_size == 16);
    CHECK(n240.subframe_length() == 240);

    for (const auto& n : {n192, n3072, n240}) {
        CHECK(static_cast<double>(n.fft_size) * n.subcarrier_spacing_hz == doctest::Approx(n.sampling_rate_hz));
        CHECK(static_cast<double>(n.subframe_length()) == doctest::Approx(n.sampling_rate_hz * 1e-3));
    }
}

TEST_CASE("numerology rejects inconsistent configurations")
{
    CHECK_THROWS_AS(Numerology::for_rate(1.0e6), ConfigError);
    CHECK_THROWS_AS(Numerology::for_fft_size(100), ConfigError);
    auto bad = Numerology::for_rate(1.92e6);
    bad.cp_lengths[0] = 11;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    auto bad_rate = Numerology::for_rate(1.92e6);
    bad_rate.sampling_rate_hz = 2e6;
    CHECK_THROWS_AS(bad_rate.validate(), ConfigError);
    CHECK_THROWS_AS(ofdm_modulate(ResourceGrid{}, bad), ConfigError);
}

TEST_CASE("pilot grid: two unit-magnitude QPSK pilots per pilot symbol, zeros elsewhere")
{
    const auto g = generate_nprs_grid(0, 1);
    CHECK(g.nprs_count() == 2 * kNprsSymbols.size());
    const double r = 1.0 / std::sqrt(2.0);
    for (std::size_t l = 0; l < kSymbolsPerSubframe; ++l) {
        const bool pilot_symbol = std::find(kNprsSymbols.begin(), kNprsSymbols.end(), l) != kNprsSymbols.end();
        int count = 0;
        for (std::size_t k = 0; k < kSubcarriersPerPrb; ++k) {
            if (g.is_nprs(k, l)) {
                ++count;
                CHECK(std::abs(g.cell(k, l)) == doctest::Approx(1.0));
                CHECK(std::abs(std::abs(g.cell(k, l).real()) - r) < 1e-15);
                CHECK(std::abs(std::abs(g.cell(k, l).imag()) - r) < 1e-15);
            } else {
                CHECK(g.cell(k, l) == cplx{});
            }
        }
        CHECK(count == (pilot_symbol ? 2 : 0));
    }
}

TEST_CASE("pilot grid: deterministic per seed, different across seeds")
{
    CHECK(generate_nprs_grid(0, 1) == generate_nprs_grid(0, 1));
    CHECK_FALSE(generate_nprs_grid(0, 1) == generate_nprs_grid(0, 2));
}

TEST_CASE("pilot grid: cell shift rotates the mask within each half-PRB")
{
    const auto a = generate_nprs_grid(0, 1);
    const auto b = generate_nprs_grid(3, 1);
    for (std::size_t l = 0; l < kSymbolsPerSubframe; ++l) {
        for (std::size_t k = 0; k < kSubcarriersPerPrb; ++k) {
            const std::size_t half = (k / 6) * 6;
            const std::size_t shifted = half + (k % 6 + 3) % 6;
            CHECK(a.is_nprs(k, l) == b.is_nprs(shifted, l));
        }
    }
    CHECK_THROWS_AS(generate_nprs_grid(6, 1), DomainError);
    CHECK_THROWS_AS(generate_nprs_grid(-1, 1), DomainError);
}

TEST_CASE("OFDM: all-zero grid gives an all-zero subframe")
{
    const auto s = ofdm_modulate(ResourceGrid{}, Numerology::for_rate(1.92e6));
    CHECK(s.size() == 1920);
    for (const auto& x : s.samples) CHECK(x == cplx{});
}

TEST_CASE("OFDM: a single subcarrier is a constant-modulus tone with CP equal to the body tail")
{
    const auto num = Numerology::for_rate(1.92e6);
    ResourceGrid g;
    g.set_cell(7, 4, cplx{1.0, 0.0});
    const auto s = ofdm_modulate(g, num);
    const auto start = num.symbol_start(4);
    const auto cp = num.cp_lengths[4];
    const auto N = num.fft_size;
    for (std::size_t n = 0; n < cp + N; ++n) {
        CHECK(std::abs(s.samples[start + n]) == doctest::Approx(1.0 / std::sqrt(128.0)).epsilon(1e-12));
    }
    for (std::size_t n = 0; n < cp; ++n) CHECK(std::abs(s.samples[start + n] - s.samples[start + N + n]) < 1e-14);
    // Other symbols stay empty.
    for (std::size_t n = 0; n < start; ++n) CHECK(s.samples[n] == cplx{});
}

TEST_CASE("OFDM: full pilot subframe matches a direct inverse-DFT synthesis")
{
    const auto num = Numerology::for_rate(1.92e6);
    const auto g = generate_nprs_grid(2, 9);
    const auto s = ofdm_modulate(g, num);
    const auto ref = oracle::ofdm(g, num);
    REQUIRE(s.size() == 1920);
    REQUIRE(ref.size() == 1920);
    double err = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) err = std::max(err, std::abs(s.samples[i] - ref[i]));
    CHECK(err < 1e-12);
}

TEST_CASE("property: symbol-body energy equals grid energy under 1/sqrt(N) scaling")
{
    for (double rate : {240e3, 1.92e6, 30.72e6}) {
        const auto num = Numerology::for_rate(rate);
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const auto g = generate_nprs_grid(static_cast<int>(seed % 6), seed);
            const auto s = ofdm_modulate(g, num);
            double body = 0.0;
            for (std::size_t l = 0; l < kSymbolsPerSubframe; ++l) {
                const auto b0 = num.symbol_start(l) + num.cp_lengths[l];
                for (std::size_t n = 0; n < num.fft_size; ++n) body += std::norm(s.samples[b0 + n]);
            }
            CHECK(body == doctest::Approx(g.energy()).epsilon(1e-10));
            CHECK(g.energy() == doctest::Approx(18.0));
        }
    }
}

TEST_CASE("ACF: matches direct summation and satisfies its invariants")
{
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        const auto v = oracle::random_signal(rng, 40 + static_cast<std::size_t>(t));
        const auto acf = compute_acf(oracle::buffer(v), 30);
        CHECK(acf(0) == cplx{1.0, 0.0});
        for (long d = -30; d <= 30; ++d) {
            CHECK(std::abs(acf(d) - oracle::acf(v, d)) < 1e-12);
            CHECK(std::abs(acf(-d) - std::conj(acf(d))) < 1e-12);
            CHECK(std::abs(acf(d)) <= 1.0 + 1e-12);
        }
        CHECK(acf(31) == cplx{});
        CHECK(acf(-1000) == cplx{});
    }
}

TEST_CASE("property: reference ACF invariants and zero-padding invariance")
{
    const auto& s = fixture::reference_192();
    const auto acf = compute_acf(s, s.size() - 1);
    CHECK(std::abs(acf(0) - 1.0) < 1e-12);
    for (long d = -(static_cast<long>(s.size()) - 1); d < static_cast<long>(s.size()); ++d) {
        CHECK(std::abs(acf(d)) <= 1.0 + 1e-12);
        CHECK(std::abs(acf(-d) - std::conj(acf(d))) < 1e-12);
    }
    auto padded = s;
    padded.samples.resize(s.size() + 500, cplx{});
    const auto acf_padded = compute_acf(padded, 600);
    for (long d = -600; d <= 600; ++d) CHECK(std::abs(acf_padded(d) - acf(d)) < 1e-12);
}

TEST_CASE("property: regeneration from the same seed is bit-identical")
{
    const auto a = generate_nprs_subframe(1.92e6, 4, 77);
    const auto b = generate_nprs_subframe(1.92e6, 4, 77);
    CHECK(a.samples == b.samples);
    const auto ga = compute_acf(a, 200);
    const auto gb = compute_acf(b, 200);
    CHECK(std::equal(ga.values().begin(), ga.values().end(), gb.values().begin(), gb.values().end()));
}

TEST_CASE("ACF: one-PRB signal at 30.72 MHz has a main lobe wider than 10 samples")
{
    const auto s = generate_nprs_subframe(30.72e6, 0, 1);
    const auto acf = compute_acf(s, 400);
    CHECK(acf.half_power_width() > 10);
    // A 100-PRB-wide flat spectrum has a half-power width of about one sample at this rate.
    MESSAGE("half-power width at 30.72 MHz: " << acf.half_power_width());
}

TEST_CASE("ACF: error cases")
{
    CHECK_THROWS_AS(compute_acf(SampleBuffer{{}, 1.92e6}, 0), DomainError);
    CHECK_THROWS_AS(compute_acf(oracle::buffer({1.0, 2.0}), 2), DomainError);
    CHECK_THROWS_AS(compute_acf(oracle::buffer({0.0, 0.0, 0.0}), 1), DomainError);
}

TEST_CASE("sample buffer validation")
{
    CHECK_THROWS_AS(SampleBuffer{}.validate(), DomainError);
    CHECK_THROWS_AS((SampleBuffer{{cplx{NAN, 0.0}}, 1.92e6}).validate(), DomainError);
    CHECK_THROWS_AS((SampleBuffer{{cplx{1.0, 0.0}}, 0.0}).validate(), DomainError);
    const auto& s = fixture::reference_192();
    CHECK(s.mean_power() == doctest::Approx(s.energy() / 1920.0));
}
