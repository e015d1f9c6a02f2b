// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion, followed by the measured values.
// Usage: nbtoa_acceptance <path-to-unit-test-binary>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>

#include "nbtoa/harness.hpp"
#include "oracles.hpp"

using namespace nbtoa;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

// 1. Library routines against brute-force oracles on 1000 random instances each.
Outcome oracle_equivalence()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> len(1, 512);
    int corr_bad = 0, acf_bad = 0, init_bad = 0, far_bad = 0, weak_bad = 0;
    for (int t = 0; t < 1000; ++t) {
        // cross_correlate: S + D - 1 <= 512.
        const auto S = len(rng) / 2 + 1;
        std::uniform_int_distribution<std::size_t> dlen(1, 512 - S + 1);
        const auto D = dlen(rng);
        const auto s = oracle::random_signal(rng, S);
        const auto y = oracle::random_signal(rng, S + D - 1);
        const auto got = cross_correlate(oracle::buffer(y), oracle::buffer(s), D);
        const auto want = oracle::correlate(y, s, D);
        for (std::size_t d = 0; d < D; ++d) corr_bad += got[d] != want[d] ? 1 : 0;

        // compute_acf.
        const auto n = len(rng);
        const auto v = oracle::random_signal(rng, n);
        std::uniform_int_distribution<std::size_t> lag(0, n - 1);
        const auto ml = lag(rng);
        const auto acf = compute_acf(oracle::buffer(v), ml);
        for (long d = -static_cast<long>(ml); d <= static_cast<long>(ml); ++d) {
            const cplx w = d == 0 ? cplx{1.0, 0.0} : oracle::acf(v, d);
            acf_bad += std::abs(acf(d) - w) > 1e-12 ? 1 : 0;
        }

        // initialize, with quantized magnitudes and quarter-turn phases so ties are exact.
        const auto Dr = len(rng);
        Correlation c{std::vector<cplx>(Dr), 1920};
        std::uniform_int_distribution<int> level(0, 9);
        const cplx phases[] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
        for (auto& x : c.values) x = static_cast<double>(level(rng)) * phases[level(rng) % 4];
        std::uniform_int_distribution<std::size_t> pickL(1, Dr);
        const auto L = pickL(rng);
        const auto a = initialize(c, L);
        const auto b = oracle::initialize(c.values, L);
        init_bad += (a.delays != b.delays || a.coeffs != b.coeffs) ? 1 : 0;

        // prune_far / prune_weak.
        TapEstimate est;
        std::uniform_int_distribution<std::size_t> taps(1, 16);
        std::uniform_int_distribution<int> delay(0, 511);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const auto nt = taps(rng);
        for (std::size_t i = 0; i < nt; ++i) {
            est.delays.push_back(delay(rng));
            est.coeffs.push_back(std::polar(u(rng) * u(rng), 6.0 * u(rng)));
        }
        const int peak = delay(rng);
        const int dmax = static_cast<int>(100.0 * u(rng));
        const double eta3 = 0.01 + 0.5 * u(rng);
        far_bad += prune_far(est, peak, dmax) == oracle::prune_far(est, peak, dmax) ? 0 : 1;
        weak_bad += prune_weak(est, eta3) == oracle::prune_weak(est, eta3) ? 0 : 1;
    }
    const double secs = seconds_since(t0);
    std::ostringstream os;
    os << "mismatches: cross_correlate " << corr_bad << ", compute_acf " << acf_bad << ", initialize " << init_bad
       << ", prune_far " << far_bad << ", prune_weak " << weak_bad << "; " << fmt("%.1f", secs) << " s";
    return {corr_bad + acf_bad + init_bad + far_bad + weak_bad == 0 && secs < 60.0, os.str()};
}

// 2. Noiseless synthetic traces with well-separated taps: exact first delay in 100/100 per L.
Outcome noiseless_recovery()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = generate_nprs_subframe(1.92e6, 0, 1);
    const auto acf = compute_acf(s, 120);
    const double e = s.energy();
    int half_lobe = 1;
    while (std::abs(acf(half_lobe + 1)) < std::abs(acf(half_lobe))) ++half_lobe;

    constexpr int lo = 30, hi = 70;
    auto params = ToaParams::defaults_for_rate(1.92e6);
    params.max_peak_distance = hi - lo;  // must span the synthetic delay spread

    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> pos(lo, hi);
    std::uniform_real_distribution<double> mag(0.6, 1.0);
    std::uniform_real_distribution<double> ph(-3.14159, 3.14159);
    int hits[4] = {0, 0, 0, 0};
    for (int L = 1; L <= 3; ++L) {
        for (int t = 0; t < 100; ++t) {
            std::vector<int> delays;
            std::vector<cplx> coeffs;
            for (;;) {
                delays.clear();
                for (int i = 0; i < L; ++i) delays.push_back(pos(rng));
                bool ok = true;
                for (int i = 0; i < L; ++i) {
                    for (int j = i + 1; j < L; ++j) ok = ok && std::abs(delays[i] - delays[j]) > half_lobe;
                }
                if (ok) break;
            }
            coeffs.clear();
            for (int i = 0; i < L; ++i) coeffs.push_back(std::polar(e * mag(rng), ph(rng)));
            const auto tr = oracle::synthetic_trace(acf, 120, delays, coeffs);
            const int truth = *std::min_element(delays.begin(), delays.end());
            hits[L] += estimate_toa(tr, acf, params).toa == truth ? 1 : 0;
        }
    }
    const double secs = seconds_since(t0);
    std::ostringstream os;
    os << "exact: L=1 " << hits[1] << "/100, L=2 " << hits[2] << "/100, L=3 " << hits[3] << "/100 (separation > "
       << half_lobe << ", d_max " << params.max_peak_distance << "); " << fmt("%.1f", secs) << " s";
    return {hits[1] == 100 && hits[2] == 100 && hits[3] == 100 && secs < 60.0, os.str()};
}

// 3. Two-path example at 30.72 MHz.
Outcome two_path_example()
{
    const auto s = generate_nprs_subframe(30.72e6, 0, 1);
    constexpr std::size_t D = 400;
    const auto acf = compute_acf(s, D);
    const auto chan = realize_channel(custom_fixed_profile({0, 160}, {cplx{0.4}, cplx{1.0}}), 0);
    const auto y = apply_channel(s, chan, 0, D + s.size() - 1);
    const auto corr = cross_correlate(y, s, D);
    const int peak = ml_single_path(corr).delay;
    const auto r = estimate_toa(corr, acf, ToaParams::defaults_for_rate(30.72e6));
    std::ostringstream os;
    os << "argmax|R| = " << peak << " (want 138 +/- 2), estimated ToA = " << r.toa << " (want 0), taps "
       << r.taps.size() << (r.used_fallback ? ", single-path fallback" : "");
    return {std::abs(peak - 138) <= 2 && r.toa == 0, os.str()};
}

std::vector<DetectionRecord> detection(ProfileName profile)
{
    return run_detection_experiment(ExperimentConfig::defaults(ExperimentKind::Detection, profile));
}

// 4. AWGN: SAGE within 0.05 of ML at every grid point.
Outcome awgn_close_to_ml()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto recs = detection(ProfileName::Awgn);
    double worst_exact = 0.0, worst_w3 = 0.0;
    std::ostringstream pts;
    for (double snr : ExperimentConfig::defaults(ExperimentKind::Detection, ProfileName::Awgn).snr_grid_db) {
        const auto& ml = find_record(recs, snr, EstimatorKind::Ml);
        const auto& sg = find_record(recs, snr, EstimatorKind::Sage);
        worst_exact = std::max(worst_exact, std::abs(ml.p_exact - sg.p_exact));
        worst_w3 = std::max(worst_w3, std::abs(ml.p_within3 - sg.p_within3));
        pts << " " << snr << "dB:" << fmt("%.3f", ml.p_exact) << "/" << fmt("%.3f", sg.p_exact);
    }
    std::ostringstream os;
    os << "max |p_sage - p_ml|: exact " << fmt("%.4f", worst_exact) << ", within3 " << fmt("%.4f", worst_w3)
       << "; p_exact ml/sage" << pts.str() << "; " << fmt("%.1f", seconds_since(t0)) << " s";
    return {worst_exact <= 0.05 && worst_w3 <= 0.05, os.str()};
}

// 5. Fading channels at -15 dB, plus strict superiority over the threshold baseline.
Outcome fading_detection()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto etu = detection(ProfileName::Etu);
    const auto epa = detection(ProfileName::Epa);
    const double etu15 = find_record(etu, -15.0, EstimatorKind::Sage).p_within3;
    const double epa15 = find_record(epa, -15.0, EstimatorKind::Sage).p_within3;
    bool superior = true;
    for (double snr : ExperimentConfig::defaults(ExperimentKind::Detection, ProfileName::Etu).snr_grid_db) {
        if (snr > -6.0) continue;
        for (const auto* recs : {&etu, &epa}) {
            superior = superior && find_record(*recs, snr, EstimatorKind::Sage).p_within3 >
                                       find_record(*recs, snr, EstimatorKind::Threshold).p_within3;
        }
    }
    std::ostringstream os;
    os << "p_within3 at -15 dB: ETU " << fmt("%.4f", etu15) << " (>= 0.65), EPA " << fmt("%.4f", epa15)
       << " (>= 0.80); threshold p_within3 at -15 dB ETU " << fmt("%.4f", find_record(etu, -15.0, EstimatorKind::Threshold).p_within3)
       << ", EPA " << fmt("%.4f", find_record(epa, -15.0, EstimatorKind::Threshold).p_within3)
       << "; SAGE > threshold at every SNR <= -6 dB: " << (superior ? "yes" : "no") << "; " << fmt("%.1f", seconds_since(t0)) << " s";
    return {etu15 >= 0.65 && epa15 >= 0.80 && superior, os.str()};
}

// 6. Averaged noise-power curve over sweeps 1..16.
Outcome convergence()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_convergence_experiment(ExperimentConfig::defaults(ExperimentKind::Convergence, ProfileName::Etu)).at(0);
    bool monotone = true;
    for (std::size_t m = 2; m < r.mean_objective.size(); ++m) {
        monotone = monotone && r.mean_objective[m] <= r.mean_objective[m - 1] + 2.0 * r.std_error[m - 1];
    }
    const double rel = std::abs(r.mean_objective[16] - r.mean_objective[10]) / r.mean_objective[10];
    std::ostringstream os;
    os << "non-increasing within 2 SE: " << (monotone ? "yes" : "no") << "; relative change sweep 10 -> 16: "
       << fmt("%.4f", rel) << " (< 0.02); curve";
    for (std::size_t m : {1, 2, 4, 6, 8, 10, 12, 14, 16}) os << " m" << m << "=" << fmt("%.4g", r.mean_objective[m]);
    os << "; final <= initial in " << fmt("%.3f", r.fraction_final_le_initial) << " of trials; " << fmt("%.1f", seconds_since(t0)) << " s";
    return {monotone && rel < 0.02, os.str()};
}

// 7. PAPR deciles at -4 dB AWGN.
Outcome papr_shift()
{
    const auto t0 = std::chrono::steady_clock::now();
    auto cfg = ExperimentConfig::defaults(ExperimentKind::PaprCdf, ProfileName::Awgn);
    const auto r = run_papr_experiment(cfg);
    const auto& trad_p = r.find(-4.0, PaprMethod::Traditional, true);
    const auto& rem_p = r.find(-4.0, PaprMethod::AcfRemoved, true);
    const auto& trad_n = r.find(-4.0, PaprMethod::Traditional, false);
    const auto& rem_n = r.find(-4.0, PaprMethod::AcfRemoved, false);
    bool dominates = true;
    double worst_rel = 0.0;
    for (int q = 1; q <= 9; ++q) {
        const double p = q / 10.0;
        dominates = dominates && rem_p.quantile(p) >= trad_p.quantile(p);
        worst_rel = std::max(worst_rel, std::abs(rem_n.quantile(p) - trad_n.quantile(p)) / trad_n.quantile(p));
    }
    std::ostringstream os;
    os << "NPRS present: ACF-removed deciles >= traditional at all deciles: " << (dominates ? "yes" : "no")
       << " (median " << fmt("%.3f", rem_p.quantile(0.5)) << " vs " << fmt("%.3f", trad_p.quantile(0.5))
       << "); noise only: worst decile relative difference " << fmt("%.4f", worst_rel) << " (<= 0.10); "
       << fmt("%.1f", seconds_since(t0)) << " s";
    return {dominates && worst_rel <= 0.10, os.str()};
}

// 8. Property tests from the unit suite.
Outcome property_suite(const std::string& unit_binary)
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::string cmd = "\"" + unit_binary + "\" --test-case='property*' --minimal > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    const double secs = seconds_since(t0);
    std::ostringstream os;
    os << "unit-suite property cases exit status " << rc << "; " << fmt("%.1f", secs) << " s";
    return {rc == 0 && secs < 900.0, os.str()};
}

}  // namespace

int main(int argc, char** argv)
{
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <unit-test-binary>\n", argv[0]);
        return 2;
    }
    const std::string unit_binary = argv[1];
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"oracle equivalence", oracle_equivalence},
        {"noiseless recovery", noiseless_recovery},
        {"two-path example", two_path_example},
        {"AWGN closeness to ML", awgn_close_to_ml},
        {"fading-channel detection", fading_detection},
        {"SAGE convergence", convergence},
        {"PAPR CDF shift", papr_shift},
        {"property suite", [&] { return property_suite(unit_binary); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
