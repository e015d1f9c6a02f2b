// SPDX-License-Identifier: Apache-2.0
// Command-line front end: signal generation, single-capture estimation and batch experiments.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nbtoa/harness.hpp"
#include "nbtoa/iq_file.hpp"

namespace {

using nbtoa::cplx;
using nlohmann::json;

struct GenArgs {
    double rate_hz = nbtoa::kReferenceRateHz;
    int shift = 0;
    std::uint64_t seed = 1;
    std::string output;
    std::optional<std::string> profile;
    double snr_db = 0.0;
    int toa = 50;
    std::uint64_t channel_seed = 1;
    std::uint64_t noise_seed = 2;
    int window = 120;
};

struct EstimateArgs {
    std::string input;
    std::string estimator = "sage";
    double eta2 = 0.5;
    int window = 120;
    std::optional<int> d_max;
    std::optional<double> eta3;
    std::optional<int> sweeps;
    std::optional<int> half_window;
    std::optional<int> initial_taps;
    std::optional<std::string> divisor;
};

struct ExperimentArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<std::string> output_dir;
};

void run_gen(const GenArgs& a)
{
    nbtoa::SampleBuffer out;
    nbtoa::IqMetadata meta;
    meta.seed = a.seed;
    meta.cell_id_shift = a.shift;
    if (!a.profile) {
        out = nbtoa::generate_nprs_subframe(a.rate_hz, a.shift, a.seed);
        meta.kind = "reference";
    } else {
        nbtoa::ExperimentConfig cfg;
        cfg.sampling_rate_hz = a.rate_hz;
        cfg.cell_id_shift = a.shift;
        cfg.nprs_seed = a.seed;
        cfg.true_toa = a.toa;
        cfg.window_len = a.window;
        cfg.channel = nbtoa::builtin_profile(nbtoa::parse_profile_name(*a.profile), a.rate_hz);
        cfg.toa = nbtoa::ToaParams::defaults_for_rate(a.rate_hz);
        cfg.snr_grid_db = {a.snr_db};
        cfg.validate();
        const auto setup = nbtoa::SimulationSetup::build(cfg);
        out = nbtoa::simulate_received(cfg, setup, cfg.channel, a.snr_db, {a.channel_seed, a.noise_seed}, true);
        meta.kind = "received";
    }
    nbtoa::write_iq(a.output, out, meta);
    std::cout << json{{"output", a.output}, {"samples", out.size()}, {"kind", meta.kind}}.dump() << '\n';
}

void run_estimate(const EstimateArgs& a)
{
    nbtoa::IqMetadata meta;
    const auto y = nbtoa::read_iq(a.input, &meta);
    const auto ref = nbtoa::generate_nprs_subframe(meta.sampling_rate_hz, meta.cell_id_shift, meta.seed);
    if (a.window < 2) throw nbtoa::ConfigError("--window must be >= 2");
    const auto D = static_cast<std::size_t>(a.window);
    const auto acf = nbtoa::compute_acf(ref, std::min(D, ref.size() - 1));
    const auto corr = nbtoa::cross_correlate(y, ref, D);

    json out = {{"input", a.input},
                {"estimator", a.estimator},
                {"window", a.window},
                {"papr", nbtoa::papr_traditional(corr)},
                {"papr_acf_removed", nbtoa::papr_acf_removed(corr, acf)}};
    const auto peak = nbtoa::ml_single_path(corr);
    out["peak_delay"] = peak.delay;

    switch (nbtoa::parse_estimator_kind(a.estimator)) {
    case nbtoa::EstimatorKind::Threshold: out["toa"] = nbtoa::threshold_toa(corr, a.eta2); break;
    case nbtoa::EstimatorKind::Ml: out["toa"] = peak.delay; break;
    case nbtoa::EstimatorKind::Sage: {
        auto p = nbtoa::ToaParams::defaults_for_rate(meta.sampling_rate_hz);
        if (a.d_max) p.max_peak_distance = *a.d_max;
        if (a.eta3) p.weak_tap_fraction = *a.eta3;
        if (a.sweeps) p.sage.sweeps = *a.sweeps;
        if (a.half_window) p.sage.half_window = *a.half_window;
        if (a.initial_taps) p.sage.initial_taps = *a.initial_taps;
        if (a.divisor) p.sage.divisor = *a.divisor == "2E+1" ? nbtoa::CoeffDivisor::TwoEPlusOne : nbtoa::CoeffDivisor::TwoE;
        const auto r = nbtoa::estimate_toa(corr, acf, p);
        // Coefficients are reported in the channel domain (trace values divided by the reference energy).
        const double energy = ref.energy();
        json taps = json::array();
        for (std::size_t i = 0; i < r.taps.size(); ++i) {
            taps.push_back({{"delay", r.taps.delays[i]}, {"re", r.taps.coeffs[i].real() / energy}, {"im", r.taps.coeffs[i].imag() / energy}});
        }
        out["toa"] = r.toa;
        out["taps"] = taps;
        out["used_fallback"] = r.used_fallback;
        out["outer_iterations"] = r.outer_iterations;
        out["hit_iteration_cap"] = r.hit_iteration_cap;
        out["fit_noise"] = r.fit_noise / energy;
        out["peak_noise"] = r.peak_noise / energy;
        break;
    }
    }
    std::cout << out.dump(2) << '\n';
}

void run_experiment_cmd(const ExperimentArgs& a)
{
    auto overrides = a.overrides;
    if (a.output_dir) overrides.push_back("output_dir=\"" + *a.output_dir + "\"");
    const auto cfg = nbtoa::load_config(a.config, overrides);
    json written = json::array();
    for (const auto& p : nbtoa::run_experiment(cfg)) written.push_back(p.string());
    std::cout << json{{"experiment", nbtoa::to_string(cfg.experiment)}, {"written", written}}.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"NB-IoT positioning reference signal ToA estimation toolkit"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-signal", "Write a reference subframe or a simulated received capture as cf32");
    gen_cmd->add_option("--rate", gen.rate_hz, "Sampling rate in Hz")->capture_default_str();
    gen_cmd->add_option("--shift", gen.shift, "Cell-ID frequency shift (0..5)")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "Sequence seed")->capture_default_str();
    gen_cmd->add_option("-o,--output", gen.output, "Output .cf32 path")->required();
    gen_cmd->add_option("--profile", gen.profile, "Channel profile (AWGN, EPA, EVA, ETU); enables received-capture mode");
    gen_cmd->add_option("--snr-db", gen.snr_db, "SNR in dB for the received capture")->capture_default_str();
    gen_cmd->add_option("--toa", gen.toa, "True ToA offset in samples")->capture_default_str();
    gen_cmd->add_option("--channel-seed", gen.channel_seed, "Fading draw seed")->capture_default_str();
    gen_cmd->add_option("--noise-seed", gen.noise_seed, "Noise seed")->capture_default_str();
    gen_cmd->add_option("--window", gen.window, "Search window D; capture length is D + S - 1")->capture_default_str();

    EstimateArgs est;
    auto* est_cmd = app.add_subcommand("estimate", "Estimate the ToA of a cf32 capture");
    est_cmd->add_option("-i,--input", est.input, "Input .cf32 path (sidecar <path>.json required)")->required();
    est_cmd->add_option("--estimator", est.estimator, "threshold | ml | sage")
        ->check(CLI::IsMember({"threshold", "ml", "sage"}))
        ->capture_default_str();
    est_cmd->add_option("--eta2", est.eta2, "Threshold-estimator level in (0,1)")->capture_default_str();
    est_cmd->add_option("--window", est.window, "Search window D")->capture_default_str();
    est_cmd->add_option("--d-max", est.d_max, "Maximum tap distance from the peak");
    est_cmd->add_option("--eta3", est.eta3, "Weak-tap power fraction");
    est_cmd->add_option("--sweeps", est.sweeps, "SAGE sweeps M");
    est_cmd->add_option("--half-window", est.half_window, "Coefficient half window E");
    est_cmd->add_option("--initial-taps", est.initial_taps, "Initial tap count L0");
    est_cmd->add_option("--divisor", est.divisor, "Coefficient divisor")->check(CLI::IsMember({"2E", "2E+1"}));

    ExperimentArgs exp;
    auto* exp_cmd = app.add_subcommand("experiment", "Run a Monte-Carlo experiment from a JSON config");
    exp_cmd->add_option("-c,--config", exp.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    exp_cmd->add_option("--override", exp.overrides, "key=value override, dotted keys (repeatable)");
    exp_cmd->add_option("--output-dir", exp.output_dir, "Output directory (overrides the config)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen_cmd) run_gen(gen);
        if (*est_cmd) run_estimate(est);
        if (*exp_cmd) run_experiment_cmd(exp);
    } catch (const nbtoa::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
