// SPDX-License-Identifier: Apache-2.0
#include "nbtoa/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#ifndef NBTOA_VERSION
#define NBTOA_VERSION "0.0.0-dev"
#endif

namespace nbtoa {

using nlohmann::json;

namespace {

std::string fmt_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string divisor_name(CoeffDivisor d) { return d == CoeffDivisor::TwoE ? "2E" : "2E+1"; }

CoeffDivisor parse_divisor(const std::string& s)
{
    if (s == "2E") return CoeffDivisor::TwoE;
    if (s == "2E+1") return CoeffDivisor::TwoEPlusOne;
    throw ConfigError("unknown coefficient divisor '" + s + "' (expected 2E or 2E+1)");
}

std::string visit_order_name(VisitOrder v) { return v == VisitOrder::StrongestFirst ? "strongest_first" : "stored"; }

VisitOrder parse_visit_order(const std::string& s)
{
    if (s == "strongest_first") return VisitOrder::StrongestFirst;
    if (s == "stored") return VisitOrder::Stored;
    throw ConfigError("unknown visit order '" + s + "'");
}

json channel_to_json(const ChannelProfile& p)
{
    json taps = json::array();
    for (std::size_t i = 0; i < p.tap_delays_samples.size(); ++i) {
        json tap = {{"delay", p.tap_delays_samples[i]}, {"power_db", p.tap_powers_db[i]}};
        if (p.fixed_gains) tap["gain"] = {(*p.fixed_gains)[i].real(), (*p.fixed_gains)[i].imag()};
        taps.push_back(tap);
    }
    return {{"profile", to_string(p.name)}, {"taps", taps}};
}

ChannelProfile channel_from_json(const json& j, double rate_hz)
{
    const ProfileName name = parse_profile_name(j.at("profile").get<std::string>());
    if (!j.contains("taps")) {
        if (name == ProfileName::Custom) throw ConfigError("CUSTOM channel needs a 'taps' list");
        return builtin_profile(name, rate_hz);
    }
    ChannelProfile p;
    p.name = name;
    bool any_gain = false;
    std::vector<cplx> gains;
    for (const auto& tap : j.at("taps")) {
        p.tap_delays_samples.push_back(tap.at("delay").get<int>());
        if (tap.contains("gain")) {
            const auto g = tap.at("gain");
            gains.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
            any_gain = true;
            p.tap_powers_db.push_back(tap.value("power_db", 10.0 * std::log10(std::max(std::norm(gains.back()), 1e-300))));
        } else {
            p.tap_powers_db.push_back(tap.at("power_db").get<double>());
        }
    }
    if (any_gain) {
        if (gains.size() != p.tap_delays_samples.size()) throw ConfigError("either every tap or no tap must carry a fixed gain");
        p.fixed_gains = std::move(gains);
    }
    p.validate();
    return p;
}

json toa_to_json(const ToaParams& t)
{
    return {{"d_max", t.max_peak_distance},
            {"eta3", t.weak_tap_fraction},
            {"max_outer_iterations", t.max_outer_iterations},
            {"sage",
             {{"sweeps", t.sage.sweeps},
              {"half_window", t.sage.half_window},
              {"initial_taps", t.sage.initial_taps},
              {"divisor", divisor_name(t.sage.divisor)},
              {"visit_order", visit_order_name(t.sage.visit_order)}}}};
}

ToaParams toa_from_json(const json& j, double rate_hz)
{
    ToaParams t = ToaParams::defaults_for_rate(rate_hz);
    t.max_peak_distance = j.value("d_max", t.max_peak_distance);
    t.weak_tap_fraction = j.value("eta3", t.weak_tap_fraction);
    t.max_outer_iterations = j.value("max_outer_iterations", t.max_outer_iterations);
    if (j.contains("sage")) {
        const auto& s = j.at("sage");
        t.sage.sweeps = s.value("sweeps", t.sage.sweeps);
        t.sage.half_window = s.value("half_window", t.sage.half_window);
        t.sage.initial_taps = s.value("initial_taps", t.sage.initial_taps);
        if (s.contains("divisor")) t.sage.divisor = parse_divisor(s.at("divisor").get<std::string>());
        if (s.contains("visit_order")) t.sage.visit_order = parse_visit_order(s.at("visit_order").get<std::string>());
    }
    return t;
}

std::string to_hex(const unsigned char* data, std::size_t n)
{
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xF]);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Names

std::string to_string(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::PaprCdf: return "papr_cdf";
    case ExperimentKind::Convergence: return "convergence";
    case ExperimentKind::Detection: return "detection";
    }
    return "?";
}

std::string to_string(EstimatorKind kind)
{
    switch (kind) {
    case EstimatorKind::Threshold: return "threshold";
    case EstimatorKind::Ml: return "ml";
    case EstimatorKind::Sage: return "sage";
    }
    return "?";
}

ExperimentKind parse_experiment_kind(const std::string& text)
{
    for (auto k : {ExperimentKind::PaprCdf, ExperimentKind::Convergence, ExperimentKind::Detection}) {
        if (text == to_string(k)) return k;
    }
    throw ConfigError("unknown experiment '" + text + "'");
}

EstimatorKind parse_estimator_kind(const std::string& text)
{
    for (auto k : {EstimatorKind::Threshold, EstimatorKind::Ml, EstimatorKind::Sage}) {
        if (text == to_string(k)) return k;
    }
    throw ConfigError("unknown estimator '" + text + "'");
}

// ---------------------------------------------------------------------------
// Config

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind, ProfileName profile)
{
    ExperimentConfig cfg;
    cfg.experiment = kind;
    cfg.channel = builtin_profile(profile, cfg.sampling_rate_hz);
    cfg.toa = ToaParams::defaults_for_rate(cfg.sampling_rate_hz);
    switch (kind) {
    case ExperimentKind::PaprCdf: cfg.snr_grid_db = {-4.0}; break;
    case ExperimentKind::Convergence: cfg.snr_grid_db = {5.0}; break;
    case ExperimentKind::Detection:
        cfg.snr_grid_db.clear();
        for (int snr = -21; snr <= 0; snr += 3) cfg.snr_grid_db.push_back(snr);
        break;
    }
    return cfg;
}

void ExperimentConfig::validate() const
{
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (snr_grid_db.empty()) throw ConfigError("SNR grid is empty");
    if (window_len < 2) throw ConfigError("window_len must be >= 2");
    if (true_toa < 0) throw ConfigError("true_toa must be >= 0");
    if (!(eta2 > 0.0 && eta2 < 1.0)) throw ConfigError("eta2 must lie in (0, 1)");
    if (convergence_sweeps < 1) throw ConfigError("convergence_sweeps must be >= 1");
    if (estimators.empty()) throw ConfigError("no estimators selected");
    if (experiment == ExperimentKind::PaprCdf && channel.name != ProfileName::Awgn) {
        throw ConfigError("the PAPR experiment runs on the AWGN profile");
    }
    channel.validate();
    toa.validate();
    const int spread = channel.tap_delays_samples.back();
    if (true_toa + spread > window_len - 1) {
        throw ConfigError("window_len " + std::to_string(window_len) + " does not cover true_toa + delay spread");
    }
}

void to_json(json& j, const ExperimentConfig& cfg)
{
    json estimators = json::array();
    for (auto e : cfg.estimators) estimators.push_back(to_string(e));
    j = json{{"experiment", to_string(cfg.experiment)},
             {"channel", channel_to_json(cfg.channel)},
             {"snr_grid_db", cfg.snr_grid_db},
             {"trials", cfg.trials},
             {"true_toa", cfg.true_toa},
             {"master_seed", cfg.master_seed},
             {"sampling_rate_hz", cfg.sampling_rate_hz},
             {"window_len", cfg.window_len},
             {"cell_id_shift", cfg.cell_id_shift},
             {"nprs_seed", cfg.nprs_seed},
             {"eta2", cfg.eta2},
             {"estimators", estimators},
             {"toa", toa_to_json(cfg.toa)},
             {"convergence_sweeps", cfg.convergence_sweeps},
             {"output_dir", cfg.output_dir.string()}};
}

void from_json(const json& j, ExperimentConfig& cfg)
{
    const auto kind = parse_experiment_kind(j.at("experiment").get<std::string>());
    cfg = ExperimentConfig{};
    cfg.experiment = kind;
    cfg.sampling_rate_hz = j.value("sampling_rate_hz", cfg.sampling_rate_hz);
    cfg.channel = channel_from_json(j.value("channel", json{{"profile", "AWGN"}}), cfg.sampling_rate_hz);
    cfg.snr_grid_db = j.value("snr_grid_db", ExperimentConfig::defaults(kind, ProfileName::Awgn).snr_grid_db);
    cfg.trials = j.value("trials", cfg.trials);
    cfg.true_toa = j.value("true_toa", cfg.true_toa);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.window_len = j.value("window_len", cfg.window_len);
    cfg.cell_id_shift = j.value("cell_id_shift", cfg.cell_id_shift);
    cfg.nprs_seed = j.value("nprs_seed", cfg.nprs_seed);
    cfg.eta2 = j.value("eta2", cfg.eta2);
    if (j.contains("estimators")) {
        cfg.estimators.clear();
        for (const auto& e : j.at("estimators")) cfg.estimators.push_back(parse_estimator_kind(e.get<std::string>()));
    }
    cfg.toa = toa_from_json(j.value("toa", json::object()), cfg.sampling_rate_hz);
    cfg.convergence_sweeps = j.value("convergence_sweeps", cfg.convergence_sweeps);
    cfg.output_dir = j.value("output_dir", cfg.output_dir.string());
}

ExperimentConfig parse_config(const json& j, const std::vector<std::string>& overrides)
{
    json doc = j;
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + ov + "' is not key=value");
        std::string pointer = "/" + ov.substr(0, eq);
        std::replace(pointer.begin(), pointer.end(), '.', '/');
        const std::string raw = ov.substr(eq + 1);
        json value = json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;
        doc[json::json_pointer(pointer)] = value;
    }
    ExperimentConfig cfg;
    try {
        cfg = doc.get<ExperimentConfig>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json j = json::parse(in, nullptr, false, true);
    if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
    return parse_config(j, overrides);
}

// ---------------------------------------------------------------------------
// Simulation plumbing

SimulationSetup SimulationSetup::build(const ExperimentConfig& cfg)
{
    SampleBuffer ref = generate_nprs_subframe(cfg.sampling_rate_hz, cfg.cell_id_shift, cfg.nprs_seed);
    const auto max_lag = std::min<std::size_t>(static_cast<std::size_t>(cfg.window_len), ref.size() - 1);
    Acf acf = compute_acf(ref, max_lag);
    const double sigma_s_sq = ref.mean_power();
    const std::size_t received_len = static_cast<std::size_t>(cfg.window_len) + ref.size() - 1;
    return SimulationSetup{std::move(ref), std::move(acf), sigma_s_sq, received_len};
}

TrialSeeds TrialSeeds::derive(std::uint64_t master_seed, std::size_t snr_index, std::size_t trial)
{
    const std::uint64_t trial_seed = split_seed(master_seed, trial);
    return {split_seed(trial_seed, 0), split_seed(split_seed(trial_seed, 1), snr_index)};
}

SampleBuffer simulate_received(const ExperimentConfig& cfg, const SimulationSetup& setup, const ChannelProfile& profile,
                               double snr_db, const TrialSeeds& seeds, bool nprs_present)
{
    SampleBuffer y;
    if (nprs_present) {
        y = apply_channel(setup.reference, realize_channel(profile, seeds.channel), cfg.true_toa, setup.received_len);
    } else {
        y.sampling_rate_hz = setup.reference.sampling_rate_hz;
        y.samples.assign(setup.received_len, cplx{});
    }
    return add_awgn(y, snr_db, setup.sigma_s_sq, seeds.noise);
}

std::size_t worker_count()
{
    if (const char* env = std::getenv("NBTOA_WORKERS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && n > 0) return static_cast<std::size_t>(n);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body)
{
    const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next.store(count);
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// CSV

std::string CsvTable::str() const
{
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out.str();
}

void CsvTable::write(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << str();
    if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// PAPR

double PaprSeries::quantile(double p) const
{
    if (sorted_values.empty()) throw DomainError("quantile of an empty series");
    const auto n = sorted_values.size();
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted_values[rank - 1];
}

const PaprSeries& PaprResult::find(double snr_db, PaprMethod method, bool nprs_present) const
{
    for (const auto& s : series) {
        if (s.snr_db == snr_db && s.method == method && s.nprs_present == nprs_present) return s;
    }
    throw DomainError("no PAPR series for the requested condition");
}

namespace {
std::string method_name(PaprMethod m) { return m == PaprMethod::Traditional ? "traditional" : "acf_removed"; }
std::string condition_name(bool present) { return present ? "nprs_present" : "noise_only"; }
}  // namespace

CsvTable PaprResult::cdf_table() const
{
    CsvTable t{{"snr_db", "method", "condition", "papr", "cdf"}, {}};
    for (const auto& s : series) {
        const auto n = static_cast<double>(s.sorted_values.size());
        for (std::size_t i = 0; i < s.sorted_values.size(); ++i) {
            t.rows.push_back({fmt_double(s.snr_db), method_name(s.method), condition_name(s.nprs_present),
                              fmt_double(s.sorted_values[i]), fmt_double(static_cast<double>(i + 1) / n)});
        }
    }
    return t;
}

CsvTable PaprResult::decile_table() const
{
    CsvTable t{{"snr_db", "method", "condition", "decile", "papr"}, {}};
    for (const auto& s : series) {
        for (int q = 1; q <= 9; ++q) {
            t.rows.push_back({fmt_double(s.snr_db), method_name(s.method), condition_name(s.nprs_present),
                              fmt_double(q / 10.0), fmt_double(s.quantile(q / 10.0))});
        }
    }
    return t;
}

PaprResult run_papr_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    if (cfg.channel.name != ProfileName::Awgn) throw ConfigError("PAPR experiment requires the AWGN profile");
    const auto setup = SimulationSetup::build(cfg);
    const auto D = static_cast<std::size_t>(cfg.window_len);
    const auto trials = static_cast<std::size_t>(cfg.trials);

    PaprResult result;
    for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
        const double snr = cfg.snr_grid_db[si];
        // [condition][method][trial]
        std::vector<double> values[2][2];
        for (auto& c : values) {
            for (auto& m : c) m.assign(trials, 0.0);
        }
        parallel_for(trials, [&](std::size_t t) {
            const auto seeds = TrialSeeds::derive(cfg.master_seed, si, t);
            for (int present = 0; present < 2; ++present) {
                const auto y = simulate_received(cfg, setup, cfg.channel, snr, seeds, present == 1);
                const auto corr = cross_correlate(y, setup.reference, D);
                values[present][0][t] = papr_traditional(corr);
                values[present][1][t] = papr_acf_removed(corr, setup.acf);
            }
        });
        for (int present = 0; present < 2; ++present) {
            for (int m = 0; m < 2; ++m) {
                auto v = std::move(values[present][m]);
                std::sort(v.begin(), v.end());
                result.series.push_back({snr, m == 0 ? PaprMethod::Traditional : PaprMethod::AcfRemoved, present == 1, std::move(v)});
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Convergence

CsvTable ConvergenceResult::table() const
{
    CsvTable t{{"snr_db", "sweep", "mean_noise_var", "std_error", "trials"}, {}};
    for (std::size_t m = 0; m < mean_objective.size(); ++m) {
        t.rows.push_back({fmt_double(snr_db), std::to_string(m), fmt_double(mean_objective[m]), fmt_double(std_error[m]),
                          std::to_string(trials)});
    }
    return t;
}

std::vector<ConvergenceResult> run_convergence_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    const auto setup = SimulationSetup::build(cfg);
    const auto D = static_cast<std::size_t>(cfg.window_len);
    const auto trials = static_cast<std::size_t>(cfg.trials);
    SageParams sage = cfg.toa.sage;
    sage.sweeps = cfg.convergence_sweeps;
    const auto L0 = static_cast<std::size_t>(sage.initial_taps);
    const auto points = static_cast<std::size_t>(sage.sweeps) + 1;
    // Objective values are reported per reference-signal energy so that a converged fit reads
    // as the per-sample noise variance.
    const double scale = 1.0 / setup.reference.energy();

    std::vector<ConvergenceResult> out;
    for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
        const double snr = cfg.snr_grid_db[si];
        std::vector<std::vector<double>> per_trial(trials);
        parallel_for(trials, [&](std::size_t t) {
            const auto seeds = TrialSeeds::derive(cfg.master_seed, si, t);
            const auto y = simulate_received(cfg, setup, cfg.channel, snr, seeds, true);
            const auto corr = cross_correlate(y, setup.reference, D);
            SageTrace trace;
            run_sage(corr, setup.acf, std::min(L0, D), sage, std::nullopt, &trace);
            per_trial[t] = std::move(trace.objective);
        });

        ConvergenceResult r;
        r.snr_db = snr;
        r.trials = cfg.trials;
        r.mean_objective.assign(points, 0.0);
        r.std_error.assign(points, 0.0);
        std::size_t improved = 0;
        for (const auto& obj : per_trial) {
            // A one-tap run has no sweeps; repeat its only value.
            for (std::size_t m = 0; m < points; ++m) r.mean_objective[m] += scale * obj[std::min(m, obj.size() - 1)];
            if (obj.back() <= obj.front()) ++improved;
        }
        const auto n = static_cast<double>(trials);
        for (auto& v : r.mean_objective) v /= n;
        for (const auto& obj : per_trial) {
            for (std::size_t m = 0; m < points; ++m) {
                const double dev = scale * obj[std::min(m, obj.size() - 1)] - r.mean_objective[m];
                r.std_error[m] += dev * dev;
            }
        }
        for (auto& v : r.std_error) v = trials > 1 ? std::sqrt(v / (n - 1.0) / n) : 0.0;
        r.fraction_final_le_initial = static_cast<double>(improved) / n;
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Detection

int estimate_with(EstimatorKind kind, const Correlation& corr, const Acf& acf, const ExperimentConfig& cfg)
{
    switch (kind) {
    case EstimatorKind::Threshold: return threshold_toa(corr, cfg.eta2);
    case EstimatorKind::Ml: return ml_single_path(corr).delay;
    case EstimatorKind::Sage: return estimate_toa(corr, acf, cfg.toa).toa;
    }
    throw DomainError("unknown estimator");
}

std::vector<DetectionRecord> run_detection_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    const auto setup = SimulationSetup::build(cfg);
    const auto D = static_cast<std::size_t>(cfg.window_len);
    const auto trials = static_cast<std::size_t>(cfg.trials);
    const std::size_t n_est = cfg.estimators.size();

    std::vector<DetectionRecord> records;
    for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
        const double snr = cfg.snr_grid_db[si];
        std::vector<int> errors(trials * n_est, 0);
        parallel_for(trials, [&](std::size_t t) {
            const auto seeds = TrialSeeds::derive(cfg.master_seed, si, t);
            const auto y = simulate_received(cfg, setup, cfg.channel, snr, seeds, true);
            const auto corr = cross_correlate(y, setup.reference, D);
            for (std::size_t e = 0; e < n_est; ++e) {
                errors[t * n_est + e] = estimate_with(cfg.estimators[e], corr, setup.acf, cfg) - cfg.true_toa;
            }
        });
        for (std::size_t e = 0; e < n_est; ++e) {
            std::size_t exact = 0;
            std::size_t within = 0;
            for (std::size_t t = 0; t < trials; ++t) {
                const int err = errors[t * n_est + e];
                exact += err == 0 ? 1 : 0;
                within += std::abs(err) < 3 ? 1 : 0;
            }
            const auto n = static_cast<double>(trials);
            records.push_back({snr, cfg.estimators[e], static_cast<double>(exact) / n, static_cast<double>(within) / n, cfg.trials});
        }
    }
    return records;
}

CsvTable detection_table(const std::vector<DetectionRecord>& records)
{
    CsvTable t{{"snr_db", "estimator", "p_exact", "p_within3", "trials"}, {}};
    for (const auto& r : records) {
        t.rows.push_back({fmt_double(r.snr_db), to_string(r.estimator), fmt_double(r.p_exact), fmt_double(r.p_within3),
                          std::to_string(r.trials)});
    }
    return t;
}

const DetectionRecord& find_record(const std::vector<DetectionRecord>& records, double snr_db, EstimatorKind kind)
{
    for (const auto& r : records) {
        if (r.snr_db == snr_db && r.estimator == kind) return r;
    }
    throw DomainError("no detection record for " + to_string(kind) + " at " + fmt_double(snr_db) + " dB");
}

// ---------------------------------------------------------------------------
// Manifest

std::string code_version() { return NBTOA_VERSION; }

std::string sha256_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw IoError("sha256 init failed");
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const auto got = in.gcount();
        if (got > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    return to_hex(md, len);
}

std::filesystem::path write_manifest(const ExperimentConfig& cfg, const std::vector<std::filesystem::path>& results)
{
    std::filesystem::create_directories(cfg.output_dir);
    json files = json::array();
    for (const auto& p : results) {
        files.push_back({{"path", p.filename().string()}, {"sha256", sha256_file(p)}});
    }
    const json doc = {{"config", cfg}, {"master_seed", cfg.master_seed}, {"code_version", code_version()}, {"files", files}};
    const auto path = cfg.output_dir / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
    return path;
}

Manifest read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw IntegrityError("manifest " + path.string() + " is not valid JSON");
    Manifest m;
    try {
        m.config = doc.at("config").get<ExperimentConfig>();
        m.master_seed = doc.at("master_seed").get<std::uint64_t>();
        m.code_version = doc.at("code_version").get<std::string>();
        for (const auto& f : doc.at("files")) m.files.emplace_back(f.at("path").get<std::string>(), f.at("sha256").get<std::string>());
    } catch (const json::exception& e) {
        throw IntegrityError("manifest " + path.string() + " is malformed: " + e.what());
    }
    const auto dir = path.parent_path();
    for (const auto& [name, digest] : m.files) {
        const auto file = dir / name;
        if (!std::filesystem::exists(file)) throw IntegrityError("manifest lists missing file " + file.string());
        if (sha256_file(file) != digest) throw IntegrityError("checksum mismatch for " + file.string());
    }
    return m;
}

std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    std::filesystem::create_directories(cfg.output_dir);
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::filesystem::path> written;
    auto emit = [&](const CsvTable& t, const char* name) {
        const auto p = cfg.output_dir / name;
        t.write(p);
        written.push_back(p);
    };
    switch (cfg.experiment) {
    case ExperimentKind::PaprCdf: {
        const auto r = run_papr_experiment(cfg);
        emit(r.cdf_table(), "papr_cdf.csv");
        emit(r.decile_table(), "papr_deciles.csv");
        break;
    }
    case ExperimentKind::Convergence: {
        CsvTable all;
        for (const auto& r : run_convergence_experiment(cfg)) {
            auto t = r.table();
            all.header = t.header;
            all.rows.insert(all.rows.end(), t.rows.begin(), t.rows.end());
        }
        emit(all, "convergence.csv");
        break;
    }
    case ExperimentKind::Detection: emit(detection_table(run_detection_experiment(cfg)), "detection.csv"); break;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::clog << "[nbtoa] " << to_string(cfg.experiment) << ": " << cfg.trials << " trials x " << cfg.snr_grid_db.size()
              << " SNR points in " << fmt_double(secs) << " s\n";
    written.push_back(write_manifest(cfg, written));
    return written;
}

}  // namespace nbtoa
