// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "nbtoa/channel_sim.hpp"
#include "nbtoa/correlator.hpp"
#include "nbtoa/nprs_signal.hpp"
#include "nbtoa/toa_estimator.hpp"

namespace nbtoa {

enum class ExperimentKind { PaprCdf, Convergence, Detection };
enum class EstimatorKind { Threshold, Ml, Sage };

std::string to_string(ExperimentKind kind);
std::string to_string(EstimatorKind kind);
ExperimentKind parse_experiment_kind(const std::string& text);
EstimatorKind parse_estimator_kind(const std::string& text);

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Detection;
    ChannelProfile channel;
    std::vector<double> snr_grid_db = {0.0};
    int trials = 2000;
    int true_toa = 50;
    std::uint64_t master_seed = 1;
    double sampling_rate_hz = kReferenceRateHz;
    int window_len = 120;  ///< D
    int cell_id_shift = 0;
    std::uint64_t nprs_seed = 1;
    double eta2 = 0.5;
    std::vector<EstimatorKind> estimators = {EstimatorKind::Threshold, EstimatorKind::Ml, EstimatorKind::Sage};
    ToaParams toa;
    int convergence_sweeps = 16;
    std::filesystem::path output_dir = "results";

    /// Config for `kind` at 1.92 MHz with the built-in `profile`.
    static ExperimentConfig defaults(ExperimentKind kind, ProfileName profile);
    void validate() const;
    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);

/// Parses a JSON config, applying `key=value` overrides first. Keys are dotted paths
/// (e.g. `toa.sage.sweeps=16`); values are parsed as JSON, falling back to a plain string.
ExperimentConfig parse_config(const nlohmann::json& j, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Reference signal, its ACF and the received-buffer geometry shared by every trial.
struct SimulationSetup {
    SampleBuffer reference;
    Acf acf;
    double sigma_s_sq = 0.0;
    std::size_t received_len = 0;

    static SimulationSetup build(const ExperimentConfig& cfg);
};

/// Seeds for one trial. The channel draw depends only on (master, trial) so every SNR point and
/// estimator sees the same fading; the noise additionally depends on the SNR index.
struct TrialSeeds {
    std::uint64_t channel = 0;
    std::uint64_t noise = 0;
    static TrialSeeds derive(std::uint64_t master_seed, std::size_t snr_index, std::size_t trial);
};

/// Received samples for one trial; `nprs_present = false` yields noise only.
SampleBuffer simulate_received(const ExperimentConfig& cfg, const SimulationSetup& setup, const ChannelProfile& profile,
                               double snr_db, const TrialSeeds& seeds, bool nprs_present);

/// Runs `body(i)` for i in [0, count) on a worker pool. Worker count comes from NBTOA_WORKERS,
/// else the hardware concurrency.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);
std::size_t worker_count();

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const;
    void write(const std::filesystem::path& path) const;
};

// --- PAPR CDFs --------------------------------------------------------------

struct PaprSeries {
    double snr_db = 0.0;
    PaprMethod method = PaprMethod::Traditional;
    bool nprs_present = false;
    std::vector<double> sorted_values;

    /// Empirical quantile at p in (0, 1], nearest-rank.
    double quantile(double p) const;
};

struct PaprResult {
    std::vector<PaprSeries> series;
    const PaprSeries& find(double snr_db, PaprMethod method, bool nprs_present) const;
    CsvTable cdf_table() const;
    CsvTable decile_table() const;
};

PaprResult run_papr_experiment(const ExperimentConfig& cfg);

// --- SAGE convergence -------------------------------------------------------

struct ConvergenceResult {
    double snr_db = 0.0;
    std::vector<double> mean_objective;   ///< index m = sweep, 0 = after initialization
    std::vector<double> std_error;
    double fraction_final_le_initial = 0.0;
    int trials = 0;

    CsvTable table() const;
};

std::vector<ConvergenceResult> run_convergence_experiment(const ExperimentConfig& cfg);

// --- Detection probability --------------------------------------------------

struct DetectionRecord {
    double snr_db = 0.0;
    EstimatorKind estimator = EstimatorKind::Sage;
    double p_exact = 0.0;
    double p_within3 = 0.0;
    int trials = 0;
};

/// ToA decision of one estimator on a correlation trace.
int estimate_with(EstimatorKind kind, const Correlation& corr, const Acf& acf, const ExperimentConfig& cfg);

std::vector<DetectionRecord> run_detection_experiment(const ExperimentConfig& cfg);
CsvTable detection_table(const std::vector<DetectionRecord>& records);
const DetectionRecord& find_record(const std::vector<DetectionRecord>& records, double snr_db, EstimatorKind kind);

// --- Manifest ---------------------------------------------------------------

struct Manifest {
    ExperimentConfig config;
    std::uint64_t master_seed = 0;
    std::string code_version;
    std::vector<std::pair<std::string, std::string>> files;  ///< (file name relative to manifest, sha256 hex)
};

std::string sha256_file(const std::filesystem::path& path);
std::string code_version();

/// Writes manifest.json in cfg.output_dir listing every result file with its checksum.
std::filesystem::path write_manifest(const ExperimentConfig& cfg, const std::vector<std::filesystem::path>& results);
/// Parses a manifest and re-verifies every checksum; throws IntegrityError on mismatch.
Manifest read_manifest(const std::filesystem::path& path);

/// Runs the configured experiment, writes its CSV files and the manifest; returns written paths
/// (manifest last).
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg);

}  // namespace nbtoa
