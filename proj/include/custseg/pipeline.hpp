#pragma once

// End-to-end orchestration: ingest, preprocess, the four feature methods,
// clustering, evaluation, and artifact emission.

#include "custseg/cluster.hpp"
#include "custseg/dtw.hpp"
#include "custseg/features.hpp"
#include "custseg/ingest.hpp"
#include "custseg/rfm.hpp"
#include "custseg/seq2seq.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace custseg {

inline constexpr std::string_view kVersion = "0.1.0";

struct DataPaths {
    std::filesystem::path transactions;
    std::filesystem::path customers;
    std::filesystem::path labels;  // optional planted labels
};

struct ClusterSettings {
    std::size_t k_min = 2;
    std::size_t k_max = 6;
    std::size_t elbow_min = 1;
    std::size_t elbow_max = 8;
    std::size_t restarts = 10;
};

struct PipelineConfig {
    std::optional<DataPaths> data;  // absent: synthetic data
    SynthConfig synth;              // seed is derived from `seed`
    bool normalize = true;          // z-score sequences before training
    DtwConfig dtw;
    RfmOptions rfm;
    bool rfm_scores = true;         // cluster on quintile scores, else raw values
    TrainConfig train;              // seed is derived from `seed`
    HybridSpec hybrid;
    ClusterSettings cluster;
    std::vector<std::string> methods{"lstm", "dtw", "rfm", "hybrid"};
    std::uint64_t seed = 7;
    std::filesystem::path out = "out";
    unsigned threads = 0;
};

/// Strict JSON reader: unknown keys and malformed values raise ConfigError.
/// Relative data paths resolve against `base`.
PipelineConfig parse_pipeline_config(std::string_view json_text, const std::filesystem::path& base = {});
std::string pipeline_config_to_json(const PipelineConfig& config);

/// seed + FNV-1a-64(stage), modulo 2^64.
std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage);

/// Shape checks that need no data.
void validate(const PipelineConfig& config);
/// Checks against the loaded data: k range within [2, N - 1], elbow range
/// within [1, N], latent_dim < max_len when the LSTM is used.
void validate(const PipelineConfig& config, const Dataset& dataset);

std::vector<std::size_t> k_values(std::size_t lo, std::size_t hi);
/// "2..6" or "4".
std::pair<std::size_t, std::size_t> parse_k_range(std::string_view text);
std::vector<std::string> parse_methods(std::string_view comma_list);

struct LoadedData {
    Dataset dataset;
    std::optional<std::vector<int>> labels;  // aligned with dataset.customers
    std::vector<TransactionRecord> transactions;
    bool synthetic = false;
};

LoadedData load_data(const PipelineConfig& config);

/// Feature matrices keyed by method name, plus the stage outputs needed to
/// write artifacts.
struct FeatureBundle {
    std::map<std::string, FeatureMatrix> features;
    std::optional<DistanceMatrix> dtw;
    std::optional<TrainResult> training;
    std::vector<RfmRaw> rfm_raw;
    std::vector<RfmScore> rfm_scores;
    std::optional<HybridResult> hybrid;
};

/// Matrix clustered for a method: hybrid as assembled, every other method
/// column z-scored.
Matrix clustering_input(const FeatureMatrix& features);

struct ArtifactEntry {
    std::string file;    // relative to the output directory
    std::string sha256;  // hex digest of the file contents
    std::uintmax_t bytes = 0;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct RunManifest {
    std::string version{kVersion};
    std::uint64_t seed = 0;
    std::string config_json;
    std::vector<StageTiming> stages;
    std::vector<ArtifactEntry> artifacts;
    std::map<std::string, std::size_t> elbow_k;  // per method
    std::string headline_method;
    bool failed = false;
    std::string failed_stage;
    std::string error;
};

/// Runs every stage, writing artifacts under config.out. On a stage failure
/// the manifest is still written (status FAILED, partial artifact list) and
/// StageError is thrown. Configuration problems raise ConfigError before
/// anything is written.
RunManifest run_pipeline(const PipelineConfig& config);

std::string sha256_hex(std::string_view bytes);
/// Lists every regular file under `dir` except manifest.json, sorted.
std::vector<ArtifactEntry> scan_artifacts(const std::filesystem::path& dir);
std::string manifest_to_json(const RunManifest& manifest);

// ---------------------------------------------------------------------------
// Reports

/// Wide layout: k, then SC and DBI per method, 3 decimals; missing cells empty.
std::string metrics_to_csv(const MetricsReport& report);
/// Full-precision cells plus the best k per method and index.
std::string metrics_to_json(const MetricsReport& report);
/// Human-readable grid: one column pair per method, one row per k. The best
/// cell per method (max SC, min DBI) is marked with '*'; missing cells show
/// a dash and a numbered note with the reason.
std::string format_report(const MetricsReport& report);

struct BestCells {
    std::optional<std::size_t> silhouette_k;
    std::optional<std::size_t> davies_bouldin_k;
};
BestCells best_cells(const MetricsReport& report, const std::string& method);

/// Writes report.txt, metrics.csv and metrics.json into `dir`.
void emit_report(const RunManifest& manifest, const MetricsReport& metrics, const std::filesystem::path& dir);

std::string assignments_to_csv(const std::vector<std::string>& customer_ids, const std::vector<std::size_t>& clusters);
std::string elbow_to_csv(const std::map<std::string, ElbowResult>& elbows);

}  // namespace custseg
