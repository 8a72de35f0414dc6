#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgc/classifier.hpp"
#include "sgc/dataset.hpp"
#include "sgc/error.hpp"
#include "sgc/propagation.hpp"
#include "sgc/spectral.hpp"

namespace sgc {

struct SpectrumOptions {
    double gamma = 1.0;
    double tol = 1e-8;
    std::vector<PropagationKind> kinds = {PropagationKind::AugNormalizedAdjacency,
                                          PropagationKind::NormalizedAdjacency,
                                          PropagationKind::FirstOrderCheby};
    std::vector<int> k_values = {1, 2, 3, 4, 5, 6};
    // When set, fourier.csv holds the graph Fourier coefficients of this
    // feature column in the augmented Laplacian basis (dense path only).
    std::optional<std::size_t> fourier_feature_column;
    std::size_t dense_cap = 4096;
};

struct AblationOptions {
    std::vector<PropagationKind> kinds = {
        PropagationKind::NormalizedAdjacency, PropagationKind::RandomWalk,
        PropagationKind::AugNormalizedAdjacency, PropagationKind::AugRandomWalk,
        PropagationKind::FirstOrderCheby};
    std::vector<int> k_values = {2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<std::size_t> per_class = {1, 5, 10, 20, 40, 80};
    std::size_t n_repeats = 10;
};

struct BenchOptions {
    std::size_t warmup = 1;
    std::size_t trials = 5;
};

struct ExperimentConfig {
    std::filesystem::path dataset_dir;
    std::filesystem::path output_dir;  // empty: compute without writing files
    PropagationSpec propagation;
    NormalizationMode normalization = NormalizationMode::RowL1;
    TrainOptions train;
    bool bias = false;  // append a constant-1 column to the propagated features
    std::optional<std::vector<double>> sweep;
    std::uint64_t seed = 0;  // random-split ablations only
    SpectrumOptions spectrum;
    AblationOptions ablation;
    BenchOptions bench_opts;
};

// Strict schema: unknown keys anywhere are a ConfigError, as are
// out-of-domain values. config_to_json materializes every field, so the
// snapshot embedded in results is complete and key-sorted.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

// The canonical tuning grid: 20 log-spaced weight decays over [1e-7, 1e-2].
std::vector<double> default_weight_decay_grid();

struct RunResult {
    nlohmann::json config_snapshot;
    double val_accuracy = 0.0;
    double test_accuracy = 0.0;
    double micro_f1 = 0.0;  // on the test mask
    double precompute_seconds = 0.0;  // build_propagation + propagate
    double train_seconds = 0.0;
    std::size_t epochs_run = 0;

    nlohmann::json to_json() const;
    static RunResult from_json(const nlohmann::json& j);
};

// Equality of everything except the timing fields.
bool same_metrics(const RunResult& a, const RunResult& b);

// load -> normalize -> build_propagation -> propagate -> train -> evaluate.
// Writes result.json and model.bin into output_dir unless it is empty.
RunResult run_experiment(const ExperimentConfig& config);

struct SweepOutcome {
    RunResult best;
    double best_weight_decay = 0.0;
    std::vector<RunResult> table;  // one entry per grid value, in grid order
};

// One training per grid value over a shared propagated matrix; selection by
// validation accuracy, ties toward the smaller weight decay.
SweepOutcome sweep_weight_decay(const ExperimentConfig& config,
                                std::span<const double> grid);

struct AblationRow {
    PropagationKind kind;
    int K = 0;
    double weight_decay = 0.0;
    double val_accuracy = 0.0;
    std::string error;  // error type name when the cell failed, else empty
};

// Tuned validation accuracy per (kind, K); failing cells (for example an
// un-augmented kind on a graph with isolated nodes) record the error instead
// of aborting the table.
std::vector<AblationRow> ablate_propagation(const ExperimentConfig& config,
                                            std::span<const PropagationKind> kinds,
                                            std::span<const int> k_values);

struct DataAmountRow {
    std::size_t per_class = 0;
    std::size_t n_repeats = 0;
    double mean_val_accuracy = 0.0;
    double std_val_accuracy = 0.0;
};

// Mean validation accuracy over n_repeats balanced random training splits
// (seeds config.seed .. config.seed + n_repeats - 1), val/test masks fixed.
std::vector<DataAmountRow> ablate_data_amount(const ExperimentConfig& config,
                                              std::span<const std::size_t> per_class_list,
                                              std::size_t n_repeats);

struct SpectrumArtifacts {
    SpectrumReport report;
    std::vector<FilterCurve> curves;
    std::vector<std::pair<double, double>> fourier;  // (lambda_i, x_hat_i)
};

// Writes spectrum.csv, filter_curve.csv and (when a feature column is
// configured and the dense path applies) fourier.csv into output_dir.
SpectrumArtifacts spectrum_report(const ExperimentConfig& config);

struct BenchReport {
    double precompute_seconds = 0.0;  // medians over the measured trials
    double train_seconds = 0.0;
    double total_seconds = 0.0;
    std::size_t warmup = 0;
    std::size_t trials = 0;

    nlohmann::json to_json() const;
};

BenchReport bench(const ExperimentConfig& config, std::size_t n_warmup,
                  std::size_t n_trials);

// Short class name of a library error ("IsolatedNodeError", ...); used when
// a table row records a failure.
std::string error_name(const Error& e);

// Temp-file-plus-rename write used for every emitted artifact.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string format_double(double v);  // shortest round-trip decimal form

}  // namespace sgc
