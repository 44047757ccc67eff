#pragma once

#include "dcnn/data_io.hpp"
#include "dcnn/metrics.hpp"
#include "dcnn/training.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dcnn {

enum class ModelKind { dcnn, ked, kled, l1_logistic, l2_logistic };

std::string model_name(ModelKind model);
ModelKind parse_model(const std::string& name);
std::string loss_name(LossKind loss);
LossKind parse_loss(const std::string& name);
std::string nonlinearity_name(OutputNonlinearity output);
OutputNonlinearity parse_nonlinearity(const std::string& name);

struct ExperimentConfig {
    ModelKind model = ModelKind::dcnn;
    int hops = 2;      // diffusion breadth, DCNN only
    int trials = 10;
    std::uint64_t seed = 0;
    TrainConfig training;
    // Validation-selected hyperparameter grids for the baselines.
    std::vector<double> kernel_alpha_grid = {0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0};
    std::vector<double> logistic_lambda_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
};

struct TrialOutcome {
    int trial = 0;
    std::uint64_t seed = 0;
    Metrics metrics;
    int best_epoch = -1;                  // DCNN only
    double best_validation_error = -1.0;  // DCNN only
    bool stopped_early = false;
    std::vector<EpochStats> history;                 // DCNN only
    std::optional<double> selected_hyperparameter;   // baselines: alpha or lambda
};

struct TrialReport {
    std::string dataset;
    std::string task;
    std::string model;
    std::string protocol;  // "thirds" | "learning_curve"
    int hops = 0;
    double fraction = 1.0;  // learning-curve training fraction
    std::uint64_t seed = 0;
    int trials_requested = 0;
    int trials_failed = 0;
    std::vector<TrialOutcome> outcomes;   // completed trials, in trial order
    std::vector<std::string> failures;
    Metrics mean;                         // over completed trials
    std::optional<double> ci_accuracy;    // 95% Student-t half-widths, >= 2 trials
    std::optional<double> ci_micro_f1;
    std::optional<double> ci_macro_f1;

    int trials_completed() const { return static_cast<int>(outcomes.size()); }
};

/// True when any feature column varies across rows; constant (or absent)
/// features carry no signal and get replaced for experiments.
bool has_informative_features(const Graph& graph);
bool has_informative_features(const DatasetBundle& bundle);

/// Features actually fed to models. Informative features pass through raw.
/// Otherwise node/edge tasks get [1 | I_N] — the identity columns diffuse
/// into rows of P^j, making structure learnable — and graph tasks get a
/// single bias column (identity widths cannot stack across graphs).
Matrix experiment_features(const Graph& graph, TaskKind task);

/// Transductive multi-trial node classification: diffusion sees the whole
/// graph, each trial draws a fresh thirds split of the labeled nodes, and
/// only test labels stay hidden. Baseline hyperparameters are tuned on the
/// validation split, then the final predictor uses train+validation labels.
/// Per-trial errors are recorded in the report, not rethrown.
TrialReport run_node_trials(const DatasetBundle& bundle, const ExperimentConfig& config);

/// Graph classification via per-graph mean activations; same trial scheme
/// at graph granularity. Kernel models are node-task only and throw.
TrialReport run_graph_trials(const DatasetBundle& bundle, const ExperimentConfig& config);

/// One report per training fraction under the learning-curve protocol
/// (10% validation, 10% test, floor(fraction * remainder) training).
std::vector<TrialReport> run_learning_curve(const DatasetBundle& bundle,
                                            const ExperimentConfig& config,
                                            std::span<const double> fractions);

/// One report per diffusion breadth, sharing per-trial seeds across H so the
/// splits line up. DCNN only.
std::vector<TrialReport> hop_sweep(const DatasetBundle& bundle, const ExperimentConfig& config,
                                   std::span<const int> hop_values);

/// Deterministic serializations: identical config + seed give byte-identical
/// text. JSON schema "dcnn-report/1"; CSVs are flat with a header row.
std::string report_json(const TrialReport& report, const ExperimentConfig& config);
std::string trials_csv(const TrialReport& report);
std::string history_csv(const TrialReport& report);  // trial,epoch,train_loss,validation_error
std::string learning_curve_csv(std::span<const TrialReport> reports);  // row per (fraction, metric)
std::string hop_sweep_csv(std::span<const TrialReport> reports);       // row per H

}  // namespace dcnn
