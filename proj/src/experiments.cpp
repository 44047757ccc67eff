#include "dcnn/experiments.hpp"

#include "dcnn/baselines.hpp"
#include "dcnn/model.hpp"
#include "dcnn/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dcnn {

std::string model_name(ModelKind model) {
    switch (model) {
        case ModelKind::dcnn: return "dcnn";
        case ModelKind::ked: return "ked";
        case ModelKind::kled: return "kled";
        case ModelKind::l1_logistic: return "l1logistic";
        case ModelKind::l2_logistic: return "l2logistic";
    }
    throw std::logic_error("model_name: unknown model");
}

ModelKind parse_model(const std::string& name) {
    if (name == "dcnn") return ModelKind::dcnn;
    if (name == "ked") return ModelKind::ked;
    if (name == "kled") return ModelKind::kled;
    if (name == "l1logistic") return ModelKind::l1_logistic;
    if (name == "l2logistic") return ModelKind::l2_logistic;
    throw std::invalid_argument("unknown model '" + name +
                                "' (expected dcnn|ked|kled|l1logistic|l2logistic)");
}

std::string loss_name(LossKind loss) {
    switch (loss) {
        case LossKind::hinge: return "hinge";
        case LossKind::hinge_one_vs_all: return "hinge_ova";
        case LossKind::cross_entropy: return "cross_entropy";
    }
    throw std::logic_error("loss_name: unknown loss");
}

LossKind parse_loss(const std::string& name) {
    if (name == "hinge") return LossKind::hinge;
    if (name == "hinge_ova") return LossKind::hinge_one_vs_all;
    if (name == "cross_entropy") return LossKind::cross_entropy;
    throw std::invalid_argument("unknown loss '" + name +
                                "' (expected hinge|hinge_ova|cross_entropy)");
}

std::string nonlinearity_name(OutputNonlinearity output) {
    return output == OutputNonlinearity::tanh ? "tanh" : "none";
}

OutputNonlinearity parse_nonlinearity(const std::string& name) {
    if (name == "none") return OutputNonlinearity::none;
    if (name == "tanh") return OutputNonlinearity::tanh;
    throw std::invalid_argument("unknown output nonlinearity '" + name +
                                "' (expected none|tanh)");
}

bool has_informative_features(const Graph& graph) {
    const Matrix& x = graph.features();
    for (long c = 0; c < x.cols(); ++c)
        for (long i = 1; i < x.rows(); ++i)
            if (x(i, c) != x(0, c)) return true;
    return false;
}

bool has_informative_features(const DatasetBundle& bundle) {
    if (bundle.graphs.empty() || bundle.graphs.front().num_features() == 0) return false;
    const Matrix& first = bundle.graphs.front().features();
    if (first.rows() == 0) return false;
    for (const Graph& g : bundle.graphs) {
        const Matrix& x = g.features();
        for (long c = 0; c < x.cols(); ++c)
            for (long i = 0; i < x.rows(); ++i)
                if (x(i, c) != first(0, c)) return true;
    }
    return false;
}

Matrix experiment_features(const Graph& graph, TaskKind task) {
    if (has_informative_features(graph)) return graph.features();
    const int n = graph.num_nodes();
    if (task == TaskKind::graph) return Matrix::Ones(n, 1);
    Matrix x(n, n + 1);
    x.col(0).setOnes();
    x.rightCols(n) = Matrix::Identity(n, n);
    return x;
}

namespace {

// Task-agnostic trial inputs: entities are nodes (node/edge tasks) or whole
// graphs, each with one label and one row per diffusion slice.
struct EntitySetup {
    std::vector<int> population;  // entity ids carrying labels
    IntVector labels;             // indexed by entity id; -1 = unlabeled
    int num_classes = 0;
    DiffusedFeatures diffused;          // DCNN representations
    Matrix raw_features;                // logistic representations
    std::vector<KernelMatrix> kernels;  // one per alpha in the grid
};

bool is_kernel(ModelKind m) { return m == ModelKind::ked || m == ModelKind::kled; }
bool is_logistic(ModelKind m) {
    return m == ModelKind::l1_logistic || m == ModelKind::l2_logistic;
}

EntitySetup setup_node_task(const DatasetBundle& bundle, const ExperimentConfig& config) {
    if (bundle.graphs.size() != 1)
        throw std::invalid_argument("node trials need a bundle with exactly one graph");
    const Graph& graph = bundle.graphs.front();

    EntitySetup s;
    s.num_classes = bundle.num_classes;
    s.labels = graph.labels();
    for (int i = 0; i < graph.num_nodes(); ++i)
        if (s.labels[i] >= 0) s.population.push_back(i);
    if (s.population.size() < 3)
        throw std::invalid_argument("node trials need at least three labeled nodes");

    const Matrix x = experiment_features(graph, bundle.task);
    if (config.model == ModelKind::dcnn) {
        s.diffused = diffuse_features(build_transition(graph), x, config.hops);
    } else if (is_logistic(config.model)) {
        s.raw_features = x;
    } else {
        s.kernels.reserve(config.kernel_alpha_grid.size());
        for (double alpha : config.kernel_alpha_grid)
            s.kernels.push_back(config.model == ModelKind::ked
                                    ? exponential_diffusion_kernel(graph, alpha)
                                    : laplacian_diffusion_kernel(graph, alpha));
    }
    return s;
}

EntitySetup setup_graph_task(const DatasetBundle& bundle, const ExperimentConfig& config) {
    if (is_kernel(config.model))
        throw std::invalid_argument("kernel baselines apply to node tasks only");
    const int num_graphs = static_cast<int>(bundle.graphs.size());
    if (num_graphs < 3)
        throw std::invalid_argument("graph trials need at least three graphs");

    EntitySetup s;
    s.num_classes = bundle.num_classes;
    s.labels.resize(num_graphs);
    for (int t = 0; t < num_graphs; ++t) s.labels[t] = bundle.graph_labels[t];
    s.population.resize(num_graphs);
    for (int t = 0; t < num_graphs; ++t) s.population[t] = t;

    const bool informative = has_informative_features(bundle);
    const int hops = config.model == ModelKind::dcnn ? config.hops : 0;
    const int width = informative ? bundle.graphs.front().num_features() : 1;

    // Row t of slice j is the node-mean of P^j X for graph t: the graph-level
    // representation averages before any nonlinearity, so it slots straight
    // into the node-entity machinery.
    s.diffused.num_nodes = num_graphs;
    s.diffused.num_hops = hops;
    s.diffused.num_features = width;
    for (int j = 0; j <= hops; ++j) s.diffused.slices.emplace_back(num_graphs, width);
    for (int t = 0; t < num_graphs; ++t) {
        const Graph& graph = bundle.graphs[t];
        Matrix x;
        if (informative)
            x = graph.features();
        else
            x = Matrix::Ones(graph.num_nodes(), 1);
        const DiffusedFeatures d = diffuse_features(build_transition(graph), x, hops);
        for (int j = 0; j <= hops; ++j)
            s.diffused.slices[j].row(t) = d.slices[j].colwise().mean();
    }
    if (is_logistic(config.model)) s.raw_features = s.diffused.slices[0];
    return s;
}

std::vector<int> map_ids(const std::vector<int>& population, std::span<const int> positions) {
    std::vector<int> ids;
    ids.reserve(positions.size());
    for (int p : positions) ids.push_back(population[p]);
    return ids;
}

std::vector<int> gather_labels(const IntVector& labels, std::span<const int> ids) {
    std::vector<int> out;
    out.reserve(ids.size());
    for (int i : ids) out.push_back(labels[i]);
    return out;
}

Matrix gather_rows(const Matrix& x, std::span<const int> ids) {
    Matrix out(static_cast<long>(ids.size()), x.cols());
    for (std::size_t r = 0; r < ids.size(); ++r) out.row(static_cast<long>(r)) = x.row(ids[r]);
    return out;
}

double subset_accuracy(std::span<const int> predictions, std::span<const int> truth) {
    long correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == truth[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

Metrics checked_metrics(std::span<const int> predictions, std::span<const int> truth,
                        int num_classes) {
    const Metrics m = evaluate_metrics(predictions, truth, num_classes);
    // Identity for single-label prediction; a violation means a metrics bug.
    if (std::abs(m.micro_f1 - m.accuracy) >= 1e-12)
        throw std::logic_error("micro-F1 diverged from accuracy on a single-label run");
    return m;
}

TrialOutcome run_single_trial(const EntitySetup& s, const ExperimentConfig& config, int trial,
                              SplitProtocol protocol, double fraction) {
    const std::uint64_t trial_seed = derive_seed(config.seed, trial);
    const SplitSpec split = make_splits(static_cast<int>(s.population.size()), protocol,
                                        derive_seed(trial_seed, 0), fraction);
    const std::vector<int> train_ids = map_ids(s.population, split.train);
    const std::vector<int> val_ids = map_ids(s.population, split.validation);
    const std::vector<int> test_ids = map_ids(s.population, split.test);
    const std::vector<int> truth = gather_labels(s.labels, test_ids);

    TrialOutcome outcome;
    outcome.trial = trial;
    outcome.seed = trial_seed;

    std::vector<int> predictions;
    if (config.model == ModelKind::dcnn) {
        TrainConfig tc = config.training;
        tc.rng_seed = derive_seed(trial_seed, 1);
        const TrainResult result =
            train(s.diffused, s.labels, train_ids, val_ids, s.num_classes, tc);
        const DiffusedFeatures test_entities = gather(s.diffused, test_ids);
        predictions = predict_hard(class_scores(node_activations(test_entities, result.params),
                                                result.params, tc.output_nonlinearity));
        outcome.best_epoch = result.best_epoch;
        outcome.best_validation_error = result.best_validation_error;
        outcome.stopped_early = result.stopped_early;
        outcome.history = result.history;
    } else if (is_kernel(config.model)) {
        const std::vector<int> val_truth = gather_labels(s.labels, val_ids);
        std::size_t best = 0;
        double best_accuracy = -1.0;
        for (std::size_t k = 0; k < s.kernels.size(); ++k) {
            const std::vector<int> val_preds =
                kernel_classify(s.kernels[k], s.labels, train_ids, val_ids, s.num_classes);
            const double acc = subset_accuracy(val_preds, val_truth);
            if (acc > best_accuracy) {
                best_accuracy = acc;
                best = k;
            }
        }
        std::vector<int> voters = train_ids;
        voters.insert(voters.end(), val_ids.begin(), val_ids.end());
        predictions = kernel_classify(s.kernels[best], s.labels, voters, test_ids, s.num_classes);
        outcome.selected_hyperparameter = s.kernels[best].alpha;
    } else {
        const Penalty penalty =
            config.model == ModelKind::l1_logistic ? Penalty::l1 : Penalty::l2;
        const Matrix train_x = gather_rows(s.raw_features, train_ids);
        const std::vector<int> train_y = gather_labels(s.labels, train_ids);
        const Matrix val_x = gather_rows(s.raw_features, val_ids);
        const std::vector<int> val_truth = gather_labels(s.labels, val_ids);

        double best_lambda = config.logistic_lambda_grid.at(0);
        double best_accuracy = -1.0;
        for (double lambda : config.logistic_lambda_grid) {
            const LogisticModel model =
                logistic_train(train_x, train_y, s.num_classes, penalty, lambda);
            const double acc = subset_accuracy(logistic_predict(model, val_x), val_truth);
            if (acc > best_accuracy) {
                best_accuracy = acc;
                best_lambda = lambda;
            }
        }
        std::vector<int> refit_ids = train_ids;
        refit_ids.insert(refit_ids.end(), val_ids.begin(), val_ids.end());
        const LogisticModel model =
            logistic_train(gather_rows(s.raw_features, refit_ids),
                           gather_labels(s.labels, refit_ids), s.num_classes, penalty,
                           best_lambda);
        predictions = logistic_predict(model, gather_rows(s.raw_features, test_ids));
        outcome.selected_hyperparameter = best_lambda;
    }

    outcome.metrics = checked_metrics(predictions, truth, s.num_classes);
    return outcome;
}

TrialReport run_trials(const DatasetBundle& bundle, const ExperimentConfig& config,
                       SplitProtocol protocol, double fraction) {
    validate_bundle(bundle);
    if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (config.hops < 0) throw std::invalid_argument("hops must be >= 0");

    const EntitySetup setup = bundle.task == TaskKind::graph
                                  ? setup_graph_task(bundle, config)
                                  : setup_node_task(bundle, config);

    TrialReport report;
    report.dataset = bundle.name;
    report.task = task_name(bundle.task);
    report.model = model_name(config.model);
    report.protocol = protocol == SplitProtocol::thirds ? "thirds" : "learning_curve";
    report.hops = config.model == ModelKind::dcnn ? config.hops : 0;
    report.fraction = fraction;
    report.seed = config.seed;
    report.trials_requested = config.trials;

    for (int trial = 0; trial < config.trials; ++trial) {
        try {
            report.outcomes.push_back(run_single_trial(setup, config, trial, protocol, fraction));
        } catch (const std::exception& e) {
            ++report.trials_failed;
            report.failures.push_back("trial " + std::to_string(trial) + ": " + e.what());
        }
    }

    std::vector<double> acc, micro, macro;
    for (const TrialOutcome& o : report.outcomes) {
        acc.push_back(o.metrics.accuracy);
        micro.push_back(o.metrics.micro_f1);
        macro.push_back(o.metrics.macro_f1);
    }
    auto mean_of = [](const std::vector<double>& v) {
        if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    report.mean.accuracy = mean_of(acc);
    report.mean.micro_f1 = mean_of(micro);
    report.mean.macro_f1 = mean_of(macro);
    report.ci_accuracy = confidence_half_width(acc);
    report.ci_micro_f1 = confidence_half_width(micro);
    report.ci_macro_f1 = confidence_half_width(macro);
    return report;
}

}  // namespace

TrialReport run_node_trials(const DatasetBundle& bundle, const ExperimentConfig& config) {
    if (bundle.task == TaskKind::graph)
        throw std::invalid_argument("run_node_trials: bundle holds a graph task");
    return run_trials(bundle, config, SplitProtocol::thirds, 1.0);
}

TrialReport run_graph_trials(const DatasetBundle& bundle, const ExperimentConfig& config) {
    if (bundle.task != TaskKind::graph)
        throw std::invalid_argument("run_graph_trials: bundle does not hold a graph task");
    return run_trials(bundle, config, SplitProtocol::thirds, 1.0);
}

std::vector<TrialReport> run_learning_curve(const DatasetBundle& bundle,
                                            const ExperimentConfig& config,
                                            std::span<const double> fractions) {
    if (fractions.empty()) throw std::invalid_argument("run_learning_curve: no fractions");
    std::vector<TrialReport> reports;
    reports.reserve(fractions.size());
    for (double f : fractions)
        reports.push_back(run_trials(bundle, config, SplitProtocol::learning_curve, f));
    return reports;
}

std::vector<TrialReport> hop_sweep(const DatasetBundle& bundle, const ExperimentConfig& config,
                                   std::span<const int> hop_values) {
    if (hop_values.empty()) throw std::invalid_argument("hop_sweep: no hop values");
    if (config.model != ModelKind::dcnn)
        throw std::invalid_argument("hop_sweep: only the dcnn model has a hop parameter");
    std::vector<TrialReport> reports;
    reports.reserve(hop_values.size());
    for (int h : hop_values) {
        if (h < 0) throw std::invalid_argument("hop_sweep: hops must be >= 0");
        ExperimentConfig c = config;
        c.hops = h;
        reports.push_back(run_trials(bundle, c, SplitProtocol::thirds, 1.0));
    }
    return reports;
}

namespace {

nlohmann::ordered_json json_or_null(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

nlohmann::ordered_json json_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

}  // namespace

std::string report_json(const TrialReport& report, const ExperimentConfig& config) {
    nlohmann::ordered_json j;
    j["schema"] = "dcnn-report/1";
    j["dataset"] = report.dataset;
    j["task"] = report.task;
    j["model"] = report.model;
    j["protocol"] = report.protocol;
    j["fraction"] = report.fraction;
    j["hops"] = report.hops;
    j["seed"] = report.seed;

    nlohmann::ordered_json cfg;
    cfg["trials"] = config.trials;
    cfg["training"] = {{"learning_rate", config.training.learning_rate},
                       {"init_std", config.training.init_std},
                       {"batch_size", config.training.batch_size},
                       {"max_epochs", config.training.max_epochs},
                       {"early_stop_window", config.training.early_stop_window},
                       {"hinge_margin", config.training.hinge_margin},
                       {"adagrad_epsilon", config.training.adagrad_epsilon},
                       {"loss", loss_name(config.training.loss)},
                       {"output_nonlinearity", nonlinearity_name(config.training.output_nonlinearity)}};
    cfg["kernel_alpha_grid"] = config.kernel_alpha_grid;
    cfg["logistic_lambda_grid"] = config.logistic_lambda_grid;
    j["config"] = cfg;

    j["trials"] = {{"requested", report.trials_requested},
                   {"completed", report.trials_completed()},
                   {"failed", report.trials_failed}};

    nlohmann::ordered_json per_trial = nlohmann::ordered_json::array();
    for (const TrialOutcome& o : report.outcomes) {
        nlohmann::ordered_json t;
        t["trial"] = o.trial;
        t["seed"] = o.seed;
        t["accuracy"] = o.metrics.accuracy;
        t["micro_f1"] = o.metrics.micro_f1;
        t["macro_f1"] = o.metrics.macro_f1;
        if (report.model == "dcnn") {
            t["best_epoch"] = o.best_epoch;
            t["best_validation_error"] = o.best_validation_error;
            t["stopped_early"] = o.stopped_early;
            t["epochs_run"] = o.history.size();
        } else {
            t["selected_hyperparameter"] = json_or_null(o.selected_hyperparameter);
        }
        per_trial.push_back(std::move(t));
    }
    j["per_trial"] = std::move(per_trial);
    j["failures"] = report.failures;

    j["summary"] = {{"mean_accuracy", json_or_null(report.mean.accuracy)},
                    {"mean_micro_f1", json_or_null(report.mean.micro_f1)},
                    {"mean_macro_f1", json_or_null(report.mean.macro_f1)},
                    {"ci95_accuracy", json_or_null(report.ci_accuracy)},
                    {"ci95_micro_f1", json_or_null(report.ci_micro_f1)},
                    {"ci95_macro_f1", json_or_null(report.ci_macro_f1)}};
    return j.dump(2) + "\n";
}

std::string trials_csv(const TrialReport& report) {
    std::string out =
        "trial,seed,accuracy,micro_f1,macro_f1,best_epoch,best_validation_error,"
        "stopped_early,selected_hyperparameter\n";
    for (const TrialOutcome& o : report.outcomes) {
        out += std::to_string(o.trial) + ',' + std::to_string(o.seed) + ',' +
               format_double(o.metrics.accuracy) + ',' + format_double(o.metrics.micro_f1) +
               ',' + format_double(o.metrics.macro_f1) + ',';
        if (report.model == "dcnn") {
            out += std::to_string(o.best_epoch) + ',' +
                   format_double(o.best_validation_error) + ',' +
                   (o.stopped_early ? "1" : "0") + ',';
        } else {
            out += ",,,";
            if (o.selected_hyperparameter) out += format_double(*o.selected_hyperparameter);
        }
        out += '\n';
    }
    return out;
}

std::string history_csv(const TrialReport& report) {
    std::string out = "trial,epoch,train_loss,validation_error\n";
    for (const TrialOutcome& o : report.outcomes)
        for (const EpochStats& e : o.history)
            out += std::to_string(o.trial) + ',' + std::to_string(e.epoch) + ',' +
                   format_double(e.train_loss) + ',' + format_double(e.validation_error) + '\n';
    return out;
}

namespace {

void append_metric_row(std::string& out, const std::string& prefix, const char* metric,
                       double mean, const std::optional<double>& ci, int trials) {
    out += prefix + ',' + metric + ',' + (std::isnan(mean) ? "" : format_double(mean)) + ',' +
           (ci ? format_double(*ci) : "") + ',' + std::to_string(trials) + '\n';
}

}  // namespace

std::string learning_curve_csv(std::span<const TrialReport> reports) {
    std::string out = "fraction,metric,mean,ci95_half_width,trials\n";
    for (const TrialReport& r : reports) {
        const std::string f = format_double(r.fraction);
        append_metric_row(out, f, "accuracy", r.mean.accuracy, r.ci_accuracy,
                          r.trials_completed());
        append_metric_row(out, f, "micro_f1", r.mean.micro_f1, r.ci_micro_f1,
                          r.trials_completed());
        append_metric_row(out, f, "macro_f1", r.mean.macro_f1, r.ci_macro_f1,
                          r.trials_completed());
    }
    return out;
}

std::string hop_sweep_csv(std::span<const TrialReport> reports) {
    std::string out =
        "hops,mean_accuracy,ci95_accuracy,mean_micro_f1,ci95_micro_f1,"
        "mean_macro_f1,ci95_macro_f1,trials\n";
    for (const TrialReport& r : reports) {
        out += std::to_string(r.hops) + ',' +
               (std::isnan(r.mean.accuracy) ? "" : format_double(r.mean.accuracy)) + ',' +
               (r.ci_accuracy ? format_double(*r.ci_accuracy) : "") + ',' +
               (std::isnan(r.mean.micro_f1) ? "" : format_double(r.mean.micro_f1)) + ',' +
               (r.ci_micro_f1 ? format_double(*r.ci_micro_f1) : "") + ',' +
               (std::isnan(r.mean.macro_f1) ? "" : format_double(r.mean.macro_f1)) + ',' +
               (r.ci_macro_f1 ? format_double(*r.ci_macro_f1) : "") + ',' +
               std::to_string(r.trials_completed()) + '\n';
    }
    return out;
}

}  // namespace dcnn
