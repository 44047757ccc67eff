#include "dcnn/training.hpp"

#include "dcnn/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace dcnn {

namespace {

void check_labels(const ClassScores& scores, std::span<const int> labels) {
    if (static_cast<long>(labels.size()) != scores.rows())
        throw std::invalid_argument("loss: label count does not match score rows");
    for (int y : labels)
        if (y < 0 || y >= scores.cols())
            throw std::invalid_argument("loss: label out of range");
}

// Worst competitor of the true class; ties toward the lowest index.
int worst_violator(const ClassScores& scores, long row, int truth) {
    int best = -1;
    double best_score = 0.0;
    for (long c = 0; c < scores.cols(); ++c) {
        if (static_cast<int>(c) == truth) continue;
        if (best < 0 || scores(row, c) > best_score) {
            best = static_cast<int>(c);
            best_score = scores(row, c);
        }
    }
    return best;
}

}  // namespace

double hinge_loss(const ClassScores& scores, std::span<const int> labels, double margin) {
    check_labels(scores, labels);
    if (scores.cols() < 2) throw std::invalid_argument("hinge_loss: needs at least two classes");
    double total = 0.0;
    for (long i = 0; i < scores.rows(); ++i) {
        const int w = worst_violator(scores, i, labels[i]);
        total += std::max(0.0, margin + scores(i, w) - scores(i, labels[i]));
    }
    return total / static_cast<double>(scores.rows());
}

Matrix hinge_loss_grad(const ClassScores& scores, std::span<const int> labels, double margin) {
    check_labels(scores, labels);
    if (scores.cols() < 2) throw std::invalid_argument("hinge_loss: needs at least two classes");
    Matrix grad = Matrix::Zero(scores.rows(), scores.cols());
    const double inv_n = 1.0 / static_cast<double>(scores.rows());
    for (long i = 0; i < scores.rows(); ++i) {
        const int w = worst_violator(scores, i, labels[i]);
        if (margin + scores(i, w) - scores(i, labels[i]) > 0.0) {
            grad(i, w) += inv_n;
            grad(i, labels[i]) -= inv_n;
        }
    }
    return grad;
}

double hinge_loss_one_vs_all(const ClassScores& scores, std::span<const int> labels,
                             double margin) {
    check_labels(scores, labels);
    double total = 0.0;
    for (long i = 0; i < scores.rows(); ++i) {
        for (long c = 0; c < scores.cols(); ++c) {
            const double t = (static_cast<int>(c) == labels[i]) ? 1.0 : -1.0;
            total += std::max(0.0, margin - t * scores(i, c));
        }
    }
    return total / static_cast<double>(scores.rows());
}

Matrix hinge_loss_one_vs_all_grad(const ClassScores& scores, std::span<const int> labels,
                                  double margin) {
    check_labels(scores, labels);
    Matrix grad = Matrix::Zero(scores.rows(), scores.cols());
    const double inv_n = 1.0 / static_cast<double>(scores.rows());
    for (long i = 0; i < scores.rows(); ++i) {
        for (long c = 0; c < scores.cols(); ++c) {
            const double t = (static_cast<int>(c) == labels[i]) ? 1.0 : -1.0;
            if (margin - t * scores(i, c) > 0.0) grad(i, c) -= t * inv_n;
        }
    }
    return grad;
}

double cross_entropy_loss(const ClassScores& scores, std::span<const int> labels) {
    check_labels(scores, labels);
    double total = 0.0;
    for (long i = 0; i < scores.rows(); ++i) {
        const double m = scores.row(i).maxCoeff();
        const double lse = m + std::log((scores.row(i).array() - m).exp().sum());
        total += lse - scores(i, labels[i]);
    }
    return total / static_cast<double>(scores.rows());
}

Matrix cross_entropy_loss_grad(const ClassScores& scores, std::span<const int> labels) {
    check_labels(scores, labels);
    Matrix grad = predict_proba(scores);
    const double inv_n = 1.0 / static_cast<double>(scores.rows());
    for (long i = 0; i < scores.rows(); ++i) grad(i, labels[i]) -= 1.0;
    return grad * inv_n;
}

double loss_value(LossKind kind, const ClassScores& scores, std::span<const int> labels,
                  double margin) {
    switch (kind) {
        case LossKind::hinge: return hinge_loss(scores, labels, margin);
        case LossKind::hinge_one_vs_all: return hinge_loss_one_vs_all(scores, labels, margin);
        case LossKind::cross_entropy: return cross_entropy_loss(scores, labels);
    }
    throw std::logic_error("loss_value: unknown loss kind");
}

Matrix loss_grad(LossKind kind, const ClassScores& scores, std::span<const int> labels,
                 double margin) {
    switch (kind) {
        case LossKind::hinge: return hinge_loss_grad(scores, labels, margin);
        case LossKind::hinge_one_vs_all:
            return hinge_loss_one_vs_all_grad(scores, labels, margin);
        case LossKind::cross_entropy: return cross_entropy_loss_grad(scores, labels);
    }
    throw std::logic_error("loss_grad: unknown loss kind");
}

AdaGradState AdaGradState::zeros_like(const DcnnParams& params) {
    AdaGradState s;
    s.conv_acc = Matrix::Zero(params.conv_weights.rows(), params.conv_weights.cols());
    s.dense_acc = Matrix::Zero(params.dense_weights.rows(), params.dense_weights.cols());
    return s;
}

namespace {

void adagrad_update(Matrix& param, const Matrix& grad, Matrix& acc, double lr, double eps) {
    if (param.rows() != grad.rows() || param.cols() != grad.cols())
        throw std::invalid_argument("adagrad_step: gradient shape mismatch");
    acc.array() += grad.array().square();
    // Zero gradients must leave the parameter untouched even with eps = 0.
    param.array() -= (grad.array() == 0.0)
                         .select(Eigen::ArrayXXd::Zero(grad.rows(), grad.cols()),
                                 lr * grad.array() / (acc.array().sqrt() + eps));
}

}  // namespace

void adagrad_step(DcnnParams& params, const Gradients& grads, AdaGradState& state,
                  double learning_rate, double epsilon) {
    adagrad_update(params.conv_weights, grads.conv_weights, state.conv_acc, learning_rate,
                   epsilon);
    adagrad_update(params.dense_weights, grads.dense_weights, state.dense_acc, learning_rate,
                   epsilon);
}

DcnnParams init_params(int hops, int num_features, int num_classes, double init_std,
                       std::uint64_t rng_seed) {
    if (hops < 0 || num_features <= 0 || num_classes <= 0)
        throw std::invalid_argument("init_params: dimensions must be positive");
    DcnnParams p;
    p.hops = hops;
    p.num_features = num_features;
    p.num_classes = num_classes;
    p.conv_weights.resize(hops + 1, num_features);
    p.dense_weights.resize(num_classes, static_cast<long>(hops + 1) * num_features);

    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> normal(0.0, init_std);
    for (long i = 0; i < p.conv_weights.rows(); ++i)
        for (long j = 0; j < p.conv_weights.cols(); ++j) p.conv_weights(i, j) = normal(rng);
    for (long i = 0; i < p.dense_weights.rows(); ++i)
        for (long j = 0; j < p.dense_weights.cols(); ++j) p.dense_weights(i, j) = normal(rng);
    return p;
}

EarlyStopWindow::EarlyStopWindow(int window) : window_(window) {
    if (window < 1) throw std::invalid_argument("EarlyStopWindow: window must be positive");
}

bool EarlyStopWindow::should_stop(double validation_error) const {
    if (static_cast<int>(errors_.size()) < window_) return false;
    const double mean = std::accumulate(errors_.begin(), errors_.end(), 0.0) /
                        static_cast<double>(errors_.size());
    return validation_error > mean;
}

void EarlyStopWindow::record(double validation_error) {
    errors_.push_back(validation_error);
    while (static_cast<int>(errors_.size()) > window_) errors_.pop_front();
}

double misclassification_rate(const DiffusedFeatures& entities, const DcnnParams& params,
                              const IntVector& labels, std::span<const int> indices,
                              OutputNonlinearity output) {
    if (indices.empty()) throw std::invalid_argument("misclassification_rate: empty index set");
    const DiffusedFeatures subset = gather(entities, indices);
    const std::vector<int> predicted =
        predict_hard(class_scores(node_activations(subset, params), params, output));
    long wrong = 0;
    for (std::size_t i = 0; i < indices.size(); ++i)
        if (predicted[i] != labels[indices[i]]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(indices.size());
}

TrainResult train(const DiffusedFeatures& entities, const IntVector& labels,
                  std::span<const int> train_indices, std::span<const int> validation_indices,
                  int num_classes, const TrainConfig& config) {
    if (train_indices.empty() || validation_indices.empty())
        throw std::invalid_argument("train: train and validation splits must be nonempty");
    if (labels.size() != entities.num_nodes)
        throw std::invalid_argument("train: label count does not match entity count");
    for (int i : train_indices)
        if (labels[i] < 0 || labels[i] >= num_classes)
            throw std::invalid_argument("train: training label out of range");

    DcnnParams params = init_params(entities.num_hops, entities.num_features, num_classes,
                                    config.init_std, config.rng_seed);
    AdaGradState state = AdaGradState::zeros_like(params);
    std::mt19937_64 shuffle_rng(derive_seed(config.rng_seed, 1));

    std::vector<int> order(train_indices.begin(), train_indices.end());
    const int batch_size = std::max(1, std::min<int>(config.batch_size,
                                                     static_cast<int>(order.size())));

    TrainResult result;
    EarlyStopWindow window(config.early_stop_window);
    result.best_validation_error = std::numeric_limits<double>::infinity();

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t count = std::min<std::size_t>(batch_size, order.size() - start);
            std::span<const int> batch(order.data() + start, count);

            const DiffusedFeatures batch_diffused = gather(entities, batch);
            std::vector<int> batch_labels(count);
            for (std::size_t b = 0; b < count; ++b) batch_labels[b] = labels[batch[b]];

            const Forward fwd = forward(batch_diffused, params, config.output_nonlinearity);
            const double batch_loss =
                loss_value(config.loss, fwd.scores, batch_labels, config.hinge_margin);
            epoch_loss += batch_loss * static_cast<double>(count);

            const Matrix upstream =
                loss_grad(config.loss, fwd.scores, batch_labels, config.hinge_margin);
            const Gradients grads = backward(batch_diffused, params, fwd, upstream,
                                             config.output_nonlinearity);
            adagrad_step(params, grads, state, config.learning_rate, config.adagrad_epsilon);
        }
        epoch_loss /= static_cast<double>(order.size());
        if (!std::isfinite(epoch_loss))
            throw std::runtime_error("train: non-finite loss, training diverged");

        const double val_error = misclassification_rate(entities, params, labels,
                                                        validation_indices,
                                                        config.output_nonlinearity);
        result.history.push_back({epoch, epoch_loss, val_error});

        if (val_error < result.best_validation_error) {
            result.best_validation_error = val_error;
            result.best_epoch = epoch;
            result.params = params;
        }

        if (window.should_stop(val_error)) {
            result.stopped_early = true;
            break;
        }
        window.record(val_error);
    }

    return result;
}

}  // namespace dcnn
