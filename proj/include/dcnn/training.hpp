#pragma once

#include "dcnn/model.hpp"

#include <cstdint>
#include <deque>
#include <vector>

namespace dcnn {

enum class LossKind { hinge, hinge_one_vs_all, cross_entropy };

struct TrainConfig {
    double learning_rate = 0.05;
    double init_std = 0.1;  // variance 0.01
    int batch_size = 64;
    int max_epochs = 500;
    int early_stop_window = 5;
    double hinge_margin = 1.0;
    std::uint64_t rng_seed = 0;
    double adagrad_epsilon = 1e-8;
    LossKind loss = LossKind::hinge;
    OutputNonlinearity output_nonlinearity = OutputNonlinearity::none;
};

/// Mean over rows of max(0, margin + max_{c != y} s_c - s_y) (Crammer-Singer).
double hinge_loss(const ClassScores& scores, std::span<const int> labels, double margin);

/// Subgradient of hinge_loss: +1/N at the worst violator, -1/N at the true
/// class, zero rows where the margin is met. Ties break to the lowest index.
Matrix hinge_loss_grad(const ClassScores& scores, std::span<const int> labels, double margin);

/// One-vs-all variant: sum_c max(0, margin - t_c * s_c), t = +1 for the true
/// class and -1 otherwise, averaged over rows.
double hinge_loss_one_vs_all(const ClassScores& scores, std::span<const int> labels, double margin);
Matrix hinge_loss_one_vs_all_grad(const ClassScores& scores, std::span<const int> labels,
                                  double margin);

/// Mean row-wise -log softmax(s)[y].
double cross_entropy_loss(const ClassScores& scores, std::span<const int> labels);
Matrix cross_entropy_loss_grad(const ClassScores& scores, std::span<const int> labels);

double loss_value(LossKind kind, const ClassScores& scores, std::span<const int> labels,
                  double margin);
Matrix loss_grad(LossKind kind, const ClassScores& scores, std::span<const int> labels,
                 double margin);

/// Accumulated squared gradients, same shapes as the parameters.
struct AdaGradState {
    Matrix conv_acc;
    Matrix dense_acc;

    static AdaGradState zeros_like(const DcnnParams& params);
};

/// state += g^2; params -= lr * g / (sqrt(state) + eps). Descent on loss.
void adagrad_step(DcnnParams& params, const Gradients& grads, AdaGradState& state,
                  double learning_rate, double epsilon);

/// All weights i.i.d. Normal(0, init_std^2), deterministic per seed.
DcnnParams init_params(int hops, int num_features, int num_classes, double init_std,
                       std::uint64_t rng_seed);

/// Ring buffer of the last `window` validation errors. Training stops when
/// the current error exceeds the mean of a full window, which cannot happen
/// before window + 1 epochs.
class EarlyStopWindow {
public:
    explicit EarlyStopWindow(int window);

    bool should_stop(double validation_error) const;
    void record(double validation_error);
    int size() const { return static_cast<int>(errors_.size()); }

private:
    int window_;
    std::deque<double> errors_;
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double validation_error = 0.0;
};

struct TrainResult {
    DcnnParams params;  // best-validation snapshot
    std::vector<EpochStats> history;
    int best_epoch = 0;
    double best_validation_error = 1.0;
    bool stopped_early = false;
};

/// Minibatch AdaGrad over precomputed entity representations. Labels of
/// validation entities are used only for the stopping rule; test entities
/// are never touched. Throws on empty splits or non-finite loss.
TrainResult train(const DiffusedFeatures& entities, const IntVector& labels,
                  std::span<const int> train_indices, std::span<const int> validation_indices,
                  int num_classes, const TrainConfig& config);

/// Misclassification rate of hard predictions on the given entities.
double misclassification_rate(const DiffusedFeatures& entities, const DcnnParams& params,
                              const IntVector& labels, std::span<const int> indices,
                              OutputNonlinearity output);

}  // namespace dcnn
