#include "dcnn/baselines.hpp"

#include "dcnn/model.hpp"
#include "dcnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcnn {

Matrix matrix_exponential(const Matrix& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("matrix_exponential: matrix must be square");
    if (!m.allFinite())
        throw std::invalid_argument("matrix_exponential: non-finite entries");
    const long n = m.rows();
    if (n == 0) return Matrix(0, 0);

    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    double scale = 1.0;
    while (norm * scale > 0.5) {
        scale *= 0.5;
        ++squarings;
    }

    const Matrix b = m * scale;
    Matrix result = Matrix::Identity(n, n);
    Matrix term = Matrix::Identity(n, n);
    for (int k = 1; k <= 64; ++k) {
        term = (term * b) / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() <= 1e-17 * result.cwiseAbs().maxCoeff()) break;
    }
    for (int i = 0; i < squarings; ++i) result = result * result;
    return result;
}

namespace {

void require_symmetric(const Matrix& adjacency, const char* who) {
    if (adjacency.rows() != adjacency.cols())
        throw std::invalid_argument(std::string(who) + ": adjacency must be square");
    for (long i = 0; i < adjacency.rows(); ++i)
        for (long j = i + 1; j < adjacency.cols(); ++j)
            if (adjacency(i, j) != adjacency(j, i))
                throw std::invalid_argument(std::string(who) + ": adjacency must be symmetric");
}

// exp preserves symmetry analytically; make it exact against rounding.
Matrix symmetrized(Matrix k) {
    k = 0.5 * (k + Matrix(k.transpose()));
    return k;
}

}  // namespace

KernelMatrix exponential_diffusion_kernel(const Matrix& adjacency, double alpha) {
    require_symmetric(adjacency, "exponential_diffusion_kernel");
    if (alpha < 0.0)
        throw std::invalid_argument("exponential_diffusion_kernel: alpha must be nonnegative");
    KernelMatrix kernel;
    kernel.kind = KernelKind::exponential_diffusion;
    kernel.alpha = alpha;
    kernel.values = symmetrized(matrix_exponential(alpha * adjacency));
    return kernel;
}

KernelMatrix exponential_diffusion_kernel(const Graph& graph, double alpha) {
    return exponential_diffusion_kernel(graph.dense_adjacency(), alpha);
}

KernelMatrix laplacian_diffusion_kernel(const Matrix& adjacency, double alpha) {
    require_symmetric(adjacency, "laplacian_diffusion_kernel");
    if (alpha < 0.0)
        throw std::invalid_argument("laplacian_diffusion_kernel: alpha must be nonnegative");
    Matrix laplacian = -adjacency;
    laplacian.diagonal() += adjacency.rowwise().sum();
    KernelMatrix kernel;
    kernel.kind = KernelKind::laplacian_exponential_diffusion;
    kernel.alpha = alpha;
    kernel.values = symmetrized(matrix_exponential(-alpha * laplacian));
    return kernel;
}

KernelMatrix laplacian_diffusion_kernel(const Graph& graph, double alpha) {
    return laplacian_diffusion_kernel(graph.dense_adjacency(), alpha);
}

std::vector<int> kernel_classify(const KernelMatrix& kernel, const IntVector& labels,
                                 std::span<const int> train_indices,
                                 std::span<const int> query_indices, int num_classes) {
    if (train_indices.empty())
        throw std::invalid_argument("kernel_classify: empty training set");
    if (num_classes < 1) throw std::invalid_argument("kernel_classify: num_classes must be >= 1");
    const long n = kernel.values.rows();
    if (labels.size() != n)
        throw std::invalid_argument("kernel_classify: label count does not match kernel size");
    auto check_index = [n](int i) {
        if (i < 0 || i >= n) throw std::invalid_argument("kernel_classify: index out of range");
    };
    for (int t : train_indices) {
        check_index(t);
        if (labels[t] < 0 || labels[t] >= num_classes)
            throw std::invalid_argument("kernel_classify: training label out of range");
    }

    std::vector<int> predictions;
    predictions.reserve(query_indices.size());
    std::vector<double> votes(num_classes);
    for (int q : query_indices) {
        check_index(q);
        std::fill(votes.begin(), votes.end(), 0.0);
        for (int t : train_indices) votes[labels[t]] += kernel.values(q, t);
        predictions.push_back(static_cast<int>(
            std::max_element(votes.begin(), votes.end()) - votes.begin()));
    }
    return predictions;
}

namespace {

void check_logistic_inputs(const Matrix& features, std::span<const int> labels,
                           int num_classes) {
    if (features.rows() == 0 || features.cols() == 0)
        throw std::invalid_argument("logistic regression: empty feature matrix");
    if (static_cast<long>(labels.size()) != features.rows())
        throw std::invalid_argument("logistic regression: label count does not match rows");
    for (int y : labels)
        if (y < 0 || y >= num_classes)
            throw std::invalid_argument("logistic regression: label out of range");
}

// Largest singular value squared of [X | 1], without materializing the
// augmented matrix. Deterministic power iteration.
double augmented_gram_spectral_norm(const Matrix& x) {
    Vector v = Vector::Ones(x.cols() + 1);
    v /= v.norm();
    double value = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
        Vector u = x * v.head(x.cols());
        u.array() += v(x.cols());
        Vector w(x.cols() + 1);
        w.head(x.cols()) = x.transpose() * u;
        w(x.cols()) = u.sum();
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        value = norm;
        v = w / norm;
    }
    return value;
}

}  // namespace

double logistic_smooth_objective(const LogisticModel& model, const Matrix& features,
                                 std::span<const int> labels) {
    const Matrix scores = logistic_scores(model, features);
    double obj = cross_entropy_loss(scores, labels);
    if (model.penalty == Penalty::l2) obj += model.lambda * model.weights.squaredNorm();
    return obj;
}

std::pair<Matrix, Vector> logistic_smooth_gradient(const LogisticModel& model,
                                                   const Matrix& features,
                                                   std::span<const int> labels) {
    const Matrix scores = logistic_scores(model, features);
    const Matrix score_grad = cross_entropy_loss_grad(scores, labels);
    Matrix grad_w = score_grad.transpose() * features;
    Vector grad_b = score_grad.colwise().sum().transpose();
    if (model.penalty == Penalty::l2) grad_w += 2.0 * model.lambda * model.weights;
    return {std::move(grad_w), std::move(grad_b)};
}

LogisticModel logistic_train(const Matrix& features, std::span<const int> labels,
                             int num_classes, Penalty penalty, double lambda,
                             const LogisticConfig& config) {
    if (num_classes < 2)
        throw std::invalid_argument("logistic_train: need at least two classes");
    if (lambda < 0.0) throw std::invalid_argument("logistic_train: lambda must be nonnegative");
    check_logistic_inputs(features, labels, num_classes);

    LogisticModel model;
    model.weights = Matrix::Zero(num_classes, features.cols());
    model.bias = Vector::Zero(num_classes);
    model.penalty = penalty;
    model.lambda = lambda;

    const double rows = static_cast<double>(features.rows());
    // Softmax cross-entropy has score-space curvature at most 1/2, so the
    // smooth objective is (sigma_max^2 / 2n + 2 lambda)-smooth; 1.1 covers
    // the power-iteration underestimate.
    double lipschitz = 1.1 * augmented_gram_spectral_norm(features) / (2.0 * rows);
    if (penalty == Penalty::l2) lipschitz += 2.0 * lambda;
    const double step = 1.0 / std::max(lipschitz, 1e-12);

    auto full_objective = [&](const LogisticModel& m) {
        double obj = logistic_smooth_objective(m, features, labels);
        if (penalty == Penalty::l1) obj += lambda * m.weights.cwiseAbs().sum();
        return obj;
    };

    double previous = full_objective(model);
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        auto [grad_w, grad_b] = logistic_smooth_gradient(model, features, labels);
        model.weights -= step * grad_w;
        model.bias -= step * grad_b;
        if (penalty == Penalty::l1) {
            const double threshold = step * lambda;
            model.weights = model.weights.unaryExpr([threshold](double w) {
                const double shrunk = std::abs(w) - threshold;
                return shrunk <= 0.0 ? 0.0 : (w > 0.0 ? shrunk : -shrunk);
            });
        }
        const double objective = full_objective(model);
        if (!std::isfinite(objective))
            throw std::runtime_error("logistic_train: objective diverged");
        if (std::abs(previous - objective) <= config.tolerance * std::max(1.0, std::abs(previous)))
            break;
        previous = objective;
    }
    return model;
}

Matrix logistic_scores(const LogisticModel& model, const Matrix& features) {
    if (features.cols() != model.weights.cols())
        throw std::invalid_argument("logistic_scores: feature width does not match model");
    Matrix scores = features * model.weights.transpose();
    scores.rowwise() += model.bias.transpose();
    return scores;
}

std::vector<int> logistic_predict(const LogisticModel& model, const Matrix& features) {
    return predict_hard(logistic_scores(model, features));
}

}  // namespace dcnn
