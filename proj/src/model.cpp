#include "dcnn/model.hpp"

#include "dcnn/util.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dcnn {

namespace {

void check_shapes(const DiffusedFeatures& diffused, const DcnnParams& params) {
    if (diffused.num_hops != params.hops || diffused.num_features != params.num_features)
        throw std::invalid_argument("dcnn: diffused feature shape does not match parameters");
    if (params.conv_weights.rows() != params.hops + 1 ||
        params.conv_weights.cols() != params.num_features)
        throw std::invalid_argument("dcnn: conv weight shape inconsistent");
    if (params.dense_weights.rows() != params.num_classes ||
        params.dense_weights.cols() != static_cast<long>(params.hops + 1) * params.num_features)
        throw std::invalid_argument("dcnn: dense weight shape inconsistent");
}

}  // namespace

NodeActivations node_activations(const DiffusedFeatures& diffused, const DcnnParams& params) {
    check_shapes(diffused, params);
    NodeActivations z;
    z.num_entities = diffused.num_nodes;
    z.num_hops = diffused.num_hops;
    z.num_features = diffused.num_features;
    z.slices.reserve(diffused.num_hops + 1);
    for (int j = 0; j <= diffused.num_hops; ++j) {
        z.slices.emplace_back(
            (diffused.slices[j].array().rowwise() * params.conv_weights.row(j).array()).tanh());
    }
    return z;
}

DiffusedFeatures mean_entity(const DiffusedFeatures& diffused) {
    if (diffused.num_nodes < 1)
        throw std::invalid_argument("mean_entity: empty graph");
    DiffusedFeatures d;
    d.num_nodes = 1;
    d.num_hops = diffused.num_hops;
    d.num_features = diffused.num_features;
    d.slices.reserve(diffused.num_hops + 1);
    for (const Matrix& slice : diffused.slices)
        d.slices.push_back(slice.colwise().mean());
    return d;
}

NodeActivations graph_activations(const DiffusedFeatures& diffused, const DcnnParams& params) {
    return node_activations(mean_entity(diffused), params);
}

ClassScores class_scores(const NodeActivations& activations, const DcnnParams& params,
                         OutputNonlinearity output) {
    const int f = params.num_features;
    if (activations.num_hops != params.hops || activations.num_features != f)
        throw std::invalid_argument("class_scores: activation shape does not match parameters");
    ClassScores scores = Matrix::Zero(activations.num_entities, params.num_classes);
    for (int j = 0; j <= params.hops; ++j) {
        // Block of W^d owning hop j, C x F.
        auto block = params.dense_weights.middleCols(static_cast<long>(j) * f, f);
        scores.noalias() += activations.slices[j] * block.transpose();
    }
    if (output == OutputNonlinearity::tanh) scores = scores.array().tanh();
    return scores;
}

std::vector<int> predict_hard(const ClassScores& scores) {
    std::vector<int> labels(scores.rows());
    for (long i = 0; i < scores.rows(); ++i) {
        int best = 0;
        for (long c = 1; c < scores.cols(); ++c)
            if (scores(i, c) > scores(i, best)) best = static_cast<int>(c);
        labels[i] = best;
    }
    return labels;
}

Matrix predict_proba(const ClassScores& scores) {
    Matrix p(scores.rows(), scores.cols());
    for (long i = 0; i < scores.rows(); ++i) {
        const double m = scores.row(i).maxCoeff();
        Eigen::ArrayXd e = (scores.row(i).array() - m).exp();
        p.row(i) = (e / e.sum()).transpose();
    }
    return p;
}

Forward forward(const DiffusedFeatures& diffused, const DcnnParams& params,
                OutputNonlinearity output) {
    Forward fwd;
    fwd.activations = node_activations(diffused, params);
    fwd.scores = class_scores(fwd.activations, params, output);
    return fwd;
}

Gradients backward(const DiffusedFeatures& diffused, const DcnnParams& params,
                   const Forward& cache, const Matrix& upstream, OutputNonlinearity output) {
    check_shapes(diffused, params);
    if (upstream.rows() != cache.scores.rows() || upstream.cols() != cache.scores.cols())
        throw std::invalid_argument("backward: upstream shape does not match scores");

    // Chain through the optional output tanh first.
    Matrix up = upstream;
    if (output == OutputNonlinearity::tanh)
        up = upstream.array() * (1.0 - cache.scores.array().square());

    const int f = params.num_features;
    Gradients g;
    g.conv_weights = Matrix::Zero(params.hops + 1, f);
    g.dense_weights = Matrix::Zero(params.num_classes, static_cast<long>(params.hops + 1) * f);
    for (int j = 0; j <= params.hops; ++j) {
        const Matrix& zj = cache.activations.slices[j];
        g.dense_weights.middleCols(static_cast<long>(j) * f, f).noalias() = up.transpose() * zj;
        Matrix dz = up * params.dense_weights.middleCols(static_cast<long>(j) * f, f);
        // d tanh(w * d) / dw = (1 - z^2) * d
        g.conv_weights.row(j) =
            (dz.array() * (1.0 - zj.array().square()) * diffused.slices[j].array())
                .colwise()
                .sum();
    }
    return g;
}

Gradients backward(const DiffusedFeatures& diffused, const DcnnParams& params,
                   const Matrix& upstream, OutputNonlinearity output) {
    return backward(diffused, params, forward(diffused, params, output), upstream, output);
}

DiffusedFeatures gather(const DiffusedFeatures& diffused, std::span<const int> indices) {
    DiffusedFeatures out;
    out.num_nodes = static_cast<int>(indices.size());
    out.num_hops = diffused.num_hops;
    out.num_features = diffused.num_features;
    out.slices.reserve(diffused.num_hops + 1);
    for (const Matrix& slice : diffused.slices) {
        Matrix sub(indices.size(), diffused.num_features);
        for (std::size_t r = 0; r < indices.size(); ++r) sub.row(r) = slice.row(indices[r]);
        out.slices.push_back(std::move(sub));
    }
    return out;
}

void save_checkpoint(const DcnnParams& params, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
    out << "dcnn-params 1\n";
    out << params.hops << ' ' << params.num_features << ' ' << params.num_classes << '\n';
    auto write_matrix = [&out](const Matrix& m) {
        for (long i = 0; i < m.rows(); ++i) {
            for (long j = 0; j < m.cols(); ++j) {
                if (j > 0) out << ' ';
                out << format_double(m(i, j));
            }
            out << '\n';
        }
    };
    write_matrix(params.conv_weights);
    write_matrix(params.dense_weights);
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

DcnnParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "dcnn-params" || version != 1)
        throw std::runtime_error("load_checkpoint: unrecognized checkpoint header");

    DcnnParams p;
    in >> p.hops >> p.num_features >> p.num_classes;
    if (!in || p.hops < 0 || p.num_features <= 0 || p.num_classes <= 0)
        throw std::runtime_error("load_checkpoint: bad dimension line");
    p.conv_weights.resize(p.hops + 1, p.num_features);
    p.dense_weights.resize(p.num_classes, static_cast<long>(p.hops + 1) * p.num_features);
    for (long i = 0; i < p.conv_weights.rows(); ++i)
        for (long j = 0; j < p.conv_weights.cols(); ++j) in >> p.conv_weights(i, j);
    for (long i = 0; i < p.dense_weights.rows(); ++i)
        for (long j = 0; j < p.dense_weights.cols(); ++j) in >> p.dense_weights(i, j);
    if (!in) throw std::runtime_error("load_checkpoint: truncated weight data");
    return p;
}

}  // namespace dcnn
