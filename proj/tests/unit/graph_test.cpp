#include "dcnn/graph.hpp"

#include "dcnn/data_io.hpp"

#include "common/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace dcnn;
using dcnn::testing::RandomGraphSpec;
using dcnn::testing::bitwise_equal;
using dcnn::testing::max_abs_diff;
using dcnn::testing::random_graph;
using dcnn::testing::random_permutation;

namespace {

Graph path3(Matrix features = Matrix()) {
    return Graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}, std::move(features));
}

Matrix column(std::initializer_list<double> values) {
    Matrix m(static_cast<long>(values.size()), 1);
    long i = 0;
    for (double v : values) m(i++, 0) = v;
    return m;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("undirected construction symmetrizes and collapses duplicates") {
    Graph g(3, {{0, 1, 1.0}, {0, 1, 1.0}, {1, 2, 1.0}}, Matrix());
    const Matrix a = g.dense_adjacency();
    CHECK(a(0, 1) == 2.0);
    CHECK(a(1, 0) == 2.0);
    CHECK(a(1, 2) == 1.0);
    CHECK(a(2, 1) == 1.0);
    CHECK(a(0, 2) == 0.0);
    CHECK_FALSE(g.directed());
    CHECK(g.num_features() == 0);

    Graph d(2, {{0, 1, 1.0}}, Matrix(), /*directed=*/true);
    const Matrix ad = d.dense_adjacency();
    CHECK(ad(0, 1) == 1.0);
    CHECK(ad(1, 0) == 0.0);
}

TEST_CASE("construction validates endpoints, weights, features, and labels") {
    CHECK_THROWS_AS(Graph(2, {{0, 2, 1.0}}, Matrix()), std::invalid_argument);
    CHECK_THROWS_AS(Graph(2, {{-1, 0, 1.0}}, Matrix()), std::invalid_argument);
    CHECK_THROWS_AS(Graph(2, {{0, 1, -0.5}}, Matrix()), std::invalid_argument);
    CHECK_THROWS_AS(Graph(2, {{0, 1, std::nan("")}}, Matrix()), std::invalid_argument);
    CHECK_THROWS_AS(Graph(-1, {}, Matrix()), std::invalid_argument);

    Matrix wrong_rows(3, 1);
    wrong_rows.setZero();
    CHECK_THROWS_AS(Graph(2, {}, wrong_rows), std::invalid_argument);

    IntVector short_labels(1);
    short_labels << 0;
    CHECK_THROWS_AS(Graph(2, {}, Matrix(), false, short_labels), std::invalid_argument);

    Graph unlabeled(2, {}, Matrix());
    CHECK_FALSE(unlabeled.has_labels());
    CHECK_THROWS_AS(unlabeled.labels(), std::logic_error);
}

TEST_CASE("transition of a path splits mass by degree") {
    const Matrix p = build_transition(path3()).dense();
    Matrix expect(3, 3);
    expect << 0, 1, 0, 0.5, 0, 0.5, 0, 1, 0;
    CHECK(bitwise_equal(p, expect));
}

TEST_CASE("edgeless graphs keep an all-zero transition") {
    const TransitionMatrix p = build_transition(Graph(2, {}, Matrix()));
    CHECK(p.dense().isZero(0.0));
    CHECK(p.row_sum(0) == 0.0);
    CHECK(p.row(0).empty());
}

TEST_CASE("directed weighted edges normalize by outgoing weight") {
    Graph g(3, {{0, 1, 3.0}, {0, 2, 1.0}}, Matrix(), /*directed=*/true);
    const Matrix p = build_transition(g).dense();
    CHECK(p(0, 0) == 0.0);
    CHECK(p(0, 1) == 0.75);
    CHECK(p(0, 2) == 0.25);
    CHECK(p.row(1).isZero(0.0));
    CHECK(p.row(2).isZero(0.0));
}

TEST_CASE("every transition row sums to one or is exactly empty") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomGraphSpec spec;
        spec.num_nodes = 1 + static_cast<int>(seed % 25);
        spec.edge_probability = seed % 3 == 0 ? 0.1 : 0.5;
        spec.weighted = seed % 2 == 0;
        spec.directed = seed % 4 == 0;
        const Graph g = random_graph(seed, spec);
        const TransitionMatrix p = build_transition(g);
        for (int i = 0; i < p.rows(); ++i) {
            if (p.row(i).empty()) {
                CHECK(p.row_sum(i) == 0.0);
                continue;
            }
            CHECK(std::abs(p.row_sum(i) - 1.0) <= 1e-12);
            for (const auto& entry : p.row(i)) CHECK(entry.value >= 0.0);
        }
    }
}

TEST_CASE("diffusion over the path matches hand-computed hops") {
    const DiffusedFeatures d = diffuse_features(path3(column({1, 2, 3})), 2);
    CHECK(d.num_hops == 2);
    CHECK(d.slices.size() == 3);
    CHECK(bitwise_equal(d.slices[0], column({1, 2, 3})));
    CHECK(bitwise_equal(d.slices[1], column({2, 2, 2})));
    CHECK(bitwise_equal(d.slices[2], column({2, 2, 2})));
}

TEST_CASE("zero hops returns just the features") {
    const Matrix x = column({4, 5, 6});
    const DiffusedFeatures d = diffuse_features(path3(x), 0);
    CHECK(d.slices.size() == 1);
    CHECK(bitwise_equal(d.slices[0], x));
}

TEST_CASE("diffusion on an edgeless graph dies after hop zero") {
    Graph g(2, {}, column({1, -1}));
    const DiffusedFeatures d = diffuse_features(g, 2);
    CHECK(bitwise_equal(d.slices[0], g.features()));
    CHECK(d.slices[1].isZero(0.0));
    CHECK(d.slices[2].isZero(0.0));
}

TEST_CASE("diffusion rejects bad arguments") {
    CHECK_THROWS_AS(diffuse_features(path3(column({1, 2, 3})), -1), std::invalid_argument);
    const TransitionMatrix p = build_transition(path3());
    CHECK_THROWS_AS(diffuse_features(p, Matrix::Zero(2, 1), 1), std::invalid_argument);
    CHECK_THROWS_AS(p.apply(Matrix::Zero(4, 1)), std::invalid_argument);
}

TEST_CASE("slices agree with dense matrix powers") {
    for (std::uint64_t seed = 100; seed < 112; ++seed) {
        RandomGraphSpec spec;
        spec.num_nodes = 2 + static_cast<int>(seed % 14);
        spec.num_features = 1 + static_cast<int>(seed % 4);
        spec.edge_probability = seed % 2 == 0 ? 0.2 : 0.6;
        spec.weighted = seed % 3 == 0;
        spec.directed = seed % 5 == 0;
        CHECK(dcnn::testing::dense_diffusion_gap(random_graph(seed, spec), 4) < 1e-12);
    }
}

TEST_CASE("an all-ones column is a diffusion fixed point on connected graphs") {
    const Graph cliques = generate_synthetic(SyntheticKind::two_cliques, 10);
    Graph g(10, cliques.canonical_edges(), Matrix::Ones(10, 1));
    const DiffusedFeatures d = diffuse_features(g, 5);
    for (const Matrix& slice : d.slices)
        CHECK(max_abs_diff(slice, Matrix::Ones(10, 1)) <= 1e-12);
}

TEST_CASE("entity stacks one row per hop") {
    const DiffusedFeatures d = diffuse_features(path3(column({1, 2, 3})), 2);
    const Matrix e = d.entity(1);
    CHECK(e.rows() == 3);
    CHECK(e.cols() == 1);
    for (int j = 0; j <= 2; ++j) CHECK(e(j, 0) == d.slices[j](1, 0));
}

TEST_CASE("incidence rows mark edge endpoints and skip self-loops") {
    Graph g(3, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 2, 1.0}}, Matrix());
    const IncidenceMatrix b = incidence_matrix(g);
    CHECK(b.num_edges == 2);
    CHECK(b.num_nodes == 3);
    const Matrix dense = b.dense();
    CHECK(dense.rows() == 2);
    for (int m = 0; m < b.num_edges; ++m) CHECK(dense.row(m).sum() == 2.0);
    CHECK(dense(0, 0) == 1.0);
    CHECK(dense(0, 1) == 1.0);
    CHECK(dense(1, 1) == 1.0);
    CHECK(dense(1, 2) == 1.0);
}

TEST_CASE("edge augmentation of a single edge builds a triangle") {
    Graph g(2, {{0, 1, 1.0}}, Matrix());
    const Graph aug = augment_with_edges(g);
    CHECK(aug.num_nodes() == 3);
    Matrix expect(3, 3);
    expect << 0, 1, 1, 1, 0, 1, 1, 1, 0;
    CHECK(bitwise_equal(aug.dense_adjacency(), expect));
}

TEST_CASE("edge augmentation keeps an edgeless graph unchanged") {
    Matrix x(2, 2);
    x << 1, 2, 3, 4;
    Graph g(2, {}, x);
    const Graph aug = augment_with_edges(g);
    CHECK(aug.num_nodes() == 2);
    CHECK(bitwise_equal(aug.features(), x));
    CHECK(aug.dense_adjacency().isZero(0.0));
}

TEST_CASE("edge augmentation of the path attaches edge nodes to endpoints") {
    const Graph aug = augment_with_edges(path3(column({1, 2, 3})));
    CHECK(aug.num_nodes() == 5);
    const Matrix a = aug.dense_adjacency();
    // Node block unchanged.
    CHECK(a(0, 1) == 1.0);
    CHECK(a(1, 2) == 1.0);
    // Edge node 3 covers edge (0, 1); edge node 4 covers (1, 2).
    CHECK(a(3, 0) == 1.0);
    CHECK(a(3, 1) == 1.0);
    CHECK(a(3, 2) == 0.0);
    CHECK(a(4, 1) == 1.0);
    CHECK(a(4, 2) == 1.0);
    CHECK(a(4, 0) == 0.0);
    // Edge-node block is empty.
    CHECK(a(3, 4) == 0.0);
    CHECK(a(4, 3) == 0.0);
    // Default edge features are the bias value 1.0.
    CHECK(aug.features()(3, 0) == 1.0);
    CHECK(aug.features()(4, 0) == 1.0);
}

TEST_CASE("edge augmentation size law holds on random graphs") {
    for (std::uint64_t seed = 30; seed < 40; ++seed) {
        RandomGraphSpec spec;
        spec.num_nodes = 2 + static_cast<int>(seed % 9);
        spec.num_features = 2;
        spec.num_classes = 2;
        const Graph g = random_graph(seed, spec);
        const int m = static_cast<int>(g.canonical_edges().size());
        const Graph aug = augment_with_edges(g);
        REQUIRE(aug.num_nodes() == g.num_nodes() + m);
        const Matrix a = aug.dense_adjacency();
        for (int k = 0; k < m; ++k) {
            int nonzeros = 0;
            for (int c = 0; c < aug.num_nodes(); ++c)
                if (a(g.num_nodes() + k, c) != 0.0) ++nonzeros;
            CHECK(nonzeros == 2);
        }
        // Edge nodes stay unlabeled.
        for (int k = 0; k < m; ++k) CHECK(aug.labels()[g.num_nodes() + k] == -1);
        for (int i = 0; i < g.num_nodes(); ++i) CHECK(aug.labels()[i] == g.labels()[i]);
    }
}

TEST_CASE("edge augmentation accepts and validates explicit edge features") {
    Matrix x(2, 2);
    x << 1, 2, 3, 4;
    Graph g(2, {{0, 1, 1.0}}, x);
    Matrix ef(1, 2);
    ef << 7, 8;
    const Graph aug = augment_with_edges(g, ef);
    CHECK(aug.features()(2, 0) == 7.0);
    CHECK(aug.features()(2, 1) == 8.0);
    CHECK_THROWS_AS(augment_with_edges(g, Matrix::Zero(2, 2)), std::invalid_argument);
    CHECK_THROWS_AS(augment_with_edges(g, Matrix::Zero(1, 3)), std::invalid_argument);
}

TEST_CASE("bias feature prepends a ones column") {
    const Graph bare = add_bias_feature(Graph(4, {}, Matrix()));
    CHECK(bare.num_features() == 1);
    CHECK(bitwise_equal(bare.features(), Matrix::Ones(4, 1)));

    Matrix x(2, 3);
    x << 1, 2, 3, 4, 5, 6;
    const Graph wide = add_bias_feature(Graph(2, {}, x));
    CHECK(wide.num_features() == 4);
    CHECK(bitwise_equal(Matrix(wide.features().col(0)), Matrix::Ones(2, 1)));
    CHECK(bitwise_equal(Matrix(wide.features().rightCols(3)), x));

    const Graph twice = add_bias_feature(wide);
    CHECK(twice.num_features() == 5);
    CHECK(bitwise_equal(Matrix(twice.features().leftCols(2)), Matrix::Ones(2, 2)));
}

TEST_CASE("permutation relabels nodes consistently") {
    Matrix x = column({10, 20, 30});
    IntVector y(3);
    y << 0, 1, 0;
    Graph g(3, {{0, 1, 1.0}, {1, 2, 1.0}}, x, false, y);

    const std::vector<int> identity{0, 1, 2};
    const Graph same = permute_graph(g, identity);
    CHECK(bitwise_equal(same.features(), g.features()));
    CHECK(bitwise_equal(same.dense_adjacency(), g.dense_adjacency()));

    const std::vector<int> reverse{2, 1, 0};
    const Graph rev = permute_graph(g, reverse);
    CHECK(rev.features()(0, 0) == 30.0);
    CHECK(rev.features()(2, 0) == 10.0);
    CHECK(rev.labels()[0] == 0);
    CHECK(rev.labels()[1] == 1);
    CHECK(bitwise_equal(rev.dense_adjacency(), g.dense_adjacency()));  // a path reversed is a path

    const std::vector<int> dup{0, 0, 1};
    CHECK_THROWS_AS(permute_graph(g, dup), std::invalid_argument);
    const std::vector<int> short_perm{0, 1};
    CHECK_THROWS_AS(permute_graph(g, short_perm), std::invalid_argument);
}

TEST_CASE("diffusion commutes with permutation bitwise") {
    for (std::uint64_t seed = 50; seed < 62; ++seed) {
        RandomGraphSpec spec;
        spec.num_nodes = 3 + static_cast<int>(seed % 12);
        spec.num_features = 1 + static_cast<int>(seed % 3);
        spec.edge_probability = seed % 2 == 0 ? 0.3 : 0.7;
        spec.weighted = seed % 3 == 0;
        const Graph g = random_graph(seed, spec);
        const std::vector<int> perm = random_permutation(seed ^ 0xabcd, spec.num_nodes);
        const Graph pg = permute_graph(g, perm);

        const int hops = 3;
        const DiffusedFeatures d = diffuse_features(g, hops);
        const DiffusedFeatures pd = diffuse_features(pg, hops);
        for (int j = 0; j <= hops; ++j)
            for (int i = 0; i < spec.num_nodes; ++i)
                CHECK((pd.slices[j].row(i).array() == d.slices[j].row(perm[i]).array()).all());
    }
}

}  // TEST_SUITE("graph")
