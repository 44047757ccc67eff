#include "dcnn/data_io.hpp"

#include "dcnn/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <utility>

namespace fs = std::filesystem;

namespace dcnn {

std::string task_name(TaskKind task) {
    switch (task) {
        case TaskKind::node: return "node";
        case TaskKind::graph: return "graph";
        case TaskKind::edge: return "edge";
    }
    throw std::logic_error("task_name: unknown task kind");
}

void validate_bundle(const DatasetBundle& bundle) {
    if (bundle.graphs.empty()) throw std::invalid_argument("bundle: no graphs");
    if (bundle.num_classes < 1) throw std::invalid_argument("bundle: num_classes must be >= 1");
    const int f = bundle.graphs.front().num_features();
    for (const Graph& g : bundle.graphs) {
        if (g.num_features() != f)
            throw std::invalid_argument("bundle: feature width differs across graphs");
        if (g.has_labels()) {
            for (long i = 0; i < g.labels().size(); ++i) {
                const int y = g.labels()[i];
                if (y != -1 && (y < 0 || y >= bundle.num_classes))
                    throw std::invalid_argument("bundle: node label out of range");
            }
        }
    }
    if (bundle.task == TaskKind::graph) {
        if (bundle.graph_labels.size() != bundle.graphs.size())
            throw std::invalid_argument("bundle: graph label count != graph count");
        for (int y : bundle.graph_labels)
            if (y < 0 || y >= bundle.num_classes)
                throw std::invalid_argument("bundle: graph label out of range");
    } else {
        for (const Graph& g : bundle.graphs)
            if (!g.has_labels())
                throw std::invalid_argument("bundle: node-task graph without node labels");
    }
    if (!bundle.class_names.empty() &&
        static_cast<int>(bundle.class_names.size()) != bundle.num_classes)
        throw std::invalid_argument("bundle: class name count != num_classes");
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

[[noreturn]] void malformed(const std::string& path, long line, const std::string& what) {
    throw std::runtime_error(path + ": line " + std::to_string(line) + ": " + what);
}

// Calls fn(line_view, physical_line_number) for every nonblank line;
// tolerates CRLF endings.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    long line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        if (line.find_first_not_of(" \t") != std::string_view::npos) fn(line, line_no);
        pos = end + 1;
    }
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        const std::size_t start = line.find_first_not_of(" \t", pos);
        if (start == std::string_view::npos) break;
        std::size_t end = line.find_first_of(" \t", start);
        if (end == std::string_view::npos) end = line.size();
        out.push_back(line.substr(start, end - start));
        pos = end;
    }
    return out;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t end = line.find(',', pos);
        if (end == std::string_view::npos) end = line.size();
        std::string_view field = line.substr(pos, end - pos);
        const std::size_t a = field.find_first_not_of(" \t");
        if (a == std::string_view::npos) {
            field = {};
        } else {
            const std::size_t b = field.find_last_not_of(" \t");
            field = field.substr(a, b - a + 1);
        }
        out.push_back(field);
        if (end == line.size()) break;
        pos = end + 1;
    }
    if (!out.empty() && out.back().empty()) out.pop_back();  // trailing comma
    return out;
}

double parse_double(std::string_view token, const std::string& path, long line) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        malformed(path, line, "expected a number, got '" + std::string(token) + "'");
    return value;
}

long parse_long(std::string_view token, const std::string& path, long line) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        malformed(path, line, "expected an integer, got '" + std::string(token) + "'");
    return value;
}

std::string basename_of(const std::string& path) {
    fs::path p(path);
    if (p.filename().empty()) p = p.parent_path();
    return p.filename().string();
}

}  // namespace

DatasetBundle load_citation_dataset(const std::string& content_path,
                                    const std::string& cites_path, CitationLoadStats* stats) {
    const std::string content = read_file(content_path);
    const std::string cites = read_file(cites_path);

    std::map<std::string, int, std::less<>> id_to_index;
    std::map<std::string, int, std::less<>> label_to_class;
    std::vector<std::string> class_names;
    std::vector<double> feature_buffer;
    std::vector<int> label_buffer;
    long num_features = -1;

    for_each_line(content, [&](std::string_view line, long line_no) {
        const auto tokens = split_whitespace(line);
        if (tokens.size() < 2)
            malformed(content_path, line_no, "need at least an id and a label");
        if (num_features < 0) num_features = static_cast<long>(tokens.size()) - 2;
        if (static_cast<long>(tokens.size()) != num_features + 2)
            malformed(content_path, line_no,
                      "expected " + std::to_string(num_features + 2) + " fields, got " +
                          std::to_string(tokens.size()));

        const std::string id(tokens.front());
        if (!id_to_index.emplace(id, static_cast<int>(label_buffer.size())).second)
            malformed(content_path, line_no, "duplicate node id '" + id + "'");

        for (long k = 0; k < num_features; ++k)
            feature_buffer.push_back(parse_double(tokens[k + 1], content_path, line_no));

        const std::string label(tokens.back());
        auto [it, inserted] = label_to_class.emplace(label, static_cast<int>(class_names.size()));
        if (inserted) class_names.push_back(label);
        label_buffer.push_back(it->second);
    });

    const int n = static_cast<int>(label_buffer.size());
    if (n == 0) throw std::runtime_error(content_path + ": no nodes");

    Matrix features(n, num_features);
    std::copy(feature_buffer.begin(), feature_buffer.end(), features.data());
    IntVector labels(n);
    std::copy(label_buffer.begin(), label_buffer.end(), labels.data());

    CitationLoadStats local;
    std::vector<Edge> edges;
    for_each_line(cites, [&](std::string_view line, long line_no) {
        const auto tokens = split_whitespace(line);
        if (tokens.size() != 2)
            malformed(cites_path, line_no, "expected 'cited_id citing_id'");
        ++local.edges_read;
        const auto cited = id_to_index.find(tokens[0]);
        const auto citing = id_to_index.find(tokens[1]);
        if (cited == id_to_index.end() || citing == id_to_index.end()) {
            ++local.edges_skipped;
            return;
        }
        edges.push_back({cited->second, citing->second, 1.0});
    });

    local.content_checksum = fnv1a64(content);
    local.cites_checksum = fnv1a64(cites);
    if (stats) *stats = local;

    DatasetBundle bundle;
    bundle.graphs.emplace_back(n, std::move(edges), std::move(features), /*directed=*/false,
                               std::move(labels));
    bundle.task = TaskKind::node;
    bundle.num_classes = static_cast<int>(class_names.size());
    bundle.name = fs::path(content_path).stem().string();
    bundle.class_names = std::move(class_names);
    validate_bundle(bundle);
    return bundle;
}

void save_citation_dataset(const DatasetBundle& bundle, const std::string& content_path,
                           const std::string& cites_path) {
    validate_bundle(bundle);
    if (bundle.task != TaskKind::node || bundle.graphs.size() != 1)
        throw std::invalid_argument("save_citation_dataset: needs a single node-task graph");
    const Graph& g = bundle.graphs.front();
    if (bundle.class_names.empty())
        throw std::invalid_argument("save_citation_dataset: bundle has no class names");

    std::ofstream content(content_path, std::ios::binary);
    if (!content) throw std::runtime_error("cannot write " + content_path);
    for (int i = 0; i < g.num_nodes(); ++i) {
        content << i;
        for (int k = 0; k < g.num_features(); ++k)
            content << '\t' << format_double(g.features()(i, k));
        content << '\t' << bundle.class_names[g.labels()[i]] << '\n';
    }

    std::ofstream cites(cites_path, std::ios::binary);
    if (!cites) throw std::runtime_error("cannot write " + cites_path);
    for (const Edge& e : g.canonical_edges()) {
        const double w = e.weight;
        if (w <= 0.0 || w != std::floor(w))
            throw std::invalid_argument(
                "save_citation_dataset: the format cannot represent non-integral weights");
        for (long k = 0; k < static_cast<long>(w); ++k)
            cites << e.source << '\t' << e.target << '\n';
    }
}

DatasetBundle load_tu_dataset(const std::string& directory) {
    const std::string name = basename_of(directory);
    const fs::path dir(directory);
    auto file = [&](const char* suffix) { return (dir / (name + suffix)).string(); };

    const std::string adjacency_path = file("_A.txt");
    const std::string indicator_path = file("_graph_indicator.txt");
    const std::string graph_labels_path = file("_graph_labels.txt");
    for (const std::string& p : {adjacency_path, indicator_path, graph_labels_path})
        if (!fs::exists(p)) throw std::runtime_error("missing dataset file " + p);

    // Graph membership, 1-based ids in the file.
    std::vector<int> graph_of;  // node -> graph index (0-based)
    int num_graphs = 0;
    for_each_line(read_file(indicator_path), [&](std::string_view line, long line_no) {
        const long gid = parse_long(line, indicator_path, line_no);
        if (gid < 1) malformed(indicator_path, line_no, "graph id must be >= 1");
        graph_of.push_back(static_cast<int>(gid) - 1);
        num_graphs = std::max(num_graphs, static_cast<int>(gid));
    });
    const int total_nodes = static_cast<int>(graph_of.size());
    if (total_nodes == 0) throw std::runtime_error(indicator_path + ": no nodes");

    std::vector<int> local_index(total_nodes);
    std::vector<int> graph_sizes(num_graphs, 0);
    for (int v = 0; v < total_nodes; ++v) local_index[v] = graph_sizes[graph_of[v]]++;

    // Edges, deduplicated per undirected pair (files list both directions).
    std::vector<std::vector<Edge>> graph_edges(num_graphs);
    std::set<std::pair<int, int>> seen;
    for_each_line(read_file(adjacency_path), [&](std::string_view line, long line_no) {
        const auto fields = split_commas(line);
        if (fields.size() != 2) malformed(adjacency_path, line_no, "expected 'u, v'");
        const long u = parse_long(fields[0], adjacency_path, line_no) - 1;
        const long v = parse_long(fields[1], adjacency_path, line_no) - 1;
        if (u < 0 || u >= total_nodes || v < 0 || v >= total_nodes)
            malformed(adjacency_path, line_no, "node id out of range");
        if (graph_of[u] != graph_of[v])
            malformed(adjacency_path, line_no, "edge crosses graph boundaries");
        const int ui = static_cast<int>(u);
        const int vi = static_cast<int>(v);
        const std::pair<int, int> key{std::min(ui, vi), std::max(ui, vi)};
        if (!seen.insert(key).second) return;
        graph_edges[graph_of[u]].push_back(
            {local_index[key.first], local_index[key.second], 1.0});
    });

    // Graph labels, mapped to [0, C) by sorted value.
    std::vector<long> raw_graph_labels;
    for_each_line(read_file(graph_labels_path), [&](std::string_view line, long line_no) {
        raw_graph_labels.push_back(parse_long(line, graph_labels_path, line_no));
    });
    if (static_cast<int>(raw_graph_labels.size()) != num_graphs)
        throw std::runtime_error(graph_labels_path + ": expected " +
                                 std::to_string(num_graphs) + " labels, got " +
                                 std::to_string(raw_graph_labels.size()));
    std::vector<long> label_values(raw_graph_labels);
    std::sort(label_values.begin(), label_values.end());
    label_values.erase(std::unique(label_values.begin(), label_values.end()),
                       label_values.end());
    std::map<long, int> graph_label_map;
    std::vector<std::string> class_names;
    for (long v : label_values) {
        graph_label_map.emplace(v, static_cast<int>(class_names.size()));
        class_names.push_back(std::to_string(v));
    }

    // Node features: attributes beat one-hot node labels beat a bias column.
    const std::string attributes_path = file("_node_attributes.txt");
    const std::string node_labels_path = file("_node_labels.txt");
    Matrix all_features;
    if (fs::exists(attributes_path)) {
        std::vector<double> buffer;
        long width = -1;
        long rows = 0;
        for_each_line(read_file(attributes_path), [&](std::string_view line, long line_no) {
            const auto fields = split_commas(line);
            if (width < 0) width = static_cast<long>(fields.size());
            if (static_cast<long>(fields.size()) != width)
                malformed(attributes_path, line_no, "inconsistent attribute count");
            for (auto f : fields) buffer.push_back(parse_double(f, attributes_path, line_no));
            ++rows;
        });
        if (rows != total_nodes)
            throw std::runtime_error(attributes_path + ": expected " +
                                     std::to_string(total_nodes) + " rows, got " +
                                     std::to_string(rows));
        all_features.resize(total_nodes, width);
        std::copy(buffer.begin(), buffer.end(), all_features.data());
    } else if (fs::exists(node_labels_path)) {
        std::vector<long> node_labels;
        for_each_line(read_file(node_labels_path), [&](std::string_view line, long line_no) {
            node_labels.push_back(parse_long(line, node_labels_path, line_no));
        });
        if (static_cast<int>(node_labels.size()) != total_nodes)
            throw std::runtime_error(node_labels_path + ": expected " +
                                     std::to_string(total_nodes) + " rows, got " +
                                     std::to_string(node_labels.size()));
        std::vector<long> values(node_labels);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        std::map<long, int> column;
        for (long v : values) column.emplace(v, static_cast<int>(column.size()));
        all_features = Matrix::Zero(total_nodes, static_cast<long>(values.size()));
        for (int v = 0; v < total_nodes; ++v) all_features(v, column.at(node_labels[v])) = 1.0;
    } else {
        all_features = Matrix::Ones(total_nodes, 1);
    }

    DatasetBundle bundle;
    bundle.task = TaskKind::graph;
    bundle.name = name;
    bundle.num_classes = static_cast<int>(class_names.size());
    bundle.class_names = std::move(class_names);
    bundle.graph_labels.reserve(num_graphs);
    for (long v : raw_graph_labels) bundle.graph_labels.push_back(graph_label_map.at(v));

    std::vector<int> node_cursor(num_graphs, 0);
    std::vector<Matrix> features(num_graphs);
    for (int g = 0; g < num_graphs; ++g)
        features[g].resize(graph_sizes[g], all_features.cols());
    for (int v = 0; v < total_nodes; ++v)
        features[graph_of[v]].row(local_index[v]) = all_features.row(v);

    bundle.graphs.reserve(num_graphs);
    for (int g = 0; g < num_graphs; ++g) {
        if (graph_sizes[g] == 0)
            throw std::runtime_error(indicator_path + ": graph " + std::to_string(g + 1) +
                                     " has no nodes");
        bundle.graphs.emplace_back(graph_sizes[g], std::move(graph_edges[g]),
                                   std::move(features[g]), /*directed=*/false);
    }
    validate_bundle(bundle);
    return bundle;
}

void save_tu_dataset(const DatasetBundle& bundle, const std::string& directory) {
    validate_bundle(bundle);
    if (bundle.task != TaskKind::graph)
        throw std::invalid_argument("save_tu_dataset: needs a graph-task bundle");
    const std::string name = basename_of(directory);
    fs::create_directories(directory);
    const fs::path dir(directory);
    auto open = [&](const char* suffix) {
        std::ofstream out(dir / (name + suffix), std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir / (name + suffix)).string());
        return out;
    };

    std::ofstream adjacency = open("_A.txt");
    std::ofstream indicator = open("_graph_indicator.txt");
    std::ofstream graph_labels = open("_graph_labels.txt");
    std::ofstream attributes = open("_node_attributes.txt");

    int offset = 0;
    for (std::size_t g = 0; g < bundle.graphs.size(); ++g) {
        const Graph& graph = bundle.graphs[g];
        for (const Edge& e : graph.edges()) {
            if (e.weight != 1.0)
                throw std::invalid_argument(
                    "save_tu_dataset: the format cannot represent weighted edges");
            // The normalized undirected list holds both directions; emit all
            // of them, matching the usual both-ways file convention.
            adjacency << (offset + e.source + 1) << ", " << (offset + e.target + 1) << '\n';
        }
        for (int v = 0; v < graph.num_nodes(); ++v) {
            indicator << (g + 1) << '\n';
            for (int k = 0; k < graph.num_features(); ++k) {
                if (k > 0) attributes << ", ";
                attributes << format_double(graph.features()(v, k));
            }
            attributes << '\n';
        }
        long label_value = 0;
        const std::string& cname = bundle.class_names.empty()
                                       ? std::to_string(bundle.graph_labels[g])
                                       : bundle.class_names[bundle.graph_labels[g]];
        auto [ptr, ec] = std::from_chars(cname.data(), cname.data() + cname.size(), label_value);
        if (ec != std::errc() || ptr != cname.data() + cname.size())
            label_value = bundle.graph_labels[g];  // non-numeric names degrade to indices
        graph_labels << label_value << '\n';
        offset += graph.num_nodes();
    }
}

SplitSpec make_splits(int population, SplitProtocol protocol, std::uint64_t seed,
                      double fraction) {
    if (population < 3) throw std::invalid_argument("make_splits: population must be >= 3");

    std::vector<int> order(population);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    SplitSpec split;
    split.seed = seed;
    auto take = [&order](std::size_t from, std::size_t count) {
        return std::vector<int>(order.begin() + from, order.begin() + from + count);
    };

    if (protocol == SplitProtocol::thirds) {
        const int base = population / 3;
        const int rem = population % 3;
        const std::size_t n_train = base + (rem > 0);
        const std::size_t n_val = base + (rem > 1);
        split.train = take(0, n_train);
        split.validation = take(n_train, n_val);
        split.test = take(n_train + n_val, population - n_train - n_val);
    } else {
        if (!(fraction > 0.0 && fraction <= 1.0))
            throw std::invalid_argument("make_splits: fraction must lie in (0, 1]");
        const std::size_t holdout =
            std::max<long>(1, std::llround(0.1 * static_cast<double>(population)));
        if (2 * holdout >= static_cast<std::size_t>(population))
            throw std::invalid_argument("make_splits: population too small for 10% holdouts");
        const std::size_t remaining = population - 2 * holdout;
        const std::size_t n_train = std::min(
            remaining,
            std::max<std::size_t>(1, static_cast<std::size_t>(
                                         std::floor(fraction * static_cast<double>(remaining)))));
        split.validation = take(0, holdout);
        split.test = take(holdout, holdout);
        split.train = take(2 * holdout, n_train);
    }
    return split;
}

Graph generate_synthetic(SyntheticKind kind, int num_nodes, std::uint64_t seed,
                         double edge_probability) {
    if (num_nodes < 1)
        throw std::invalid_argument("generate_synthetic: need at least one node");

    std::vector<Edge> edges;
    std::optional<IntVector> labels;

    switch (kind) {
        case SyntheticKind::path:
            for (int i = 0; i + 1 < num_nodes; ++i) edges.push_back({i, i + 1, 1.0});
            break;

        case SyntheticKind::two_cliques: {
            const int a = (num_nodes + 1) / 2;  // first clique size
            for (int i = 0; i < a; ++i)
                for (int j = i + 1; j < a; ++j) edges.push_back({i, j, 1.0});
            for (int i = a; i < num_nodes; ++i)
                for (int j = i + 1; j < num_nodes; ++j) edges.push_back({i, j, 1.0});
            if (a < num_nodes) edges.push_back({a - 1, a, 1.0});  // bridge
            IntVector y(num_nodes);
            for (int i = 0; i < num_nodes; ++i) y[i] = i < a ? 0 : 1;
            labels = std::move(y);
            break;
        }

        case SyntheticKind::random_gnp: {
            if (!(edge_probability >= 0.0 && edge_probability <= 1.0))
                throw std::invalid_argument(
                    "generate_synthetic: edge probability must lie in [0, 1]");
            if (edge_probability == 0.0) break;
            const long total = static_cast<long>(num_nodes) * (num_nodes - 1) / 2;
            if (edge_probability == 1.0) {
                for (int i = 0; i < num_nodes; ++i)
                    for (int j = i + 1; j < num_nodes; ++j) edges.push_back({i, j, 1.0});
                break;
            }
            // Geometric skipping over the linearized strict upper triangle.
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const double log_q = std::log1p(-edge_probability);
            long idx = -1;
            int row = 0;
            long row_start = 0;  // linear index of pair (row, row + 1)
            while (true) {
                const long skip = static_cast<long>(std::floor(std::log1p(-unif(rng)) / log_q));
                idx += 1 + skip;
                if (idx >= total) break;
                while (idx >= row_start + (num_nodes - 1 - row)) {
                    row_start += num_nodes - 1 - row;
                    ++row;
                }
                const int col = row + 1 + static_cast<int>(idx - row_start);
                edges.push_back({row, col, 1.0});
            }
            break;
        }
    }

    return Graph(num_nodes, std::move(edges), Matrix(num_nodes, 0), /*directed=*/false,
                 std::move(labels));
}

std::string dataset_manifest(const DatasetBundle& bundle) {
    validate_bundle(bundle);

    Fnv1a64 hash;
    auto put_int = [&hash](long v) { hash.update(&v, sizeof(v)); };
    auto put_bytes = [&hash](const void* p, std::size_t n) { hash.update(p, n); };

    put_int(static_cast<long>(bundle.task));
    put_int(bundle.num_classes);
    put_int(static_cast<long>(bundle.graphs.size()));
    for (const std::string& c : bundle.class_names) {
        put_int(static_cast<long>(c.size()));
        hash.update(c);
    }

    long total_nodes = 0;
    long total_edges = 0;
    for (const Graph& g : bundle.graphs) {
        put_int(g.num_nodes());
        put_int(g.num_features());
        put_int(g.directed() ? 1 : 0);
        put_int(static_cast<long>(g.edges().size()));
        for (const Edge& e : g.edges()) {
            put_int(e.source);
            put_int(e.target);
            put_bytes(&e.weight, sizeof(e.weight));
        }
        if (g.features().size() > 0)
            put_bytes(g.features().data(), sizeof(double) * g.features().size());
        if (g.has_labels()) put_bytes(g.labels().data(), sizeof(int) * g.labels().size());
        total_nodes += g.num_nodes();
        total_edges += static_cast<long>(g.canonical_edges().size());
    }
    for (int y : bundle.graph_labels) put_int(y);

    char checksum[17];
    std::snprintf(checksum, sizeof(checksum), "%016llx",
                  static_cast<unsigned long long>(hash.digest()));

    nlohmann::ordered_json m;
    m["schema"] = "dcnn-dataset/1";
    m["name"] = bundle.name;
    m["task"] = task_name(bundle.task);
    m["num_graphs"] = bundle.graphs.size();
    m["num_nodes"] = total_nodes;
    m["num_edges"] = total_edges;
    m["num_features"] = bundle.graphs.front().num_features();
    m["num_classes"] = bundle.num_classes;
    m["class_names"] = bundle.class_names;
    m["checksum"] = checksum;
    return m.dump(2) + "\n";
}

}  // namespace dcnn
