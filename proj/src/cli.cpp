#include "dcnn/cli.hpp"

#include "dcnn/data_io.hpp"
#include "dcnn/experiments.hpp"
#include "dcnn/metrics.hpp"
#include "dcnn/util.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace dcnn {

namespace {

struct CommonOptions {
    std::string dataset;
    std::string model = "dcnn";
    std::string out = "report";
    std::string config_path;
    int hops = 2;
    int trials = 10;
    std::uint64_t seed = 0;
};

void add_common_flags(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--dataset", o.dataset,
                    "Dataset: citation .content file, TU directory, or "
                    "synthetic:two-cliques:<N>[:seed]")
        ->required();
    cmd->add_option("--model", o.model, "dcnn|ked|kled|l1logistic|l2logistic")
        ->capture_default_str();
    cmd->add_option("--hops", o.hops, "Diffusion breadth H (dcnn)")->capture_default_str();
    cmd->add_option("--trials", o.trials, "Number of independent trials")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Master seed; trial seeds derive from it")
        ->capture_default_str();
    cmd->add_option("--out", o.out, "Output path stem for report files")
        ->capture_default_str();
    cmd->add_option("--config", o.config_path, "JSON file of training-config overrides");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_file(const std::string& path, const std::string& text) {
    if (const fs::path parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = text.find(sep, pos);
        parts.push_back(text.substr(pos, next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return parts;
}

DatasetBundle synthetic_bundle(const std::string& spec) {
    const std::vector<std::string> parts = split_on(spec, ':');
    // synthetic:<kind>:<N>[:p][:seed]
    if (parts.size() < 3) throw std::invalid_argument("synthetic spec needs a kind and a size");
    const std::string& kind = parts[1];
    const int n = std::stoi(parts[2]);

    if (kind == "two-cliques") {
        std::uint64_t seed = parts.size() > 3 ? std::stoull(parts[3]) : 0;
        DatasetBundle bundle;
        bundle.graphs.push_back(generate_synthetic(SyntheticKind::two_cliques, n, seed));
        bundle.task = TaskKind::node;
        bundle.num_classes = 2;
        bundle.name = "two-cliques-" + std::to_string(n);
        bundle.class_names = {"0", "1"};
        validate_bundle(bundle);
        return bundle;
    }
    if (kind == "path" || kind == "gnp")
        throw std::invalid_argument("synthetic:" + kind +
                                    " graphs carry no labels; experiments need "
                                    "synthetic:two-cliques");
    throw std::invalid_argument("unknown synthetic kind '" + kind +
                                "' (expected two-cliques|path|gnp)");
}

DatasetBundle load_bundle(const std::string& spec) {
    if (spec.rfind("synthetic:", 0) == 0) return synthetic_bundle(spec);

    const fs::path p(spec);
    if (fs::is_directory(p)) {
        std::optional<fs::path> content;
        bool has_tu = false;
        for (const auto& entry : fs::directory_iterator(p)) {
            const std::string name = entry.path().filename().string();
            if (name.ends_with("_A.txt")) has_tu = true;
            if (entry.path().extension() == ".content") content = entry.path();
        }
        if (has_tu) return load_tu_dataset(spec);
        if (content) {
            fs::path cites = *content;
            cites.replace_extension(".cites");
            return load_citation_dataset(content->string(), cites.string());
        }
        throw std::invalid_argument("no *_A.txt or *.content file under " + spec);
    }
    if (p.extension() == ".content") {
        fs::path cites = p;
        cites.replace_extension(".cites");
        return load_citation_dataset(p.string(), cites.string());
    }
    throw std::invalid_argument("cannot infer dataset format from '" + spec +
                                "' (expected a directory, a .content file, or a "
                                "synthetic: spec)");
}

void apply_config_overrides(ExperimentConfig& config, const std::string& path) {
    const ordered_json j = ordered_json::parse(read_file(path));
    if (!j.is_object()) throw std::invalid_argument(path + ": config must be a JSON object");
    TrainConfig& tc = config.training;
    for (const auto& [key, value] : j.items()) {
        if (key == "learning_rate") tc.learning_rate = value.get<double>();
        else if (key == "init_std") tc.init_std = value.get<double>();
        else if (key == "batch_size") tc.batch_size = value.get<int>();
        else if (key == "max_epochs") tc.max_epochs = value.get<int>();
        else if (key == "early_stop_window") tc.early_stop_window = value.get<int>();
        else if (key == "hinge_margin") tc.hinge_margin = value.get<double>();
        else if (key == "adagrad_epsilon") tc.adagrad_epsilon = value.get<double>();
        else if (key == "loss") tc.loss = parse_loss(value.get<std::string>());
        else if (key == "output_nonlinearity")
            tc.output_nonlinearity = parse_nonlinearity(value.get<std::string>());
        else if (key == "kernel_alpha_grid")
            config.kernel_alpha_grid = value.get<std::vector<double>>();
        else if (key == "logistic_lambda_grid")
            config.logistic_lambda_grid = value.get<std::vector<double>>();
        else
            throw std::invalid_argument(path + ": unknown config key '" + key + "'");
    }
}

ExperimentConfig build_config(const CommonOptions& o) {
    ExperimentConfig config;
    config.model = parse_model(o.model);
    config.hops = o.hops;
    config.trials = o.trials;
    config.seed = o.seed;
    if (!o.config_path.empty()) apply_config_overrides(config, o.config_path);
    return config;
}

ordered_json report_set_json(std::span<const TrialReport> reports,
                             const ExperimentConfig& config) {
    ordered_json set;
    set["schema"] = "dcnn-report-set/1";
    ordered_json arr = ordered_json::array();
    for (const TrialReport& r : reports) arr.push_back(ordered_json::parse(report_json(r, config)));
    set["reports"] = std::move(arr);
    return set;
}

void announce(const TrialReport& r, const std::vector<std::string>& files) {
    std::cout << r.model << " on " << r.dataset << ": mean accuracy "
              << (std::isnan(r.mean.accuracy) ? std::string("n/a")
                                              : format_double(r.mean.accuracy))
              << " over " << r.trials_completed() << "/" << r.trials_requested << " trials";
    if (r.trials_failed > 0) std::cout << " (" << r.trials_failed << " failed)";
    std::cout << '\n';
    for (const std::string& f : files) std::cout << "wrote " << f << '\n';
}

int run_classification(const CommonOptions& o, bool graph_task) {
    const DatasetBundle bundle = load_bundle(o.dataset);
    const ExperimentConfig config = build_config(o);
    const TrialReport report =
        graph_task ? run_graph_trials(bundle, config) : run_node_trials(bundle, config);

    std::vector<std::string> files;
    write_file(o.out + ".json", report_json(report, config));
    files.push_back(o.out + ".json");
    write_file(o.out + "_trials.csv", trials_csv(report));
    files.push_back(o.out + "_trials.csv");
    if (config.model == ModelKind::dcnn) {
        write_file(o.out + "_history.csv", history_csv(report));
        files.push_back(o.out + "_history.csv");
    }
    write_file(o.out + "_dataset.json", dataset_manifest(bundle));
    files.push_back(o.out + "_dataset.json");
    announce(report, files);
    return report.trials_completed() > 0 ? 0 : 1;
}

int run_curve(const CommonOptions& o, std::vector<double> fractions) {
    if (fractions.empty())
        for (int k = 1; k <= 10; ++k) fractions.push_back(0.1 * k);
    const DatasetBundle bundle = load_bundle(o.dataset);
    const ExperimentConfig config = build_config(o);
    const std::vector<TrialReport> reports = run_learning_curve(bundle, config, fractions);

    write_file(o.out + ".json", report_set_json(reports, config).dump(2) + "\n");
    write_file(o.out + "_curve.csv", learning_curve_csv(reports));
    write_file(o.out + "_dataset.json", dataset_manifest(bundle));
    int completed = 0;
    for (const TrialReport& r : reports) completed += r.trials_completed();
    std::cout << "learning curve over " << reports.size() << " fractions\n";
    for (const char* suffix : {".json", "_curve.csv", "_dataset.json"})
        std::cout << "wrote " << o.out << suffix << '\n';
    return completed > 0 ? 0 : 1;
}

int run_sweep(const CommonOptions& o, std::vector<int> hop_values) {
    if (hop_values.empty()) hop_values = {0, 1, 2, 3, 4, 5};
    const DatasetBundle bundle = load_bundle(o.dataset);
    const ExperimentConfig config = build_config(o);
    const std::vector<TrialReport> reports = hop_sweep(bundle, config, hop_values);

    write_file(o.out + ".json", report_set_json(reports, config).dump(2) + "\n");
    write_file(o.out + "_hops.csv", hop_sweep_csv(reports));
    write_file(o.out + "_dataset.json", dataset_manifest(bundle));
    int completed = 0;
    for (const TrialReport& r : reports) completed += r.trials_completed();
    std::cout << "hop sweep over " << reports.size() << " breadths\n";
    for (const char* suffix : {".json", "_hops.csv", "_dataset.json"})
        std::cout << "wrote " << o.out << suffix << '\n';
    return completed > 0 ? 0 : 1;
}

std::vector<double> csv_metric_column(const std::string& path, const std::string& metric) {
    const std::string text = read_file(path);
    std::istringstream lines(text);
    std::string line;
    if (!std::getline(lines, line)) throw std::runtime_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_on(line, ',');
    long column = -1;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == metric) column = static_cast<long>(c);
    if (column < 0) throw std::runtime_error(path + ": no column named '" + metric + "'");

    std::vector<double> values;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_on(line, ',');
        if (static_cast<long>(fields.size()) <= column || fields[column].empty()) continue;
        const std::string& f = fields[column];
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc() || ptr != f.data() + f.size())
            throw std::runtime_error(path + ": non-numeric value '" + f + "' in column " +
                                     metric);
        values.push_back(v);
    }
    return values;
}

int run_stats(const std::string& test, const std::string& metric, const std::string& a_path,
              const std::string& b_path, double mu0, bool two_tailed) {
    const std::vector<double> a = csv_metric_column(a_path, metric);
    TTestResult result;
    ordered_json out;
    out["test"] = test;
    out["metric"] = metric;
    out["n_a"] = a.size();
    if (test == "welch") {
        if (b_path.empty()) throw std::invalid_argument("welch test needs --b");
        const std::vector<double> b = csv_metric_column(b_path, metric);
        out["n_b"] = b.size();
        result = welch_t_test(a, b, !two_tailed);
    } else if (test == "one-sample") {
        out["mu0"] = mu0;
        result = one_sample_t_test(a, mu0, !two_tailed);
    } else {
        throw std::invalid_argument("unknown test '" + test + "' (expected welch|one-sample)");
    }
    out["one_tailed"] = !two_tailed;
    out["t"] = std::isfinite(result.t) ? ordered_json(result.t)
                                       : ordered_json(result.t > 0 ? "inf" : "-inf");
    out["degrees_of_freedom"] =
        std::isfinite(result.degrees_of_freedom) ? ordered_json(result.degrees_of_freedom)
                                                 : ordered_json(nullptr);
    out["p_value"] = std::isnan(result.p_value) ? ordered_json(nullptr)
                                                : ordered_json(result.p_value);
    out["defined"] = result.defined;
    std::cout << out.dump(2) << '\n';
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"diffusion-convolutional networks: experiments and baselines"};
    app.require_subcommand(1);

    CommonOptions node_opts;
    CLI::App* node_cmd =
        app.add_subcommand("node-class", "Multi-trial transductive node classification");
    add_common_flags(node_cmd, node_opts);

    CommonOptions graph_opts;
    CLI::App* graph_cmd = app.add_subcommand("graph-class", "Multi-trial graph classification");
    add_common_flags(graph_cmd, graph_opts);

    CommonOptions curve_opts;
    std::vector<double> fractions;
    CLI::App* curve_cmd = app.add_subcommand(
        "learning-curve", "Accuracy vs training fraction (10% validation and test holdouts)");
    add_common_flags(curve_cmd, curve_opts);
    curve_cmd->add_option("--fractions", fractions,
                          "Training fractions in (0, 1]; default 0.1 .. 1.0");

    CommonOptions sweep_opts;
    std::vector<int> hop_values;
    CLI::App* sweep_cmd =
        app.add_subcommand("hop-sweep", "Accuracy vs diffusion breadth with shared seeds");
    add_common_flags(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--hop-values", hop_values, "Breadths to sweep; default 0 1 2 3 4 5");

    std::string stats_test = "welch";
    std::string stats_metric = "accuracy";
    std::string stats_a, stats_b;
    double stats_mu0 = 0.0;
    bool stats_two_tailed = false;
    CLI::App* stats_cmd =
        app.add_subcommand("stats", "Significance tests over per-trial metric CSVs");
    stats_cmd->add_option("--test", stats_test, "welch|one-sample")->capture_default_str();
    stats_cmd->add_option("--metric", stats_metric, "Column of the trials CSV")
        ->capture_default_str();
    stats_cmd->add_option("--a", stats_a, "Trials CSV for sample A")->required();
    stats_cmd->add_option("--b", stats_b, "Trials CSV for sample B (welch)");
    stats_cmd->add_option("--mu0", stats_mu0, "Reference mean (one-sample)");
    stats_cmd->add_flag("--two-tailed", stats_two_tailed, "Two-tailed p-value");

    try {
        app.parse(argc, argv);
        if (node_cmd->parsed()) return run_classification(node_opts, /*graph_task=*/false);
        if (graph_cmd->parsed()) return run_classification(graph_opts, /*graph_task=*/true);
        if (curve_cmd->parsed()) return run_curve(curve_opts, std::move(fractions));
        if (sweep_cmd->parsed()) return run_sweep(sweep_opts, std::move(hop_values));
        if (stats_cmd->parsed())
            return run_stats(stats_test, stats_metric, stats_a, stats_b, stats_mu0,
                             stats_two_tailed);
        return 0;
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        ordered_json err;
        err["error"] = {{"type", "usage"}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
    } catch (const std::exception& e) {
        ordered_json err;
        err["error"] = {{"type", "runtime"}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        return 1;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.push_back("dcnn");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const std::string& s : full) argv.push_back(s.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace dcnn
