// gst — graph self-training toolkit CLI.
//
// Subcommands:
//   convert    edge list + CSV features (string ids allowed) -> GraphPack
//   synth      deterministic synthetic GraphPack (citation-network style)
//   train      raw model: train once, report accuracies
//   selftrain  full teacher/student loop for one strategy over seeds
//   sweep      axis sweep (k | K | sigma | beta), CSV output
//
// Exit codes: 0 ok, 1 configuration error, 2 runtime failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gst/datagen.hpp"
#include "gst/gcn.hpp"
#include "gst/graph.hpp"
#include "gst/selftrain.hpp"

namespace {

using namespace gst;
using nlohmann::json;

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        seeds.push_back(std::stoull(tok));
    }
    if (seeds.empty()) throw std::invalid_argument("empty seed list");
    return seeds;
}

std::vector<double> parse_value_list(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        vals.push_back(std::stod(tok));
    }
    if (vals.empty()) throw std::invalid_argument("empty value list");
    return vals;
}

// --- convert ---------------------------------------------------------------

struct ConvertArgs {
    std::string edges, features, labels, split, out;
};

void run_convert(const ConvertArgs& a) {
    // node universe and order come from the feature file: "id,v1,v2,..."
    std::vector<std::string> ids;
    std::vector<std::vector<double>> feature_rows;
    {
        std::ifstream in(a.features);
        if (!in) throw std::invalid_argument("cannot open features file: " + a.features);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string tok;
            std::getline(ss, tok, ',');
            ids.push_back(tok);
            std::vector<double> row;
            while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
            feature_rows.push_back(std::move(row));
        }
    }
    if (feature_rows.empty()) throw std::invalid_argument("feature file is empty");
    const std::size_t n = ids.size(), d = feature_rows.front().size();

    std::map<std::string, NodeId> id_map;  // dense ids by sorted original id
    {
        std::vector<std::string> sorted = ids;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("duplicate node id in feature file");
        for (std::size_t i = 0; i < sorted.size(); ++i)
            id_map[sorted[i]] = static_cast<NodeId>(i);
    }
    auto lookup = [&](const std::string& id) {
        const auto it = id_map.find(id);
        if (it == id_map.end()) throw std::invalid_argument("unknown node id: " + id);
        return it->second;
    };

    Matrix features(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        if (feature_rows[i].size() != d)
            throw std::invalid_argument("ragged feature row for id " + ids[i]);
        const auto dense = static_cast<std::size_t>(lookup(ids[i]));
        for (std::size_t q = 0; q < d; ++q) features(dense, q) = feature_rows[i][q];
    }

    std::vector<std::pair<NodeId, NodeId>> edges;
    {
        std::ifstream in(a.edges);
        if (!in) throw std::invalid_argument("cannot open edges file: " + a.edges);
        std::string u, v;
        while (in >> u >> v) edges.emplace_back(lookup(u), lookup(v));
    }

    std::vector<int> labels(n, -1);
    int n_classes = 0;
    {
        std::ifstream in(a.labels);
        if (!in) throw std::invalid_argument("cannot open labels file: " + a.labels);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string id, y;
            std::getline(ss, id, ',');
            std::getline(ss, y, ',');
            labels[static_cast<std::size_t>(lookup(id))] = std::stoi(y);
            n_classes = std::max(n_classes, std::stoi(y) + 1);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (labels[i] < 0) throw std::invalid_argument("missing label for some node");

    Split split;
    {
        std::ifstream in(a.split);
        if (!in) throw std::invalid_argument("cannot open split file: " + a.split);
        json sj;
        in >> sj;
        auto fill = [&](const char* key, std::vector<NodeId>& dst) {
            for (const auto& v : sj.at(key))
                dst.push_back(v.is_string() ? lookup(v.get<std::string>())
                                            : static_cast<NodeId>(v.get<long long>()));
        };
        fill("train", split.train_ids);
        fill("val", split.val_ids);
        fill("test", split.test_ids);
    }

    const Graph graph = build_graph(n, edges, std::move(features), std::move(labels), n_classes);
    validate_split(graph, split);
    save_graphpack(graph, split, a.out);
    {
        json m = json::object();
        for (const auto& [orig, dense] : id_map) m[orig] = dense;
        std::ofstream(std::filesystem::path(a.out) / "id_map.json") << m.dump() << "\n";
    }
    std::printf("wrote GraphPack: %zu nodes, %zu edges, %d classes -> %s\n", graph.n_nodes,
                graph.n_edges, graph.n_classes, a.out.c_str());
}

// --- shared config/flag plumbing ---------------------------------------------

struct CommonFlags {
    std::string config_path;
    std::string data_dir;
    std::string strategy;
    std::string seeds;
    std::string calibration;
    int rounds = -1;
    long long select_k = -1, pool_K = -1, banzhaf_samples = -1;
    double noise_sigma = -1.0, beta = -1.0;
    int n_threads = -1;
    int record_timing = -1;  // tri-state: unset/-1, 0, 1
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file (flags override it)");
    cmd->add_option("--data", f.data_dir, "GraphPack directory");
    cmd->add_option("--seeds", f.seeds, "comma-separated seed list");
    cmd->add_option("--rounds", f.rounds, "self-training rounds");
    cmd->add_option("--select-k", f.select_k, "nodes pseudo-labeled per round");
    cmd->add_option("--pool-K", f.pool_K, "candidate pool size");
    cmd->add_option("--banzhaf-samples", f.banzhaf_samples, "MSR sample count");
    cmd->add_option("--calibration", f.calibration, "none | ts | ets");
    cmd->add_option("--noise-sigma", f.noise_sigma, "label noise fraction");
    cmd->add_option("--beta", f.beta, "training-label fraction");
    cmd->add_option("--threads", f.n_threads, "Banzhaf sampling workers");
    cmd->add_option("--record-timing", f.record_timing, "0 pins wall_time_s to 0");
}

RunConfig resolve_config(const CommonFlags& f) {
    RunConfig cfg = f.config_path.empty() ? RunConfig{} : load_run_config(f.config_path);
    if (!f.data_dir.empty()) cfg.dataset_dir = f.data_dir;
    if (!f.strategy.empty()) cfg.strategy = strategy_from_string(f.strategy);
    if (!f.seeds.empty()) cfg.seeds = parse_seed_list(f.seeds);
    if (!f.calibration.empty()) cfg.calibration = calibration_from_string(f.calibration);
    if (f.rounds >= 0) cfg.rounds = f.rounds;
    if (f.select_k >= 0) cfg.select_k = static_cast<std::size_t>(f.select_k);
    if (f.pool_K >= 0) cfg.pool_K = static_cast<std::size_t>(f.pool_K);
    if (f.banzhaf_samples >= 0) cfg.banzhaf_samples = static_cast<std::size_t>(f.banzhaf_samples);
    if (f.noise_sigma >= 0.0) cfg.noise_sigma = f.noise_sigma;
    if (f.beta >= 0.0) cfg.train_fraction_beta = f.beta;
    if (f.n_threads >= 1) cfg.n_threads = f.n_threads;
    if (f.record_timing >= 0) cfg.record_timing = f.record_timing != 0;
    if (cfg.dataset_dir.empty()) throw std::invalid_argument("no dataset directory given (--data)");
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph self-training toolkit"};
    app.require_subcommand(1);

    // convert
    ConvertArgs conv;
    auto* c_convert = app.add_subcommand("convert", "edge list + CSV features -> GraphPack");
    c_convert->add_option("--edges", conv.edges)->required();
    c_convert->add_option("--features", conv.features)->required();
    c_convert->add_option("--labels", conv.labels)->required();
    c_convert->add_option("--split", conv.split)->required();
    c_convert->add_option("--out", conv.out)->required();

    // synth
    SynthConfig synth;
    std::string synth_out;
    auto* c_synth = app.add_subcommand("synth", "generate a synthetic GraphPack");
    c_synth->add_option("--out", synth_out)->required();
    c_synth->add_option("--nodes", synth.n_nodes);
    c_synth->add_option("--features", synth.n_features);
    c_synth->add_option("--classes", synth.n_classes);
    c_synth->add_option("--edges", synth.n_edges);
    c_synth->add_option("--homophily", synth.homophily);
    c_synth->add_option("--topic-word-prob", synth.topic_word_prob);
    c_synth->add_option("--train-per-class", synth.train_per_class);
    c_synth->add_option("--val", synth.n_val);
    c_synth->add_option("--test", synth.n_test);
    c_synth->add_option("--seed", synth.seed);

    // train
    CommonFlags train_flags;
    std::string train_out;
    auto* c_train = app.add_subcommand("train", "train the raw model once");
    add_common_flags(c_train, train_flags);
    c_train->add_option("--out", train_out, "directory for checkpoint.bin and history.csv");

    // selftrain
    CommonFlags st_flags;
    std::string st_out;
    auto* c_st = app.add_subcommand("selftrain", "run the full self-training loop");
    add_common_flags(c_st, st_flags);
    c_st->add_option("--strategy", st_flags.strategy,
                     "bangs | bangs_uncal | bangs_no_banzhaf | conf_cal | conf_uncal | random | raw");
    c_st->add_option("--out", st_out, "output directory")->required();

    // sweep
    CommonFlags sw_flags;
    std::string sw_out, sw_axis, sw_values;
    auto* c_sweep = app.add_subcommand("sweep", "sweep one axis over values");
    add_common_flags(c_sweep, sw_flags);
    c_sweep->add_option("--strategy", sw_flags.strategy);
    c_sweep->add_option("--axis", sw_axis, "k | K | sigma | beta")->required();
    c_sweep->add_option("--values", sw_values, "comma-separated values")->required();
    c_sweep->add_option("--out", sw_out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_convert) {
            run_convert(conv);
        } else if (*c_synth) {
            if (synth.class_weights.size() != static_cast<std::size_t>(synth.n_classes))
                synth.class_weights.assign(synth.n_classes, 1.0 / synth.n_classes);
            const GraphPack pack = make_synthetic_pack(synth);
            save_graphpack(pack.graph, pack.split, synth_out);
            std::printf("wrote synthetic GraphPack: %zu nodes, %zu edges, %d classes -> %s\n",
                        pack.graph.n_nodes, pack.graph.n_edges, pack.graph.n_classes,
                        synth_out.c_str());
        } else if (*c_train) {
            RunConfig cfg = resolve_config(train_flags);
            const GraphPack pack = load_graphpack(cfg.dataset_dir);
            cfg.strategy = Strategy::raw;
            const RunReport rep = run_single(pack, cfg, cfg.seeds.front());
            std::printf("raw model: val_acc=%.4f test_acc=%.4f\n", rep.rounds[0].val_acc,
                        rep.rounds[0].test_acc);
            if (!train_out.empty()) {
                std::filesystem::create_directories(train_out);
                // retrain outside run_single to keep the artifacts
                TrainConfig tc = cfg.train;
                tc.seed = hash_seed(cfg.seeds.front(), 0);
                GcnModel fresh = init_model(pack.graph.n_features(),
                                            static_cast<std::size_t>(tc.hidden_dim),
                                            static_cast<std::size_t>(pack.graph.n_classes), tc.seed,
                                            tc.dropout_rate);
                const auto adj = normalize(pack.graph, NormMode::symmetric, true);
                LabeledNodes tr, va;
                for (NodeId v : pack.split.train_ids)
                    tr.emplace_back(v, pack.graph.labels[static_cast<std::size_t>(v)]);
                for (NodeId v : pack.split.val_ids)
                    va.emplace_back(v, pack.graph.labels[static_cast<std::size_t>(v)]);
                if (!cfg.early_stop) tc.patience = 0;
                const auto res = train(std::move(fresh), adj, pack.graph.features, tr, va, tc);
                save_checkpoint(res.model, std::filesystem::path(train_out) / "checkpoint.bin");
                save_history_csv(res.history, std::filesystem::path(train_out) / "history.csv");
            }
        } else if (*c_st) {
            const RunConfig cfg = resolve_config(st_flags);
            const GraphPack pack = load_graphpack(cfg.dataset_dir);
            std::filesystem::create_directories(st_out);
            const MultiRunReport multi = run_all_seeds(pack, cfg);
            for (const auto& rep : multi.runs)
                write_rounds_csv(rep, std::filesystem::path(st_out) /
                                          ("rounds_seed" + std::to_string(rep.seed) + ".csv"));
            write_summary_json({multi}, std::filesystem::path(st_out) / "summary.json");
            std::printf("%s: best %.4f +- %.4f | early-stopped %.4f +- %.4f (%zu seeds)\n",
                        to_string(cfg.strategy).c_str(), multi.mean_best, multi.std_best,
                        multi.mean_early, multi.std_early, multi.runs.size());
        } else if (*c_sweep) {
            const RunConfig cfg = resolve_config(sw_flags);
            const GraphPack pack = load_graphpack(cfg.dataset_dir);
            std::filesystem::create_directories(sw_out);
            const auto axis = axis_from_string(sw_axis);
            const auto cells = sweep(pack, cfg, axis, parse_value_list(sw_values));
            write_sweep_csv(axis, cells, std::filesystem::path(sw_out) / "sweep.csv");
            for (const auto& cell : cells) {
                std::printf("%s=%g: best %.4f +- %.4f%s\n", sw_axis.c_str(), cell.value,
                            cell.report.mean_best, cell.report.std_best,
                            cell.errors.empty() ? "" : "  [errors]");
                for (const auto& e : cell.errors) std::fprintf(stderr, "  error: %s\n", e.c_str());
            }
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
