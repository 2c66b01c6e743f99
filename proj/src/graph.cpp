#include "gst/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gst/rng.hpp"

namespace gst {

using nlohmann::json;

namespace {

std::string node_pair(NodeId u, NodeId v) {
    return "(" + std::to_string(u) + "," + std::to_string(v) + ")";
}

bool row_contains(const Graph& g, std::size_t u, NodeId v) {
    const auto begin = g.csr_targets.begin() + static_cast<std::ptrdiff_t>(g.csr_offsets[u]);
    const auto end = g.csr_targets.begin() + static_cast<std::ptrdiff_t>(g.csr_offsets[u + 1]);
    return std::binary_search(begin, end, v);
}

}  // namespace

Graph build_graph(std::size_t n_nodes, const std::vector<std::pair<NodeId, NodeId>>& edges,
                  Matrix features, std::vector<int> labels, int n_classes) {
    if (features.rows() != n_nodes)
        throw std::runtime_error("dimension mismatch: features have " + std::to_string(features.rows()) +
                                 " rows for " + std::to_string(n_nodes) + " nodes");
    if (labels.size() != n_nodes)
        throw std::runtime_error("dimension mismatch: " + std::to_string(labels.size()) + " labels for " +
                                 std::to_string(n_nodes) + " nodes");

    std::vector<std::pair<NodeId, NodeId>> dir;
    dir.reserve(edges.size() * 2);
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n_nodes || static_cast<std::size_t>(v) >= n_nodes)
            throw std::runtime_error("edge endpoint out of range: " + node_pair(u, v));
        if (u == v) continue;  // self-edges in the input are dropped
        dir.emplace_back(u, v);
        dir.emplace_back(v, u);
    }
    std::sort(dir.begin(), dir.end());
    dir.erase(std::unique(dir.begin(), dir.end()), dir.end());

    Graph g;
    g.n_nodes = n_nodes;
    g.n_edges = dir.size() / 2;
    g.n_classes = n_classes;
    g.features = std::move(features);
    g.labels = std::move(labels);
    g.csr_offsets.assign(n_nodes + 1, 0);
    for (const auto& [u, v] : dir) g.csr_offsets[static_cast<std::size_t>(u) + 1]++;
    for (std::size_t i = 0; i < n_nodes; ++i) g.csr_offsets[i + 1] += g.csr_offsets[i];
    g.csr_targets.resize(dir.size());
    {
        std::vector<std::size_t> cursor(g.csr_offsets.begin(), g.csr_offsets.end() - 1);
        for (const auto& [u, v] : dir) g.csr_targets[cursor[static_cast<std::size_t>(u)]++] = v;
    }
    validate_graph(g);
    return g;
}

void validate_graph(const Graph& g) {
    if (g.csr_offsets.size() != g.n_nodes + 1) throw std::runtime_error("csr_offsets has wrong length");
    if (g.csr_offsets[0] != 0) throw std::runtime_error("csr_offsets must start at 0");
    for (std::size_t i = 0; i < g.n_nodes; ++i)
        if (g.csr_offsets[i] > g.csr_offsets[i + 1]) throw std::runtime_error("csr_offsets not non-decreasing");
    if (g.csr_offsets[g.n_nodes] != g.csr_targets.size())
        throw std::runtime_error("csr_offsets[n] != csr_targets length");
    if (g.csr_targets.size() != 2 * g.n_edges)
        throw std::runtime_error("n_edges inconsistent with csr_targets length");

    for (std::size_t u = 0; u < g.n_nodes; ++u) {
        for (std::size_t e = g.csr_offsets[u]; e < g.csr_offsets[u + 1]; ++e) {
            const NodeId v = g.csr_targets[e];
            if (v < 0 || static_cast<std::size_t>(v) >= g.n_nodes)
                throw std::runtime_error("edge target out of range at row " + std::to_string(u));
            if (e > g.csr_offsets[u] && g.csr_targets[e - 1] >= v)
                throw std::runtime_error("csr_targets not strictly sorted in row " + std::to_string(u));
        }
    }
    // symmetry, reported with the offending pair
    for (std::size_t u = 0; u < g.n_nodes; ++u)
        for (std::size_t e = g.csr_offsets[u]; e < g.csr_offsets[u + 1]; ++e) {
            const NodeId v = g.csr_targets[e];
            if (!row_contains(g, static_cast<std::size_t>(v), static_cast<NodeId>(u)))
                throw std::runtime_error("non-symmetric edge list: " +
                                         node_pair(static_cast<NodeId>(u), v) + " present, " +
                                         node_pair(v, static_cast<NodeId>(u)) + " missing");
        }

    if (g.features.rows() != g.n_nodes) throw std::runtime_error("feature row count != n_nodes");
    if (!g.features.all_finite()) throw std::runtime_error("non-finite feature value");
    if (g.labels.size() != g.n_nodes) throw std::runtime_error("label count != n_nodes");
    if (g.n_classes < 1) throw std::runtime_error("n_classes must be >= 1");
    for (std::size_t i = 0; i < g.n_nodes; ++i)
        if (g.labels[i] < 0 || g.labels[i] >= g.n_classes)
            throw std::runtime_error("label out of range at node " + std::to_string(i) + ": " +
                                     std::to_string(g.labels[i]));
}

void validate_split(const Graph& g, const Split& s) {
    std::vector<std::uint8_t> seen(g.n_nodes, 0);
    auto check = [&](const std::vector<NodeId>& ids, const char* name) {
        if (ids.empty()) throw std::runtime_error(std::string(name) + " split is empty");
        for (NodeId v : ids) {
            if (v < 0 || static_cast<std::size_t>(v) >= g.n_nodes)
                throw std::runtime_error(std::string(name) + " split id out of range: " + std::to_string(v));
            if (seen[static_cast<std::size_t>(v)]++)
                throw std::runtime_error("split sets are not disjoint at node " + std::to_string(v));
        }
    };
    check(s.train_ids, "train");
    check(s.val_ids, "val");
    check(s.test_ids, "test");
}

NormalizedAdjacency normalize(const Graph& g, NormMode mode, bool self_loops) {
    NormalizedAdjacency a;
    a.n_nodes = g.n_nodes;
    a.mode = mode;
    a.self_loops = self_loops;

    std::vector<double> deg(g.n_nodes);
    for (std::size_t u = 0; u < g.n_nodes; ++u) {
        deg[u] = static_cast<double>(g.degree(u)) + (self_loops ? 1.0 : 0.0);
        if (deg[u] == 0.0)
            throw std::runtime_error("isolated node " + std::to_string(u) +
                                     " has zero degree without self-loops; cannot normalize");
    }

    a.offsets.assign(g.n_nodes + 1, 0);
    for (std::size_t u = 0; u < g.n_nodes; ++u)
        a.offsets[u + 1] = a.offsets[u] + g.degree(u) + (self_loops ? 1 : 0);
    a.targets.resize(a.offsets[g.n_nodes]);
    a.weights.resize(a.offsets[g.n_nodes]);

    for (std::size_t u = 0; u < g.n_nodes; ++u) {
        std::size_t w = a.offsets[u];
        bool loop_written = false;
        auto push = [&](NodeId v) {
            a.targets[w] = v;
            a.weights[w] = mode == NormMode::row ? 1.0 / deg[u]
                                                 : 1.0 / std::sqrt(deg[u] * deg[static_cast<std::size_t>(v)]);
            ++w;
        };
        for (std::size_t e = g.csr_offsets[u]; e < g.csr_offsets[u + 1]; ++e) {
            const NodeId v = g.csr_targets[e];
            if (self_loops && !loop_written && static_cast<std::size_t>(v) > u) {
                push(static_cast<NodeId>(u));
                loop_written = true;
            }
            push(v);
        }
        if (self_loops && !loop_written) push(static_cast<NodeId>(u));
    }
    return a;
}

std::vector<int> flip_labels(const std::vector<int>& labels, int n_classes,
                             const std::vector<NodeId>& node_pool, double sigma,
                             std::uint64_t rng_seed) {
    if (sigma < 0.0 || sigma > 1.0) throw std::invalid_argument("sigma must lie in [0,1]");
    if (n_classes < 2) throw std::invalid_argument("label flipping needs at least 2 classes");

    std::vector<NodeId> pool = node_pool;
    std::sort(pool.begin(), pool.end());

    const std::size_t n_flip = static_cast<std::size_t>(sigma * static_cast<double>(pool.size()));
    std::vector<int> out = labels;
    if (n_flip == 0) return out;

    Rng rng = make_rng(rng_seed);
    const auto chosen = sample_indices(rng, pool.size(), n_flip);
    for (std::size_t idx : chosen) {
        const auto v = static_cast<std::size_t>(pool[idx]);
        const int old = out[v];
        int offset = static_cast<int>(uniform_int(rng, 1, n_classes - 1));
        out[v] = (old + offset) % n_classes;
    }
    return out;
}

Split subsample_train(const Split& split, double beta, std::uint64_t rng_seed) {
    if (beta <= 0.0 || beta > 1.0) throw std::invalid_argument("beta must lie in (0,1]");
    Split out = split;
    const std::size_t keep =
        static_cast<std::size_t>(std::ceil(beta * static_cast<double>(split.train_ids.size())));
    if (keep == 0) throw std::runtime_error("subsampled train set would be empty");
    if (keep >= split.train_ids.size()) return out;

    std::vector<NodeId> train = split.train_ids;
    std::sort(train.begin(), train.end());
    Rng rng = make_rng(rng_seed);
    const auto chosen = sample_indices(rng, train.size(), keep);
    out.train_ids.clear();
    out.train_ids.reserve(keep);
    for (std::size_t idx : chosen) out.train_ids.push_back(train[idx]);
    std::sort(out.train_ids.begin(), out.train_ids.end());
    return out;
}

// --- GraphPack -------------------------------------------------------------

namespace {

json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("missing file: " + p.string());
    json j;
    in >> j;
    return j;
}

std::vector<NodeId> read_id_array(const json& j, const char* key) {
    if (!j.contains(key)) throw std::runtime_error(std::string("split.json lacks key ") + key);
    std::vector<NodeId> out;
    for (const auto& v : j.at(key)) out.push_back(v.get<NodeId>());
    return out;
}

}  // namespace

GraphPack load_graphpack(const std::filesystem::path& dir) {
    const json manifest = read_json_file(dir / "manifest.json");
    const std::size_t n_nodes = manifest.at("n_nodes").get<std::size_t>();
    const std::size_t n_features = manifest.at("n_features").get<std::size_t>();
    const int n_classes = manifest.at("n_classes").get<int>();

    const auto edge_path = dir / manifest.at("edge_file").get<std::string>();
    const auto feature_path = dir / manifest.at("feature_file").get<std::string>();
    const auto label_path = dir / manifest.at("label_file").get<std::string>();
    const auto split_path = dir / manifest.at("split_file").get<std::string>();

    std::vector<std::pair<NodeId, NodeId>> edges;
    {
        std::ifstream in(edge_path);
        if (!in) throw std::runtime_error("missing file: " + edge_path.string());
        long long u, v;
        while (in >> u >> v) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
        if (!in.eof()) throw std::runtime_error("malformed edge line in " + edge_path.string());
    }

    Matrix features(n_nodes, n_features);
    {
        std::ifstream in(feature_path, std::ios::binary);
        if (!in) throw std::runtime_error("missing file: " + feature_path.string());
        in.seekg(0, std::ios::end);
        const auto bytes = static_cast<std::size_t>(in.tellg());
        const std::size_t expect = n_nodes * n_features * sizeof(float);
        if (bytes != expect)
            throw std::runtime_error("dimension mismatch: " + feature_path.string() + " holds " +
                                     std::to_string(bytes) + " bytes, expected " + std::to_string(expect));
        in.seekg(0);
        std::vector<float> raw(n_nodes * n_features);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
        for (std::size_t i = 0; i < raw.size(); ++i) features.data()[i] = static_cast<double>(raw[i]);
    }

    std::vector<int> labels;
    {
        std::ifstream in(label_path);
        if (!in) throw std::runtime_error("missing file: " + label_path.string());
        int y;
        while (in >> y) labels.push_back(y);
        if (labels.size() != n_nodes)
            throw std::runtime_error("dimension mismatch: " + std::to_string(labels.size()) +
                                     " labels for " + std::to_string(n_nodes) + " nodes");
    }

    GraphPack pack;
    pack.graph = build_graph(n_nodes, edges, std::move(features), std::move(labels), n_classes);

    const json sj = read_json_file(split_path);
    pack.split.train_ids = read_id_array(sj, "train");
    pack.split.val_ids = read_id_array(sj, "val");
    pack.split.test_ids = read_id_array(sj, "test");
    validate_split(pack.graph, pack.split);
    return pack;
}

void save_graphpack(const Graph& g, const Split& s, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    json manifest = {{"n_nodes", g.n_nodes},        {"n_features", g.n_features()},
                     {"n_classes", g.n_classes},    {"feature_file", "features.bin"},
                     {"edge_file", "edges.txt"},    {"label_file", "labels.txt"},
                     {"split_file", "split.json"}};
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";

    {
        std::ofstream out(dir / "edges.txt");
        for (std::size_t u = 0; u < g.n_nodes; ++u)
            for (std::size_t e = g.csr_offsets[u]; e < g.csr_offsets[u + 1]; ++e) {
                const NodeId v = g.csr_targets[e];
                if (static_cast<std::size_t>(v) > u) out << u << " " << v << "\n";
            }
    }
    {
        std::ofstream out(dir / "features.bin", std::ios::binary);
        std::vector<float> raw(g.features.size());
        for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<float>(g.features.data()[i]);
        out.write(reinterpret_cast<const char*>(raw.data()),
                  static_cast<std::streamsize>(raw.size() * sizeof(float)));
    }
    {
        std::ofstream out(dir / "labels.txt");
        for (int y : g.labels) out << y << "\n";
    }
    {
        json sj = {{"train", s.train_ids}, {"val", s.val_ids}, {"test", s.test_ids}};
        std::ofstream(dir / "split.json") << sj.dump() << "\n";
    }
}

// --- LabelState --------------------------------------------------------------

LabelState LabelState::initial(const Graph& g, const Split& s) {
    LabelState st;
    st.status_.assign(g.n_nodes, Status::unlabeled);
    for (NodeId v : s.val_ids) st.status_[static_cast<std::size_t>(v)] = Status::outside;
    for (NodeId v : s.test_ids) st.status_[static_cast<std::size_t>(v)] = Status::outside;
    for (NodeId v : s.train_ids) st.status_[static_cast<std::size_t>(v)] = Status::labeled;
    st.labeled_ = s.train_ids;
    std::sort(st.labeled_.begin(), st.labeled_.end());
    for (std::size_t v = 0; v < g.n_nodes; ++v)
        if (st.status_[v] == Status::unlabeled) st.unlabeled_.push_back(static_cast<NodeId>(v));
    return st;
}

void LabelState::assign_pseudo(const std::vector<std::pair<NodeId, int>>& selections, int round) {
    if (round <= 0) throw std::invalid_argument("pseudo-label round must be positive");
    for (auto [node, label] : selections) {
        auto& st = status_[static_cast<std::size_t>(node)];
        if (st != Status::unlabeled)
            throw std::runtime_error("node " + std::to_string(node) + " is not unlabeled");
        st = Status::pseudo;
        pseudo_.push_back(PseudoEntry{node, label, round});
    }
    std::erase_if(unlabeled_, [&](NodeId v) { return status_[static_cast<std::size_t>(v)] == Status::pseudo; });
}

void LabelState::validate(const Graph& g, const Split& s, int current_round) const {
    std::vector<std::uint8_t> mark(g.n_nodes, 0);
    for (NodeId v : labeled_) mark[static_cast<std::size_t>(v)] |= 1;
    for (const auto& p : pseudo_) {
        mark[static_cast<std::size_t>(p.node)] |= 2;
        if (p.round_assigned <= 0 || p.round_assigned > current_round)
            throw std::runtime_error("pseudo entry with out-of-range round");
        if (p.label < 0 || p.label >= g.n_classes) throw std::runtime_error("pseudo label out of range");
    }
    for (NodeId v : unlabeled_) mark[static_cast<std::size_t>(v)] |= 4;

    std::vector<std::uint8_t> eligible(g.n_nodes, 1);
    for (NodeId v : s.val_ids) eligible[static_cast<std::size_t>(v)] = 0;
    for (NodeId v : s.test_ids) eligible[static_cast<std::size_t>(v)] = 0;

    for (std::size_t v = 0; v < g.n_nodes; ++v) {
        const auto m = mark[v];
        if (m != 0 && m != 1 && m != 2 && m != 4)
            throw std::runtime_error("label partition overlaps at node " + std::to_string(v));
        if (eligible[v] && m == 0)
            throw std::runtime_error("eligible node " + std::to_string(v) + " missing from partition");
        if (!eligible[v] && m != 0)
            throw std::runtime_error("val/test node " + std::to_string(v) + " entered the partition");
    }
}

}  // namespace gst
