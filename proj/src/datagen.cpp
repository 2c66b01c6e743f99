#include "gst/datagen.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "gst/rng.hpp"

namespace gst {

GraphPack make_synthetic_pack(const SynthConfig& cfg) {
    if (cfg.class_weights.size() != static_cast<std::size_t>(cfg.n_classes))
        throw std::invalid_argument("class_weights size must equal n_classes");
    Rng rng = make_rng(cfg.seed);

    // class sizes proportional to class_weights, remainder to the largest
    std::vector<std::size_t> class_size(cfg.n_classes, 0);
    double wsum = 0.0;
    for (double w : cfg.class_weights) wsum += w;
    std::size_t assigned = 0;
    for (int c = 0; c < cfg.n_classes; ++c) {
        class_size[c] = static_cast<std::size_t>(cfg.class_weights[c] / wsum * static_cast<double>(cfg.n_nodes));
        assigned += class_size[c];
    }
    const auto biggest = static_cast<std::size_t>(
        std::max_element(cfg.class_weights.begin(), cfg.class_weights.end()) - cfg.class_weights.begin());
    class_size[biggest] += cfg.n_nodes - assigned;

    std::vector<int> labels(cfg.n_nodes);
    {
        std::size_t v = 0;
        for (int c = 0; c < cfg.n_classes; ++c)
            for (std::size_t i = 0; i < class_size[c]; ++i) labels[v++] = c;
        shuffle(labels, rng);
    }
    std::vector<std::vector<NodeId>> members(cfg.n_classes);
    for (std::size_t v = 0; v < cfg.n_nodes; ++v) members[labels[v]].push_back(static_cast<NodeId>(v));

    // edges: one same-or-cross class partner per node first (no isolated
    // nodes), then random pairs until the target count is reached
    std::set<std::pair<NodeId, NodeId>> edge_set;
    auto try_add = [&](NodeId u, NodeId v) {
        if (u == v) return false;
        if (u > v) std::swap(u, v);
        return edge_set.emplace(u, v).second;
    };
    auto draw_partner = [&](NodeId u) {
        const int cu = labels[static_cast<std::size_t>(u)];
        if (uniform_real(rng) < cfg.homophily) {
            const auto& m = members[cu];
            return m[uniform_u64(rng, m.size())];
        }
        NodeId v = static_cast<NodeId>(uniform_u64(rng, cfg.n_nodes));
        while (labels[static_cast<std::size_t>(v)] == cu)
            v = static_cast<NodeId>(uniform_u64(rng, cfg.n_nodes));
        return v;
    };
    for (std::size_t u = 0; u < cfg.n_nodes && edge_set.size() < cfg.n_edges; ++u) {
        for (int attempt = 0; attempt < 64; ++attempt)
            if (try_add(static_cast<NodeId>(u), draw_partner(static_cast<NodeId>(u)))) break;
    }
    std::size_t stall = 0;
    while (edge_set.size() < cfg.n_edges && stall < 1000000) {
        const NodeId u = static_cast<NodeId>(uniform_u64(rng, cfg.n_nodes));
        if (!try_add(u, draw_partner(u))) ++stall;
    }
    std::vector<std::pair<NodeId, NodeId>> edges(edge_set.begin(), edge_set.end());

    // features: per-class topic windows over the vocabulary, cyclic so the
    // last classes wrap; off-topic draws come from the whole vocabulary
    Matrix features(cfg.n_nodes, cfg.n_features);
    const std::size_t stride =
        std::max<std::size_t>(1, cfg.n_features / static_cast<std::size_t>(cfg.n_classes));
    for (std::size_t v = 0; v < cfg.n_nodes; ++v) {
        const int c = labels[v];
        const std::size_t topic_base = static_cast<std::size_t>(c) * stride;
        const std::size_t n_words =
            cfg.words_per_node_lo +
            uniform_u64(rng, cfg.words_per_node_hi - cfg.words_per_node_lo + 1);
        for (std::size_t w = 0; w < n_words; ++w) {
            std::size_t word;
            if (uniform_real(rng) < cfg.topic_word_prob)
                word = (topic_base + uniform_u64(rng, cfg.topic_words_per_class)) % cfg.n_features;
            else
                word = uniform_u64(rng, cfg.n_features);
            features(v, word) = 1.0;
        }
    }

    GraphPack pack;
    pack.graph = build_graph(cfg.n_nodes, edges, std::move(features), std::move(labels), cfg.n_classes);

    // split: train_per_class stratified, then val/test uniform from the rest
    std::vector<std::uint8_t> taken(cfg.n_nodes, 0);
    for (int c = 0; c < cfg.n_classes; ++c) {
        auto m = members[c];
        if (m.size() < cfg.train_per_class)
            throw std::runtime_error("class too small for the requested train_per_class");
        const auto idx = sample_indices(rng, m.size(), cfg.train_per_class);
        for (std::size_t i : idx) {
            pack.split.train_ids.push_back(m[i]);
            taken[static_cast<std::size_t>(m[i])] = 1;
        }
    }
    std::sort(pack.split.train_ids.begin(), pack.split.train_ids.end());

    std::vector<NodeId> rest;
    for (std::size_t v = 0; v < cfg.n_nodes; ++v)
        if (!taken[v]) rest.push_back(static_cast<NodeId>(v));
    if (rest.size() < cfg.n_val + cfg.n_test)
        throw std::runtime_error("not enough nodes for the requested val/test sizes");
    const auto picked = sample_indices(rng, rest.size(), cfg.n_val + cfg.n_test);
    for (std::size_t i = 0; i < cfg.n_val; ++i) pack.split.val_ids.push_back(rest[picked[i]]);
    for (std::size_t i = cfg.n_val; i < picked.size(); ++i) pack.split.test_ids.push_back(rest[picked[i]]);
    std::sort(pack.split.val_ids.begin(), pack.split.val_ids.end());
    std::sort(pack.split.test_ids.begin(), pack.split.test_ids.end());

    validate_split(pack.graph, pack.split);
    return pack;
}

Graph make_er_graph(std::size_t n_nodes, double edge_prob, std::size_t n_features, int n_classes,
                    std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t u = 0; u < n_nodes; ++u)
        for (std::size_t v = u + 1; v < n_nodes; ++v)
            if (uniform_real(rng) < edge_prob)
                edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    Matrix features(n_nodes, n_features);
    for (std::size_t i = 0; i < features.size(); ++i) features.data()[i] = uniform_real(rng, -1.0, 1.0);
    std::vector<int> labels(n_nodes);
    for (auto& y : labels) y = static_cast<int>(uniform_u64(rng, static_cast<std::uint64_t>(n_classes)));
    return build_graph(n_nodes, edges, std::move(features), std::move(labels), n_classes);
}

}  // namespace gst
