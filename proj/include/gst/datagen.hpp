#pragma once

#include <cstdint>
#include <vector>

#include "gst/graph.hpp"

namespace gst {

/// Planted-partition citation-style generator: homophilous sparse graph,
/// bag-of-words binary features with per-class topic vocabularies, and a
/// fixed-size-per-class train split. Fully deterministic given the seed.
struct SynthConfig {
    std::size_t n_nodes = 2708;
    std::size_t n_features = 1433;
    int n_classes = 7;
    std::size_t n_edges = 5278;  // undirected target
    double homophily = 0.71;     // probability an edge endpoint pair shares a class
    std::size_t topic_words_per_class = 140;
    std::size_t words_per_node_lo = 12;
    std::size_t words_per_node_hi = 26;
    double topic_word_prob = 0.24;  // chance a drawn word comes from the class topic
    std::vector<double> class_weights = {0.13, 0.08, 0.155, 0.30, 0.155, 0.11, 0.07};
    std::size_t train_per_class = 20;
    std::size_t n_val = 500;
    std::size_t n_test = 1000;
    std::uint64_t seed = 7;
};

GraphPack make_synthetic_pack(const SynthConfig& cfg);

/// Erdos-Renyi graph with uniform random labels and features; small-scale
/// fixture for propagation and equivariance tests.
Graph make_er_graph(std::size_t n_nodes, double edge_prob, std::size_t n_features, int n_classes,
                    std::uint64_t seed);

}  // namespace gst
