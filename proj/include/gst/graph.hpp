#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gst/csr.hpp"
#include "gst/matrix.hpp"

namespace gst {

/// Immutable node-classification dataset: symmetric CSR adjacency, dense
/// features, one class label per node. Node ids are dense 0..n-1.
struct Graph {
    std::size_t n_nodes = 0;
    std::size_t n_edges = 0;  // undirected edges; stored in both directions
    std::vector<std::size_t> csr_offsets;
    std::vector<NodeId> csr_targets;
    Matrix features;  // n_nodes x n_features
    std::vector<int> labels;
    int n_classes = 0;

    std::size_t n_features() const { return features.cols(); }
    std::size_t degree(std::size_t u) const { return csr_offsets[u + 1] - csr_offsets[u]; }
};

struct Split {
    std::vector<NodeId> train_ids;
    std::vector<NodeId> val_ids;
    std::vector<NodeId> test_ids;
};

/// Build a Graph from an undirected edge list. Edges are symmetrized and
/// deduplicated; self-edges (u,u) are dropped. Throws on out-of-range
/// endpoints or labels.
Graph build_graph(std::size_t n_nodes, const std::vector<std::pair<NodeId, NodeId>>& edges,
                  Matrix features, std::vector<int> labels, int n_classes);

/// Check every Graph invariant; throws std::runtime_error naming the first
/// violation (including the offending pair for an asymmetric adjacency).
void validate_graph(const Graph& g);

/// Splits must be pairwise disjoint, in range, and non-empty.
void validate_split(const Graph& g, const Split& s);

/// Self-loop insertion + degree normalization. Errors on an isolated node
/// when self_loops are off (its degree would be zero).
NormalizedAdjacency normalize(const Graph& g, NormMode mode, bool self_loops);

/// Flip the labels of exactly floor(sigma * |pool|) distinct pool nodes,
/// each to a uniformly-drawn *different* class. The choice depends only on
/// the pool as a set and the seed.
std::vector<int> flip_labels(const std::vector<int>& labels, int n_classes,
                             const std::vector<NodeId>& node_pool, double sigma,
                             std::uint64_t rng_seed);

/// Keep a uniform ceil(beta * |train|) subset of the training ids; val and
/// test pass through untouched.
Split subsample_train(const Split& split, double beta, std::uint64_t rng_seed);

// --- GraphPack on-disk format -------------------------------------------
//
//   manifest.json   {"n_nodes","n_features","n_classes",
//                    "feature_file","edge_file","label_file","split_file"}
//   edges.txt       one "u v" per line; either or both directions; the
//                   loader symmetrizes and deduplicates
//   features.bin    row-major float32 little-endian, n_nodes x n_features
//   labels.txt      line i = label of node i
//   split.json      {"train":[...],"val":[...],"test":[...]}

struct GraphPack {
    Graph graph;
    Split split;
};

GraphPack load_graphpack(const std::filesystem::path& dir);
void save_graphpack(const Graph& g, const Split& s, const std::filesystem::path& dir);

// --- Per-round label bookkeeping ------------------------------------------

struct PseudoEntry {
    NodeId node;
    int label;  // teacher argmax at assignment time; never revised
    int round_assigned;
};

/// Partition of the train-eligible nodes into labeled / pseudo-labeled /
/// unlabeled. Eligible = train ids plus every node outside train/val/test;
/// val and test nodes are never part of this universe.
class LabelState {
public:
    LabelState() = default;
    static LabelState initial(const Graph& g, const Split& s);

    const std::vector<NodeId>& labeled() const { return labeled_; }
    const std::vector<PseudoEntry>& pseudo() const { return pseudo_; }
    const std::vector<NodeId>& unlabeled() const { return unlabeled_; }

    bool is_unlabeled(NodeId v) const { return status_[static_cast<std::size_t>(v)] == Status::unlabeled; }
    std::size_t n_eligible() const { return labeled_.size() + pseudo_.size() + unlabeled_.size(); }

    /// Move nodes from unlabeled to pseudo. Rejects nodes outside the
    /// unlabeled set and non-positive rounds.
    void assign_pseudo(const std::vector<std::pair<NodeId, int>>& selections, int round);

    /// Re-check the partition invariants; throws on violation.
    void validate(const Graph& g, const Split& s, int current_round) const;

private:
    enum class Status : std::uint8_t { outside, labeled, pseudo, unlabeled };
    std::vector<NodeId> labeled_;
    std::vector<PseudoEntry> pseudo_;
    std::vector<NodeId> unlabeled_;  // kept sorted by node id
    std::vector<Status> status_;
};

}  // namespace gst
