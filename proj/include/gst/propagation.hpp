#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "gst/csr.hpp"
#include "gst/graph.hpp"
#include "gst/matrix.hpp"

namespace gst {

struct PprConfig {
    double alpha = 0.1;  // teleport probability
    int steps = 10;      // power-iteration cap H
    double tol = 1e-9;   // early exit on max-abs update; 0 disables
};

/// H-step personalized-PageRank power iteration
///   X(h) = (1-alpha) A~ X(h-1) + alpha X(0),   X(0) = masked_logits,
/// approximating alpha (I - (1-alpha) A~)^{-1} X(0) with geometric error.
/// A~ must be row-stochastic.
Matrix ppr_propagate(const NormalizedAdjacency& adj_row, const Matrix& masked_logits,
                     const PprConfig& cfg);

/// Propagated logits for one anchored set plus per-candidate single-source
/// propagations, composable without re-propagating.
///
/// A candidate's source matrix is rank-1 (zero except its own logit row), and
/// propagation is linear, so each delta is kept factored as
/// (PPR vector of the source node) x (logit row). When the factored store
/// would exceed the memory cap, compose() falls back to propagating the
/// jointly masked matrix per call.
class PropagationState {
public:
    PropagationState(const NormalizedAdjacency& adj_row, const Matrix& teacher_logits,
                     std::vector<NodeId> anchored, std::vector<NodeId> candidates,
                     const PprConfig& cfg, double delta_memory_cap_mb = 1024.0);

    const Matrix& base() const { return base_; }
    const std::vector<NodeId>& anchored() const { return anchored_; }
    const std::vector<NodeId>& candidates() const { return candidates_; }
    std::size_t n_nodes() const { return n_; }
    std::size_t n_classes() const { return c_; }
    bool deltas_precomputed() const { return precomputed_; }

    /// Delta matrix of one candidate: the propagation of the matrix that is
    /// zero everywhere except that candidate's logit row.
    Matrix candidate_delta(NodeId node) const;

    /// base + sum of the deltas of S (indices into candidates(), ascending).
    Matrix compose_indices(const std::vector<std::size_t>& subset) const;

    /// Same, keyed by candidate node ids.
    Matrix compose(const std::vector<NodeId>& subset_nodes) const;

    /// Composed logit row of a single node: out[c] = base(v,c) + sum over the
    /// subset of ppr[v] * logit_row[c]. Matches compose_indices row for row.
    void composed_row(NodeId v, const std::vector<std::size_t>& subset, double* out) const;

    std::size_t index_of(NodeId node) const;

private:
    const NormalizedAdjacency& adj_;
    PprConfig cfg_;
    std::size_t n_, c_;
    std::vector<NodeId> anchored_;
    std::vector<NodeId> candidates_;
    std::unordered_map<NodeId, std::size_t> candidate_index_;
    Matrix base_;          // n x C
    Matrix masked_input_;  // n x C; anchored teacher-logit rows, zero elsewhere
    Matrix candidate_rows_;  // K x C teacher-logit rows of the candidates
    Matrix ppr_vectors_;     // K x n, row j = PPR vector of candidate j's source
    bool precomputed_ = false;
};

PropagationState build_state(const NormalizedAdjacency& adj_row, const Matrix& teacher_logits,
                             const std::vector<NodeId>& anchored,
                             const std::vector<NodeId>& candidates, const PprConfig& cfg,
                             double delta_memory_cap_mb = 1024.0);

/// Test utility: on a small graph, compares the finite-difference feature
/// influence distribution of a linear GCN surrogate (identity activations,
/// one weight matrix shared across layers) against the L-step random-walk
/// rows of A~^L. Returns the max total-variation distance over nodes.
double influence_vs_random_walk_check(const NormalizedAdjacency& adj_row, int n_layers,
                                      std::uint64_t seed = 1);

}  // namespace gst
