#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gst/graph.hpp"
#include "gst/matrix.hpp"

namespace gst {

/// Top-K confident unlabeled nodes considered for pseudo-labeling this
/// round. Order: confidence descending, node id ascending on ties.
struct CandidatePool {
    std::vector<NodeId> nodes;
    std::vector<int> pseudo_labels;   // argmax of the calibrated probabilities
    Matrix teacher_logit_rows;        // K x C rows anchored when a candidate joins a coalition
    std::vector<double> confidences;  // calibrated max-probability, non-increasing

    std::size_t size() const { return nodes.size(); }
};

/// Utility over coalitions given as ascending candidate indices.
using UtilityFn = std::function<double(const std::vector<std::size_t>&)>;

struct BanzhafEstimate {
    double value = 0.0;  // -inf sentinel when a membership side is empty
    std::int64_t n_in = 0, n_out = 0;
    double sum_in = 0.0, sum_out = 0.0;
    double sum_sq_in = 0.0, sum_sq_out = 0.0;

    /// Sum of the two per-side mean variances; shrinks as samples accumulate.
    double variance_proxy() const;
};

enum class SamplingScheme {
    size_uniform,        // m ~ uniform{1..k}, then a uniform m-subset
    binomial_truncated,  // fair-coin membership, rejected until 1 <= |S| <= k
};

struct MsrResult {
    std::vector<BanzhafEstimate> estimates;
    std::size_t utility_calls = 0;
};

CandidatePool select_candidates(const Matrix& calibrated_probs, const Matrix& teacher_logits,
                                const LabelState& state, std::size_t pool_size);

/// Exact k-bounded Banzhaf values by enumeration of every coalition of size
/// < k, with the utility memoized per subset. Guarded to pools of <= 16.
std::vector<double> exhaustive_banzhaf(std::size_t pool_size, const UtilityFn& utility_fn,
                                       std::size_t k);

/// Maximum-sample-reuse Monte Carlo: B coalitions are drawn, the utility is
/// evaluated once per coalition, and every candidate's estimate splits the
/// same B samples by membership. Per-sample RNG streams are derived as
/// hash(seed, sample), so results are identical for any worker count.
MsrResult msr_banzhaf(std::size_t pool_size, const UtilityFn& utility_fn, std::size_t k,
                      std::size_t n_samples, std::uint64_t seed,
                      SamplingScheme scheme = SamplingScheme::size_uniform, int n_threads = 1);

/// k best candidates by value; ties broken by higher confidence, then lower
/// node id. Carries the pool's pseudo-labels through.
std::vector<std::pair<NodeId, int>> top_k_select(const std::vector<double>& values,
                                                 const CandidatePool& pool, std::size_t k);

// --- Ranking-robustness probe -------------------------------------------------

/// Dense utility table over every coalition of size <= max_coalition from a
/// pool of <= 16, indexed by bitmask.
struct UtilityTable {
    std::size_t pool_size = 0;
    std::size_t max_coalition = 0;
    std::vector<double> value;  // 2^pool_size entries; only |mask| <= max_coalition used

    double at(std::uint32_t mask) const { return value[mask]; }
    UtilityFn as_fn() const;
};

UtilityTable make_random_table(std::size_t pool_size, std::size_t max_coalition, std::uint64_t seed);
UtilityTable make_additive_table(const std::vector<double>& weights, std::size_t max_coalition);

struct RobustnessCertificate {
    bool hypotheses_met = false;
    double tau = 0.0;            // min over pairs/sizes of the oriented mean margin
    double perturbation_norm = 0.0;  // L2 radius actually applied
    int n_perturbations = 0;
    int n_clean = 0;      // perturbations with every pairwise sign preserved
    int n_inversions = 0;  // total inverted pairs across perturbations
};

/// Computes the pairwise distinguishability margins of the table, then
/// applies `n_perturbations` random perturbations of L2 norm
/// noise_scale * tau * sqrt(sum_{m=1}^{k-1} C(K-2, m-1)) to the coalition
/// values and reports how often the exact Banzhaf ordering survives.
RobustnessCertificate rank_robustness_probe(const UtilityTable& table, double noise_scale,
                                            std::size_t k, int n_perturbations = 100,
                                            std::uint64_t seed = 1);

}  // namespace gst
