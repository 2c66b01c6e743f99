#pragma once

#include <utility>
#include <vector>

#include "gst/matrix.hpp"
#include "gst/propagation.hpp"

namespace gst {

/// Information-gain score of a prediction matrix:
///   value = H(row mean) - mean(row entropies),
/// non-negative by Jensen whenever every row is a distribution, and at most
/// ln C. High values mean individually confident, collectively diverse.
struct ObjectiveBreakdown {
    double mean_individual_entropy = 0.0;
    double aggregate_entropy = 0.0;
    double value = 0.0;
};

/// Shannon entropy in nats; 0 log 0 := 0. Rows off by at most 1e-6 from unit
/// mass are renormalized, larger deviations and negative entries below -1e-9
/// are errors.
double entropy(const double* p, std::size_t n);
double entropy(const std::vector<double>& p);

ObjectiveBreakdown objective(const Matrix& probs);

/// Subset utility: softmax the composed logits of S on the unlabeled rows,
/// then take the objective value. Pure; safe to call concurrently against a
/// shared state.
double utility(const PropagationState& state, const std::vector<std::size_t>& subset_indices,
               const std::vector<NodeId>& unlabeled);

double utility_nodes(const PropagationState& state, const std::vector<NodeId>& subset_nodes,
                     const std::vector<NodeId>& unlabeled);

/// Test utility: both sides of the mutual-information decomposition computed
/// independently from one discrete joint. first = double-sum I(y;u), second =
/// H(E_y[f]) - E_y[H(f)].
std::pair<double, double> mutual_information_decomposition_check(const Matrix& joint);

}  // namespace gst
