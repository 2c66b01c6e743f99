#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "gst/csr.hpp"
#include "gst/graph.hpp"
#include "gst/matrix.hpp"
#include "gst/rng.hpp"

namespace gst {

/// Two-layer graph convolution: Z = A~ (dropout(ReLU(A~ X W1 + b1)) W2) + b2
/// with symmetric-normalized A~. Serves as both teacher and student.
struct GcnModel {
    Matrix w1;               // D x h
    std::vector<double> b1;  // h
    Matrix w2;               // h x C
    std::vector<double> b2;  // C
    double dropout_rate = 0.5;
    std::uint64_t seed = 0;

    std::size_t in_dim() const { return w1.rows(); }
    std::size_t hidden_dim() const { return w1.cols(); }
    std::size_t out_dim() const { return w2.cols(); }
};

struct TrainConfig {
    double learning_rate = 0.01;
    double weight_decay = 5e-4;
    int max_epochs = 300;
    int patience = 30;  // epochs without val-accuracy improvement; 0 disables
    int hidden_dim = 16;
    double dropout_rate = 0.5;
    std::uint64_t seed = 0;
};

struct EpochRecord {
    int epoch;
    double train_loss;
    double val_acc;
};

struct TrainResult {
    GcnModel model;  // snapshot at best validation accuracy
    std::vector<EpochRecord> history;
    int best_epoch = -1;
    double best_val_acc = 0.0;
};

using LabeledNodes = std::vector<std::pair<NodeId, int>>;

/// Glorot-uniform weights, zero biases; bit-identical for identical seeds.
GcnModel init_model(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim,
                    std::uint64_t seed, double dropout_rate = 0.5);

/// Logits for every node. In train mode, inverted dropout is applied to the
/// hidden activations using `dropout_rng` (falls back to a stream derived
/// from the model seed when null).
Matrix forward(const GcnModel& model, const NormalizedAdjacency& adj_sym, const Matrix& x,
               bool train_mode = false, Rng* dropout_rng = nullptr);

Matrix predict_proba(const GcnModel& model, const NormalizedAdjacency& adj_sym, const Matrix& x);

std::vector<int> argmax_labels(const Matrix& probs_or_logits);

/// Mean 0/1 accuracy of predictions on `node_set`; errors when empty.
double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels,
                const std::vector<NodeId>& node_set);

struct GcnGradients {
    Matrix w1;
    std::vector<double> b1;
    Matrix w2;
    std::vector<double> b2;
};

/// Softmax cross-entropy averaged over `training_labels` plus
/// (weight_decay/2) * squared L2 norm of every parameter tensor.
/// Dropout-free evaluation path; this is the objective the finite-difference
/// oracle probes.
double gcn_loss(const GcnModel& model, const NormalizedAdjacency& adj_sym, const Matrix& x,
                const LabeledNodes& training_labels, double weight_decay);

GcnGradients gcn_loss_grad(const GcnModel& model, const NormalizedAdjacency& adj_sym,
                           const Matrix& x, const LabeledNodes& training_labels,
                           double weight_decay, double* loss_out = nullptr);

/// Full-batch Adam on the loss above (with per-epoch dropout). Keeps the
/// parameter snapshot with the best validation accuracy; early-stops after
/// `patience` epochs without improvement. Deterministic given config.seed.
TrainResult train(GcnModel model, const NormalizedAdjacency& adj_sym, const Matrix& x,
                  const LabeledNodes& training_labels, const LabeledNodes& val,
                  const TrainConfig& config);

void save_checkpoint(const GcnModel& model, const std::filesystem::path& path);
GcnModel load_checkpoint(const std::filesystem::path& path);
void save_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path);

}  // namespace gst
