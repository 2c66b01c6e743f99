#pragma once

#include <array>
#include <vector>

#include "gst/csr.hpp"
#include "gst/matrix.hpp"

namespace gst {

/// Divides logits by a fitted temperature; argmax-preserving for any T > 0.
struct TemperatureScaler {
    double temperature = 1.0;
};

/// Ensemble of three probability sources: temperature-scaled softmax, raw
/// softmax, and the uniform distribution, mixed with simplex weights
/// (scaled, raw, uniform).
struct EtsCalibrator {
    double temperature = 1.0;
    std::array<double, 3> weights = {1.0, 0.0, 0.0};
};

/// Mean negative log-likelihood of the labels under probability rows.
double nll(const Matrix& probs, const std::vector<int>& labels);

/// NLL of softmax(logits / T); the temperature-fit objective.
double nll_at_temperature(const Matrix& logits, const std::vector<int>& labels, double temperature);

/// Minimize validation NLL over log T in [ln 0.05, ln 20] by golden-section
/// search to 1e-4. Falls back to T=1 (with a warning) when the validation
/// labels contain a single class, and never returns a temperature whose NLL
/// exceeds the T=1 baseline.
TemperatureScaler fit_temperature(const Matrix& val_logits, const std::vector<int>& val_labels);

/// Temperature first, then mixture weights over the 2-simplex by projected
/// grid with step 0.01. The grid contains (1,0,0), so the fitted ETS NLL
/// never exceeds the fitted TS NLL.
EtsCalibrator fit_ets(const Matrix& val_logits, const std::vector<int>& val_labels);

Matrix apply(const TemperatureScaler& c, const Matrix& logits);
Matrix apply(const EtsCalibrator& c, const Matrix& logits);

/// Expected calibration error with n_bins equal-width confidence bins over
/// the max class probability, restricted to node_set.
double ece(const Matrix& probs, const std::vector<int>& labels, const std::vector<NodeId>& node_set,
           int n_bins = 15);

}  // namespace gst
