#include "gst/calibration.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace gst {

double nll(const Matrix& probs, const std::vector<int>& labels) {
    if (probs.rows() != labels.size()) throw std::invalid_argument("nll: row/label count mismatch");
    if (probs.rows() == 0) throw std::invalid_argument("nll: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < probs.rows(); ++i)
        s -= std::log(probs(i, static_cast<std::size_t>(labels[i])));
    return s / static_cast<double>(probs.rows());
}

double nll_at_temperature(const Matrix& logits, const std::vector<int>& labels, double temperature) {
    double s = 0.0;
    std::vector<double> row(logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const double* z = logits.row(i);
        for (std::size_t j = 0; j < logits.cols(); ++j) row[j] = z[j] / temperature;
        s += log_sum_exp(row.data(), row.size()) - row[static_cast<std::size_t>(labels[i])];
    }
    return s / static_cast<double>(logits.rows());
}

namespace {

bool single_class(const std::vector<int>& labels) {
    for (std::size_t i = 1; i < labels.size(); ++i)
        if (labels[i] != labels[0]) return false;
    return true;
}

void check_fit_inputs(const Matrix& val_logits, const std::vector<int>& val_labels) {
    if (val_logits.rows() != val_labels.size())
        throw std::invalid_argument("calibration: logit rows and labels disagree");
    if (val_logits.rows() < 2) throw std::invalid_argument("calibration needs >= 2 validation nodes");
    if (val_logits.cols() < 2) throw std::invalid_argument("calibration needs >= 2 classes");
}

}  // namespace

TemperatureScaler fit_temperature(const Matrix& val_logits, const std::vector<int>& val_labels) {
    check_fit_inputs(val_logits, val_labels);
    if (single_class(val_labels)) {
        std::fprintf(stderr, "[calibration] warning: single-class validation set, keeping T=1\n");
        return TemperatureScaler{1.0};
    }

    auto f = [&](double log_t) { return nll_at_temperature(val_logits, val_labels, std::exp(log_t)); };

    // golden-section on log T; the objective is unimodal in 1/T
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(0.05), b = std::log(20.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-4) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    const double t_star = std::exp(0.5 * (a + b));
    // T=1 lies inside the bracket; keep it if the search landed worse
    if (nll_at_temperature(val_logits, val_labels, t_star) >
        nll_at_temperature(val_logits, val_labels, 1.0))
        return TemperatureScaler{1.0};
    return TemperatureScaler{t_star};
}

EtsCalibrator fit_ets(const Matrix& val_logits, const std::vector<int>& val_labels) {
    check_fit_inputs(val_logits, val_labels);
    EtsCalibrator ets;
    ets.temperature = fit_temperature(val_logits, val_labels).temperature;
    if (single_class(val_labels)) return ets;

    const std::size_t n = val_logits.rows(), c = val_logits.cols();
    Matrix scaled = apply(TemperatureScaler{ets.temperature}, val_logits);
    Matrix raw = softmax_rows(val_logits);
    const double unif = 1.0 / static_cast<double>(c);

    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 100; ++i) {
        for (int j = 0; j <= 100 - i; ++j) {
            const double w1 = i / 100.0, w2 = j / 100.0, w3 = 1.0 - w1 - w2;
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const auto y = static_cast<std::size_t>(val_labels[r]);
                s -= std::log(w1 * scaled(r, y) + w2 * raw(r, y) + w3 * unif);
            }
            if (s < best) {
                best = s;
                ets.weights = {w1, w2, w3};
            }
        }
    }
    return ets;
}

Matrix apply(const TemperatureScaler& c, const Matrix& logits) {
    Matrix out = logits;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] /= c.temperature;
    return softmax_rows(std::move(out));
}

Matrix apply(const EtsCalibrator& c, const Matrix& logits) {
    Matrix scaled = apply(TemperatureScaler{c.temperature}, logits);
    Matrix raw = softmax_rows(logits);
    const double unif = 1.0 / static_cast<double>(logits.cols());
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = c.weights[0] * scaled.data()[i] + c.weights[1] * raw.data()[i] + c.weights[2] * unif;
    return out;
}

double ece(const Matrix& probs, const std::vector<int>& labels, const std::vector<NodeId>& node_set,
           int n_bins) {
    if (node_set.empty()) throw std::invalid_argument("ece over an empty node set");
    std::vector<double> conf_sum(n_bins, 0.0), acc_sum(n_bins, 0.0);
    std::vector<std::size_t> count(n_bins, 0);
    for (NodeId v : node_set) {
        const auto i = static_cast<std::size_t>(v);
        const double* p = probs.row(i);
        const std::size_t pred = argmax_row(p, probs.cols());
        const double conf = p[pred];
        int b = static_cast<int>(conf * n_bins);
        b = std::min(b, n_bins - 1);
        conf_sum[b] += conf;
        acc_sum[b] += pred == static_cast<std::size_t>(labels[i]) ? 1.0 : 0.0;
        count[b]++;
    }
    double e = 0.0;
    const double n = static_cast<double>(node_set.size());
    for (int b = 0; b < n_bins; ++b)
        if (count[b]) e += std::abs(acc_sum[b] - conf_sum[b]) / n;
    return e;
}

}  // namespace gst
