#include "gst/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace gst {

namespace {

double entropy_sum_checked(const double* p, std::size_t n, double sum) {
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("entropy: probability mass " + std::to_string(sum) +
                                    " deviates from 1 beyond tolerance");
    double h = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (p[j] < -1e-9) throw std::invalid_argument("entropy: negative probability");
        const double q = p[j] / sum;  // renormalize small deviations
        if (q > 0.0) h -= q * std::log(q);
    }
    return h;
}

}  // namespace

double entropy(const double* p, std::size_t n) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += p[j];
    return entropy_sum_checked(p, n, sum);
}

double entropy(const std::vector<double>& p) { return entropy(p.data(), p.size()); }

ObjectiveBreakdown objective(const Matrix& probs) {
    if (probs.rows() == 0) throw std::invalid_argument("objective over an empty prediction set");
    const std::size_t n = probs.rows(), c = probs.cols();
    std::vector<double> mean(c, 0.0);
    double sum_h = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* r = probs.row(i);
        sum_h += entropy(r, c);
        for (std::size_t j = 0; j < c; ++j) mean[j] += r[j];
    }
    for (std::size_t j = 0; j < c; ++j) mean[j] /= static_cast<double>(n);

    ObjectiveBreakdown b;
    b.mean_individual_entropy = sum_h / static_cast<double>(n);
    b.aggregate_entropy = entropy(mean.data(), c);
    b.value = b.aggregate_entropy - b.mean_individual_entropy;
    return b;
}

double utility(const PropagationState& state, const std::vector<std::size_t>& subset_indices,
               const std::vector<NodeId>& unlabeled) {
    if (unlabeled.empty()) throw std::invalid_argument("utility over an empty unlabeled set");
    const std::size_t c = state.n_classes();

    if (!state.deltas_precomputed()) {
        const Matrix composed = state.compose_indices(subset_indices);
        Matrix rows(unlabeled.size(), c);
        for (std::size_t i = 0; i < unlabeled.size(); ++i) {
            const double* src = composed.row(static_cast<std::size_t>(unlabeled[i]));
            double* dst = rows.row(i);
            for (std::size_t q = 0; q < c; ++q) dst[q] = src[q];
        }
        return objective(softmax_rows(std::move(rows))).value;
    }

    // row-at-a-time path; accumulation order per row matches compose_indices
    std::vector<double> row(c), mean(c, 0.0);
    double sum_h = 0.0;
    for (NodeId v : unlabeled) {
        state.composed_row(v, subset_indices, row.data());
        softmax_row(row.data(), c);
        sum_h += entropy(row.data(), c);
        for (std::size_t q = 0; q < c; ++q) mean[q] += row[q];
    }
    const double n = static_cast<double>(unlabeled.size());
    for (std::size_t q = 0; q < c; ++q) mean[q] /= n;
    return entropy(mean.data(), c) - sum_h / n;
}

double utility_nodes(const PropagationState& state, const std::vector<NodeId>& subset_nodes,
                     const std::vector<NodeId>& unlabeled) {
    std::vector<std::size_t> idx;
    idx.reserve(subset_nodes.size());
    for (NodeId v : subset_nodes) idx.push_back(state.index_of(v));
    std::sort(idx.begin(), idx.end());
    return utility(state, idx, unlabeled);
}

std::pair<double, double> mutual_information_decomposition_check(const Matrix& joint) {
    const std::size_t ny = joint.rows(), nu = joint.cols();
    double total = 0.0;
    for (std::size_t i = 0; i < joint.size(); ++i) {
        const double v = joint.data()[i];
        if (v < 0.0) throw std::invalid_argument("joint distribution has a negative entry");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("joint distribution mass != 1");

    std::vector<double> py(ny, 0.0), pu(nu, 0.0);
    for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t u = 0; u < nu; ++u) {
            py[y] += joint(y, u);
            pu[u] += joint(y, u);
        }

    // lhs: I(y;u) by the double-sum definition
    double lhs = 0.0;
    for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t u = 0; u < nu; ++u) {
            const double p = joint(y, u);
            if (p > 0.0) lhs += p * std::log(p / (py[y] * pu[u]));
        }

    // rhs: entropy of the mean conditional minus mean conditional entropy
    std::vector<double> mean_cond(nu, 0.0);
    double mean_h = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
        if (py[y] == 0.0) continue;
        std::vector<double> cond(nu);
        for (std::size_t u = 0; u < nu; ++u) {
            cond[u] = joint(y, u) / py[y];
            mean_cond[u] += py[y] * cond[u];
        }
        mean_h += py[y] * entropy(cond);
    }
    const double rhs = entropy(mean_cond) - mean_h;
    return {lhs, rhs};
}

}  // namespace gst
