#include "gst/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gst/rng.hpp"

namespace gst {

namespace {

void check_row_stochastic(const NormalizedAdjacency& adj) {
    if (adj.max_row_sum_deviation() > 1e-9)
        throw std::invalid_argument("propagation requires a row-stochastic adjacency");
}

void check_ppr_config(const PprConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
    if (cfg.steps < 1) throw std::invalid_argument("ppr steps must be >= 1");
    if (cfg.tol < 0.0) throw std::invalid_argument("ppr tol must be >= 0");
}

// Shared power-iteration core; x0 is also the teleport target.
Matrix power_iterate(const NormalizedAdjacency& adj, const Matrix& x0, const PprConfig& cfg,
                     bool honor_tol) {
    Matrix x = x0;
    Matrix next(x.rows(), x.cols());
    for (int h = 0; h < cfg.steps; ++h) {
        adj.multiply_into(x, next);
        double* pn = next.data();
        const double* p0 = x0.data();
        for (std::size_t i = 0; i < next.size(); ++i)
            pn[i] = (1.0 - cfg.alpha) * pn[i] + cfg.alpha * p0[i];
        if (honor_tol && cfg.tol > 0.0 && max_abs_diff(next, x) < cfg.tol) {
            std::swap(x, next);
            break;
        }
        std::swap(x, next);
    }
    return x;
}

}  // namespace

Matrix ppr_propagate(const NormalizedAdjacency& adj_row, const Matrix& masked_logits,
                     const PprConfig& cfg) {
    check_row_stochastic(adj_row);
    check_ppr_config(cfg);
    if (masked_logits.rows() != adj_row.n_nodes)
        throw std::invalid_argument("ppr_propagate: row count mismatch");
    if (!masked_logits.all_finite()) throw std::invalid_argument("ppr_propagate: non-finite input");
    return power_iterate(adj_row, masked_logits, cfg, true);
}

PropagationState::PropagationState(const NormalizedAdjacency& adj_row, const Matrix& teacher_logits,
                                   std::vector<NodeId> anchored, std::vector<NodeId> candidates,
                                   const PprConfig& cfg, double delta_memory_cap_mb)
    : adj_(adj_row),
      cfg_(cfg),
      n_(adj_row.n_nodes),
      c_(teacher_logits.cols()),
      anchored_(std::move(anchored)),
      candidates_(std::move(candidates)) {
    check_row_stochastic(adj_row);
    check_ppr_config(cfg);
    if (teacher_logits.rows() != n_) throw std::invalid_argument("teacher logits: row count mismatch");

    std::sort(anchored_.begin(), anchored_.end());
    for (std::size_t j = 0; j < candidates_.size(); ++j) {
        if (std::binary_search(anchored_.begin(), anchored_.end(), candidates_[j]))
            throw std::invalid_argument("candidate " + std::to_string(candidates_[j]) +
                                        " overlaps the anchored set");
        if (!candidate_index_.emplace(candidates_[j], j).second)
            throw std::invalid_argument("duplicate candidate " + std::to_string(candidates_[j]));
    }

    masked_input_ = Matrix(n_, c_);
    for (NodeId v : anchored_) {
        const auto i = static_cast<std::size_t>(v);
        const double* src = teacher_logits.row(i);
        double* dst = masked_input_.row(i);
        for (std::size_t j = 0; j < c_; ++j) dst[j] = src[j];
    }
    base_ = power_iterate(adj_, masked_input_, cfg_, true);

    candidate_rows_ = Matrix(candidates_.size(), c_);
    for (std::size_t j = 0; j < candidates_.size(); ++j) {
        const double* src = teacher_logits.row(static_cast<std::size_t>(candidates_[j]));
        for (std::size_t q = 0; q < c_; ++q) candidate_rows_(j, q) = src[q];
    }

    // two n x K buffers live during the batched propagation
    const double bytes = 2.0 * static_cast<double>(n_) * static_cast<double>(candidates_.size()) * 8.0;
    precomputed_ = !candidates_.empty() && bytes <= delta_memory_cap_mb * 1024.0 * 1024.0;
    if (precomputed_) {
        Matrix sources(n_, candidates_.size());
        for (std::size_t j = 0; j < candidates_.size(); ++j)
            sources(static_cast<std::size_t>(candidates_[j]), j) = 1.0;
        Matrix cols = power_iterate(adj_, sources, cfg_, true);
        ppr_vectors_ = Matrix(candidates_.size(), n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < candidates_.size(); ++j) ppr_vectors_(j, i) = cols(i, j);
    }
}

std::size_t PropagationState::index_of(NodeId node) const {
    const auto it = candidate_index_.find(node);
    if (it == candidate_index_.end())
        throw std::invalid_argument("unknown candidate " + std::to_string(node));
    return it->second;
}

Matrix PropagationState::candidate_delta(NodeId node) const {
    const std::size_t j = index_of(node);
    if (precomputed_) {
        Matrix d(n_, c_);
        const double* ppr = ppr_vectors_.row(j);
        const double* lr = candidate_rows_.row(j);
        for (std::size_t i = 0; i < n_; ++i) {
            double* di = d.row(i);
            for (std::size_t q = 0; q < c_; ++q) di[q] = ppr[i] * lr[q];
        }
        return d;
    }
    Matrix source(n_, c_);
    const double* lr = candidate_rows_.row(j);
    double* row = source.row(static_cast<std::size_t>(candidates_[j]));
    for (std::size_t q = 0; q < c_; ++q) row[q] = lr[q];
    return power_iterate(adj_, source, cfg_, false);
}

Matrix PropagationState::compose_indices(const std::vector<std::size_t>& subset) const {
    for (std::size_t j : subset)
        if (j >= candidates_.size()) throw std::invalid_argument("candidate index out of range");
    if (subset.empty()) return base_;

    if (!precomputed_) {
        // joint propagation path; runs the full step count so that composes
        // of different subsets stay comparable
        Matrix source = masked_input_;
        for (std::size_t j : subset) {
            const double* lr = candidate_rows_.row(j);
            double* row = source.row(static_cast<std::size_t>(candidates_[j]));
            for (std::size_t q = 0; q < c_; ++q) row[q] = lr[q];
        }
        return power_iterate(adj_, source, cfg_, false);
    }

    Matrix out = base_;
    for (std::size_t j : subset) {
        const double* ppr = ppr_vectors_.row(j);
        const double* lr = candidate_rows_.row(j);
        for (std::size_t i = 0; i < n_; ++i) {
            const double p = ppr[i];
            if (p == 0.0) continue;
            double* oi = out.row(i);
            for (std::size_t q = 0; q < c_; ++q) oi[q] += p * lr[q];
        }
    }
    return out;
}

Matrix PropagationState::compose(const std::vector<NodeId>& subset_nodes) const {
    std::vector<std::size_t> idx;
    idx.reserve(subset_nodes.size());
    for (NodeId v : subset_nodes) idx.push_back(index_of(v));
    std::sort(idx.begin(), idx.end());
    return compose_indices(idx);
}

void PropagationState::composed_row(NodeId v, const std::vector<std::size_t>& subset,
                                    double* out) const {
    const auto i = static_cast<std::size_t>(v);
    const double* b = base_.row(i);
    for (std::size_t q = 0; q < c_; ++q) out[q] = b[q];
    for (std::size_t j : subset) {
        const double p = ppr_vectors_(j, i);
        const double* lr = candidate_rows_.row(j);
        for (std::size_t q = 0; q < c_; ++q) out[q] += p * lr[q];
    }
}

PropagationState build_state(const NormalizedAdjacency& adj_row, const Matrix& teacher_logits,
                             const std::vector<NodeId>& anchored,
                             const std::vector<NodeId>& candidates, const PprConfig& cfg,
                             double delta_memory_cap_mb) {
    return PropagationState(adj_row, teacher_logits, anchored, candidates, cfg, delta_memory_cap_mb);
}

double influence_vs_random_walk_check(const NormalizedAdjacency& adj_row, int n_layers,
                                      std::uint64_t seed) {
    check_row_stochastic(adj_row);
    const std::size_t n = adj_row.n_nodes;
    if (n > 64) throw std::invalid_argument("influence check is a small-graph utility");
    constexpr std::size_t d = 3;

    Rng rng = make_rng(seed);
    Matrix w(d, d);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = uniform_real(rng, -1.0, 1.0);
    Matrix x(n, d);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = uniform_real(rng, -1.0, 1.0);

    // linear surrogate: one shared weight matrix per layer, no activation
    auto surrogate = [&](const Matrix& input) {
        Matrix h = input;
        for (int l = 0; l < n_layers; ++l) h = adj_row.multiply(matmul(h, w));
        return h;
    };

    // influence by central differences; exact for a linear map
    Matrix influence(n, n);  // influence(j, i) = sum of |d out_j / d x_i|
    const double eps = 1e-4;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t dim = 0; dim < d; ++dim) {
            Matrix xp = x, xm = x;
            xp(i, dim) += eps;
            xm(i, dim) -= eps;
            const Matrix fp = surrogate(xp), fm = surrogate(xm);
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t q = 0; q < d; ++q)
                    influence(j, i) += std::abs((fp(j, q) - fm(j, q)) / (2.0 * eps));
        }
    }

    // random-walk oracle: dense A~^L rows
    Matrix walk(n, n);
    for (std::size_t i = 0; i < n; ++i) walk(i, i) = 1.0;
    Matrix dense(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t e = adj_row.offsets[i]; e < adj_row.offsets[i + 1]; ++e)
            dense(i, static_cast<std::size_t>(adj_row.targets[e])) = adj_row.weights[e];
    for (int l = 0; l < n_layers; ++l) walk = matmul(walk, dense);

    double max_tv = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm += influence(j, i);
        double tv = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double inf_dist = norm > 0.0 ? influence(j, i) / norm : (i == j ? 1.0 : 0.0);
            tv += std::abs(inf_dist - walk(j, i));
        }
        max_tv = std::max(max_tv, 0.5 * tv);
    }
    return max_tv;
}

}  // namespace gst
