#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gst/matrix.hpp"

namespace gst {

using NodeId = std::int32_t;

enum class NormMode { row, symmetric };

inline std::string to_string(NormMode m) { return m == NormMode::row ? "row" : "symmetric"; }

/// Weighted CSR adjacency produced by `normalize`. Owns its own pattern
/// because self-loop insertion changes it relative to the source graph.
///
/// row mode:       weight(u,v) = 1 / deg~(u), so each row sums to 1
/// symmetric mode: weight(u,v) = 1 / sqrt(deg~(u) deg~(v))
/// with deg~ counted after optional self-loop insertion.
struct NormalizedAdjacency {
    std::size_t n_nodes = 0;
    NormMode mode = NormMode::row;
    bool self_loops = true;
    std::vector<std::size_t> offsets;  // length n_nodes + 1
    std::vector<NodeId> targets;
    std::vector<double> weights;

    std::size_t nnz() const { return targets.size(); }

    /// out = A~ * x, rows of x indexed by node id.
    void multiply_into(const Matrix& x, Matrix& out) const {
        const std::size_t c = x.cols();
        if (x.rows() != n_nodes) throw std::invalid_argument("spmm: row count mismatch");
        if (!out.same_shape(x)) out = Matrix(n_nodes, c);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            double* oi = out.row(i);
            for (std::size_t j = 0; j < c; ++j) oi[j] = 0.0;
            for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) {
                const double w = weights[e];
                const double* xr = x.row(static_cast<std::size_t>(targets[e]));
                for (std::size_t j = 0; j < c; ++j) oi[j] += w * xr[j];
            }
        }
    }

    Matrix multiply(const Matrix& x) const {
        Matrix out(n_nodes, x.cols());
        multiply_into(x, out);
        return out;
    }

    /// Max over rows of |sum(row) - 1|; row-stochasticity check.
    double max_row_sum_deviation() const {
        double dev = 0.0;
        for (std::size_t i = 0; i < n_nodes; ++i) {
            double s = 0.0;
            for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) s += weights[e];
            dev = std::max(dev, std::abs(s - 1.0));
        }
        return dev;
    }
};

}  // namespace gst
