#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gst {

/// Dense row-major matrix of doubles. All numerics in this project run in
/// 64-bit; on-disk feature files are 32-bit and get widened on load.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    void fill(double v) { data_.assign(data_.size(), v); }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

/// C = A * B. ikj loop order; the inner j-loop vectorizes.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions disagree");
    Matrix c(a.rows(), b.cols());
    const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (std::size_t k = 0; k < m; ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row(k);
            for (std::size_t j = 0; j < p; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

/// C = A^T * B, with A (n x m), B (n x p), C (m x p). Accumulates rank-1
/// updates row by row so both operands stream in row-major order.
inline Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("matmul_at_b: row counts disagree");
    Matrix c(a.cols(), b.cols());
    const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.row(i);
        const double* bi = b.row(i);
        for (std::size_t k = 0; k < m; ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            double* ck = c.row(k);
            for (std::size_t j = 0; j < p; ++j) ck[j] += aik * bi[j];
        }
    }
    return c;
}

/// C = A * B^T, with A (n x m), B (p x m), C (n x p).
inline Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("matmul_a_bt: column counts disagree");
    Matrix c(a.rows(), b.rows());
    const std::size_t n = a.rows(), m = a.cols(), p = b.rows();
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t k = 0; k < p; ++k) {
            const double* bk = b.row(k);
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += ai[j] * bk[j];
            ci[k] = s;
        }
    }
    return c;
}

inline void add_in_place(Matrix& a, const Matrix& b) {
    assert(a.same_shape(b));
    double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] += pb[i];
}

inline void axpy_in_place(Matrix& a, double s, const Matrix& b) {
    assert(a.same_shape(b));
    double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] += s * pb[i];
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    assert(a.same_shape(b));
    double m = 0.0;
    const double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(pa[i] - pb[i]));
    return m;
}

/// Numerically stable in-place row softmax.
inline void softmax_row(double* p, std::size_t c) {
    double mx = p[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, p[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
        p[j] = std::exp(p[j] - mx);
        sum += p[j];
    }
    for (std::size_t j = 0; j < c; ++j) p[j] /= sum;
}

inline Matrix softmax_rows(Matrix z) {
    for (std::size_t i = 0; i < z.rows(); ++i) softmax_row(z.row(i), z.cols());
    return z;
}

/// log(sum_j exp(p_j)), stable.
inline double log_sum_exp(const double* p, std::size_t c) {
    double mx = p[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, p[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) sum += std::exp(p[j] - mx);
    return mx + std::log(sum);
}

inline std::size_t argmax_row(const double* p, std::size_t c) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j)
        if (p[j] > p[best]) best = j;
    return best;
}

}  // namespace gst
