#pragma once

#include <cstddef>
#include <vector>

namespace htmax {

/// Row-major dense matrix. All matrices appearing in the HT arithmetic are
/// small (leaf frames, Gram blocks, projected eigenproblems), so a plain
/// contiguous buffer is all we need.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

/// Thin QR: for A (m x n) returns Q (m x k) with orthonormal columns and
/// R (k x n) upper triangular, k = min(m, n), such that A = Q R.
struct QrResult {
    Matrix q;
    Matrix r;
};
QrResult householder_qr(const Matrix& a);

/// Symmetric eigendecomposition by cyclic Jacobi sweeps. Eigenpairs are
/// returned sorted by descending eigenvalue; `vectors` holds the
/// eigenvectors as columns.
struct EighResult {
    std::vector<double> values;
    Matrix vectors;
};
EighResult jacobi_eigh(const Matrix& s);

/// Singular values of A via the eigendecomposition of A^T A (or A A^T,
/// whichever is smaller), with eigenvalues floored at 1e-14 * max before
/// the square root.
std::vector<double> gram_singular_values(const Matrix& a);

} // namespace htmax
