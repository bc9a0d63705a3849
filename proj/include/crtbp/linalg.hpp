#pragma once

#include <cstddef>
#include <vector>

namespace crtbp::linalg {

/// Dense row-major matrix, sized for the small shooting/certification systems
/// in this toolkit (dimensions of a few dozen at most).
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

/// Eigenvalues (ascending) of a symmetric matrix via cyclic Jacobi rotations.
std::vector<double> symmetric_eigenvalues(const Matrix& m);

/// Least-squares solution of A x = b (rows >= cols) by Householder QR with
/// column pivoting. Pivots below rank_tol * |largest pivot| are truncated,
/// which yields a basic solution for rank-deficient systems; Newton steps on
/// shooting systems with a one-dimensional family direction rely on this.
std::vector<double> qr_least_squares(const Matrix& a, const std::vector<double>& b,
                                     double rank_tol = 1e-12);

} // namespace crtbp::linalg
