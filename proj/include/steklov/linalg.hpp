#pragma once

#include <cstddef>
#include <vector>

namespace steklov {

using Vector = std::vector<double>;

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  Vector column(std::size_t j) const;
  Vector operator*(const Vector& x) const;
  double max_asymmetry() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(const Vector& x, const Vector& y);
double norm2(const Vector& x);

// Lower Cholesky factor L with B = L L^T. Throws a resolution error if B is
// not numerically positive definite.
Matrix cholesky(const Matrix& B);

// Eigenpairs sorted ascending; vectors holds the requested lowest ones as columns.
struct EigenSystem {
  Vector values;
  Matrix vectors;
};

// Symmetric tridiagonal eigenvalues by implicit QL (d: diagonal, e: off-diagonal
// with e[i] coupling i and i+1). Result ascending.
Vector tridiagonal_eigenvalues(Vector d, Vector e);

// Full symmetric eigensolve. Householder reduction, implicit QL for the
// spectrum and inverse iteration for the lowest n_vectors eigenvectors.
EigenSystem symmetric_eigen(const Matrix& C, std::size_t n_vectors);

// A u = sigma B u with B SPD. Vectors are B-orthonormal.
EigenSystem generalized_eigen(const Matrix& A, const Matrix& B, std::size_t n_vectors);
// Same with A diagonal (entries a).
EigenSystem generalized_eigen_diag(const Vector& a, const Matrix& B, std::size_t n_vectors);

}  // namespace steklov
