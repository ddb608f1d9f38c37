#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qbench {

class RandomStream;

using Vector = std::vector<double>;

/// Dense row-major matrix. Dimensions here are small (d up to a few hundred),
/// so everything is plain loops over a contiguous buffer.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> values);
  // Row-major fill; entries.size() must equal rows * cols.
  static Matrix fromRows(std::size_t rows, std::size_t cols, std::span<const double> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const { return data_; }

  Vector column(std::size_t j) const;
  void setColumn(std::size_t j, std::span<const double> values);
  void swapColumns(std::size_t a, std::size_t b);

  Matrix transpose() const;
  double maxAbs() const;
  double frobeniusNorm() const;
  double trace() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
Vector axpy(double alpha, std::span<const double> x, std::span<const double> y);  // alpha*x + y

// Largest |A_ij - A_ji|.
double asymmetry(const Matrix& a);
// max |Q^T Q - I|.
double orthogonalityDefect(const Matrix& q);

/// Modified Gram-Schmidt over the columns, in index order. Column 0 is only
/// normalized, so with fix_first_column the caller may rely on its direction
/// being kept. A residual column norm below 1e-10 raises DegeneracyError.
Matrix gramSchmidt(const Matrix& m, bool fix_first_column = false);

// d*d standard normal entries (row-major) followed by Gram-Schmidt; up to
// three redraws on degeneracy.
Matrix sampleOrthogonal(RandomStream& stream, std::size_t d);

// Lower triangular L with L L^T = h. Pivots <= 1e-14 * trace raise
// NotPositiveDefiniteError.
Matrix cholesky(const Matrix& h);

// Solves L y = b and L^T y = b for lower-triangular L.
Vector forwardSubstitute(const Matrix& lower, std::span<const double> b);
Vector backSubstituteTransposed(const Matrix& lower, std::span<const double> b);

// Solves h x = b for symmetric positive definite h.
Vector solveSpd(const Matrix& h, std::span<const double> b);

struct EigenDecomposition {
  Matrix vectors;  // columns are eigenvectors
  Vector values;   // ascending
};

// Cyclic Jacobi; stops when every off-diagonal entry is <= 1e-12 * ||H||_F.
EigenDecomposition symmetricEigen(const Matrix& h);

struct GeneralizedEigenpair {
  double value;   // lambda with H1 v = lambda H2 v
  Vector vector;  // unit Euclidean length
};

// Cholesky reduction of the symmetric-definite pencil (h1, h2). Pairs are
// sorted by ascending eigenvalue. Repeated eigenvalues come back with an
// arbitrary basis of their eigenspace.
std::vector<GeneralizedEigenpair> generalizedEigenpairs(const Matrix& h1, const Matrix& h2);

double conditionNumber(const Matrix& h);

}  // namespace qbench
