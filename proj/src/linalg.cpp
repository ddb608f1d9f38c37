#include "qbench/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qbench/error.hpp"
#include "qbench/rng.hpp"

namespace qbench {

namespace {

void requireSquare(const Matrix& m, const char* what) {
  if (!m.square() || m.rows() == 0) {
    throw ValidationError(std::string(what) + ": matrix must be square and non-empty");
  }
}

// Gaussian elimination with partial pivoting. Zero pivots are nudged so that
// nearly singular shifted systems still yield a usable direction.
Vector solveGeneral(Matrix a, Vector b) {
  const std::size_t n = a.rows();
  const double tiny = 1e-300 + 1e-16 * a.maxAbs();
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t p = j;
    for (std::size_t i = j + 1; i < n; ++i)
      if (std::abs(a(i, j)) > std::abs(a(p, j))) p = i;
    if (p != j) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a(j, k), a(p, k));
      std::swap(b[j], b[p]);
    }
    if (std::abs(a(j, j)) < tiny) a(j, j) = tiny;
    for (std::size_t i = j + 1; i < n; ++i) {
      const double m = a(i, j) / a(j, j);
      for (std::size_t k = j; k < n; ++k) a(i, k) -= m * a(j, k);
      b[i] -= m * b[j];
    }
  }
  for (std::size_t j = n; j-- > 0;) {
    double s = b[j];
    for (std::size_t k = j + 1; k < n; ++k) s -= a(j, k) * b[k];
    b[j] = s / a(j, j);
  }
  return b;
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

Matrix Matrix::fromRows(std::size_t rows, std::size_t cols, std::span<const double> entries) {
  if (entries.size() != rows * cols) {
    throw ValidationError("matrix entry count " + std::to_string(entries.size()) +
                          " does not match " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
  Matrix m(rows, cols);
  std::copy(entries.begin(), entries.end(), m.data_.begin());
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

void Matrix::setColumn(std::size_t j, std::span<const double> values) {
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

void Matrix::swapColumns(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::maxAbs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Matrix::frobeniusNorm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Matrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
  return s;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ValidationError("matrix product: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("matrix difference: shapes differ");
  }
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw ValidationError("matrix-vector product: size mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Vector axpy(double alpha, std::span<const double> x, std::span<const double> y) {
  Vector r(y.begin(), y.end());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += alpha * x[i];
  return r;
}

double asymmetry(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - a(j, i)));
  return m;
}

double orthogonalityDefect(const Matrix& q) {
  const Matrix g = q.transpose() * q;
  return (g - Matrix::identity(g.rows())).maxAbs();
}

Matrix gramSchmidt(const Matrix& m, bool /*fix_first_column*/) {
  // Column 0 is never projected, so it keeps its direction whether or not the
  // caller asks for it.
  requireSquare(m, "gramSchmidt");
  const std::size_t n = m.rows();
  Matrix q = m;
  for (std::size_t j = 0; j < n; ++j) {
    Vector v = q.column(j);
    double len = 0.0;
    // a second pass restores orthogonality lost to cancellation
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        const Vector qk = q.column(k);
        const double proj = dot(qk, v);
        for (std::size_t i = 0; i < n; ++i) v[i] -= proj * qk[i];
      }
      if (pass == 0) len = norm(v);
    }
    if (len < 1e-10) {
      throw DegeneracyError("gramSchmidt: column " + std::to_string(j) +
                            " is linearly dependent on its predecessors");
    }
    len = norm(v);
    for (double& x : v) x /= len;
    q.setColumn(j, v);
  }
  return q;
}

Matrix sampleOrthogonal(RandomStream& stream, std::size_t d) {
  if (d == 0) throw ValidationError("sampleOrthogonal: dimension must be positive");
  for (int attempt = 0;; ++attempt) {
    Matrix raw(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) raw(i, j) = stream.nextGaussian();
    try {
      return gramSchmidt(raw);
    } catch (const DegeneracyError&) {
      if (attempt >= 3) throw;
    }
  }
}

Matrix cholesky(const Matrix& h) {
  requireSquare(h, "cholesky");
  const std::size_t n = h.rows();
  const double threshold = 1e-14 * std::abs(h.trace());
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = h(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > threshold)) {
      throw NotPositiveDefiniteError("cholesky: non-positive pivot at index " +
                                     std::to_string(j));
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = h(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Vector forwardSubstitute(const Matrix& lower, std::span<const double> b) {
  const std::size_t n = lower.rows();
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * y[k];
    y[i] = s / lower(i, i);
  }
  return y;
}

Vector backSubstituteTransposed(const Matrix& lower, std::span<const double> b) {
  const std::size_t n = lower.rows();
  Vector y(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= lower(k, i) * y[k];
    y[i] = s / lower(i, i);
  }
  return y;
}

Vector solveSpd(const Matrix& h, std::span<const double> b) {
  const Matrix l = cholesky(h);
  return backSubstituteTransposed(l, forwardSubstitute(l, b));
}

EigenDecomposition symmetricEigen(const Matrix& h) {
  requireSquare(h, "symmetricEigen");
  const std::size_t n = h.rows();
  Matrix a = h;
  Matrix v = Matrix::identity(n);
  const double threshold = 1e-12 * h.frobeniusNorm();

  auto maxOffDiagonal = [&] {
    double m = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) m = std::max(m, std::abs(a(p, q)));
    return m;
  };

  int sweep = 0;
  while (maxOffDiagonal() > threshold) {
    if (++sweep > 100) throw NumericError("symmetricEigen: no convergence in 100 sweeps");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle from the classical Jacobi formulation (Golub & Van Loan 8.5).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  EigenDecomposition result{Matrix(n, n), Vector(n)};
  for (std::size_t k = 0; k < n; ++k) {
    result.values[k] = a(order[k], order[k]);
    result.vectors.setColumn(k, v.column(order[k]));
  }
  return result;
}

std::vector<GeneralizedEigenpair> generalizedEigenpairs(const Matrix& h1, const Matrix& h2) {
  requireSquare(h1, "generalizedEigenpairs");
  requireSquare(h2, "generalizedEigenpairs");
  if (h1.rows() != h2.rows()) throw ValidationError("generalizedEigenpairs: size mismatch");
  const std::size_t n = h1.rows();
  const Matrix l = cholesky(h2);
  cholesky(h1);  // positive definiteness of the first matrix is part of the contract

  // reduced = L^{-1} H1 L^{-T}
  Matrix x(n, n);
  for (std::size_t j = 0; j < n; ++j) x.setColumn(j, forwardSubstitute(l, h1.column(j)));
  const Matrix xt = x.transpose();
  Matrix reduced(n, n);
  for (std::size_t j = 0; j < n; ++j) reduced.setColumn(j, forwardSubstitute(l, xt.column(j)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double m = 0.5 * (reduced(i, j) + reduced(j, i));
      reduced(i, j) = m;
      reduced(j, i) = m;
    }

  const EigenDecomposition eig = symmetricEigen(reduced);
  std::vector<GeneralizedEigenpair> pairs;
  pairs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector v = backSubstituteTransposed(l, eig.vectors.column(k));
    double lambda = eig.values[k];
    for (int step = 0; step < 3; ++step) {
      const double len = norm(v);
      for (double& c : v) c /= len;
      lambda = dot(v, h1 * v) / dot(v, h2 * v);
      if (step == 2) break;
      // inverse iteration polishes the back-transformed vector
      Matrix shifted(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) shifted(i, j) = h1(i, j) - lambda * h2(i, j);
      Vector w = solveGeneral(shifted, h2 * v);
      if (dot(w, v) < 0.0)
        for (double& c : w) c = -c;
      if (!std::isfinite(norm(w)) || norm(w) == 0.0) break;
      v = std::move(w);
    }
    pairs.push_back({lambda, std::move(v)});
  }
  return pairs;
}

double conditionNumber(const Matrix& h) {
  const EigenDecomposition eig = symmetricEigen(h);
  if (!(eig.values.front() > 0.0)) {
    throw NotPositiveDefiniteError("conditionNumber: matrix is not positive definite");
  }
  return eig.values.back() / eig.values.front();
}

}  // namespace qbench
