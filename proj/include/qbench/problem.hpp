#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qbench/linalg.hpp"

namespace qbench {

class RandomStream;

enum class FrontShape { Convex, Linear, Concave };  // C, I, J

inline constexpr double kDefaultKappa = 1e3;

/// One of the 54 classes, plus the dimension and conditioning it is
/// instantiated with.
struct ProblemClass {
  int case_id = 1;      // 1..9
  bool aligned = true;  // '|' (true) or '/'
  FrontShape shape = FrontShape::Convex;
  int dimension = 2;
  double kappa = kDefaultKappa;

  static ProblemClass parse(std::string_view name, int dimension, double kappa = kDefaultKappa);

  std::string name() const;
  // C -> 2, I -> 1, J -> 1/2
  double power() const;
  // 2/, 3/ and 4/ need a two-dimensional generalized eigenspace.
  bool needsDuplicateEigenvalue() const { return !aligned && case_id >= 2 && case_id <= 4; }
};

// All 54 class names in case-major order: 1|C 1|I 1|J 1/C ... 9/J.
std::vector<std::string> allClassNames();

struct AffineParams {
  double a1 = 1.0;
  double a2 = 1.0;
  double b1 = 0.0;
  double b2 = 0.0;
};

// log10(a_i) uniform on [0, 6], then b_i uniform on [-a_i, a_i].
AffineParams sampleAffine(RandomStream& stream);

/// A fully specified bi-objective problem
///   f_i(x) = a_i/2 [(x - x_i*)^T U_i D_i U_i^T (x - x_i*)]^{s/2} + b_i.
/// After editing any parameter call finalize() to refresh the derived fields.
struct Instance {
  ProblemClass problem_class;
  std::uint64_t index = 0;
  Matrix u1, u2;
  Vector d1, d2;
  Vector x1_star, x2_star;
  double a1 = 1.0, a2 = 1.0;
  double b1 = 0.0, b2 = 0.0;
  double s = 2.0;

  // derived
  Matrix h1, h2;
  Vector delta;
  double g_weight = 0.5;

  std::size_t dimension() const { return x1_star.size(); }
  void finalize();
  Instance withAffine(const AffineParams& affine) const;
};

struct Spectrum {
  Vector values;
  std::optional<std::pair<std::size_t, std::size_t>> duplicate_positions;
};

/// Ellipsoid spectrum kappa^{k/(m-1)}, randomly permuted. With `duplicate` the
/// (d-1)-dimensional spectrum is used and one value is repeated.
Spectrum buildSpectrum(RandomStream& stream, std::size_t d, double kappa, bool duplicate);

// Duplicated spectrum whose repeated value sits at the given positions.
Spectrum buildSpectrumWithDuplicateAt(RandomStream& stream, std::size_t d, double kappa,
                                      std::size_t i, std::size_t j);

// Orthogonal matrix with U e_axis = e_axis: row and column `axis` of the raw
// Gaussian matrix are zeroed and the diagonal entry set to one.
Matrix sampleConstrainedOrthogonal(RandomStream& stream, std::size_t d, std::size_t axis);

struct Realignment {
  Matrix u1, u2;
  Vector delta;         // U^T delta, numerically e_column
  std::size_t column = 0;  // index k of the basis vector delta was rotated onto
};

Realignment realignCase9(RandomStream& stream, const Matrix& u1, const Matrix& u2,
                         const Vector& delta);

Instance sampleInstance(const ProblemClass& problem_class, std::uint64_t index);

struct Objectives {
  double f1;
  double f2;
};

Objectives evaluate(const Instance& inst, std::span<const double> x);

struct Gradients {
  Vector g1;
  Vector g2;
};

// DomainError at x = x_i* when s < 2.
Gradients gradient(const Instance& inst, std::span<const double> x);

// (x - x*)^T H (x - x*), evaluated as ||sqrt(D) U^T (x - x*)||^2.
double quadraticForm(const Matrix& u, const Vector& d, std::span<const double> x,
                     std::span<const double> center);

struct InvariantCheck {
  std::string name;
  bool passed;
  double value;  // residual or measured quantity
};

struct InvariantReport {
  std::vector<InvariantCheck> checks;

  bool passed() const;
  std::vector<std::string> failedChecks() const;
  const InvariantCheck* find(std::string_view name) const;
};

InvariantReport classInvariantReport(const Instance& inst);

}  // namespace qbench
