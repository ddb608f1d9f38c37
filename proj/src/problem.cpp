#include "qbench/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qbench/error.hpp"
#include "qbench/rng.hpp"

namespace qbench {

namespace {

Vector ones(std::size_t d) { return Vector(d, 1.0); }

Vector basisVector(std::size_t d, std::size_t i) {
  Vector e(d, 0.0);
  e[i] = 1.0;
  return e;
}

Vector ellipsoidSpectrum(std::size_t m, double kappa) {
  Vector v(m);
  for (std::size_t k = 0; k < m; ++k) {
    v[k] = m == 1 ? 1.0 : std::pow(kappa, static_cast<double>(k) / static_cast<double>(m - 1));
  }
  return v;
}

// max(D2/D1) / min(D2/D1)
double ratioConditioning(const Vector& d1, const Vector& d2) {
  double lo = d2[0] / d1[0];
  double hi = lo;
  for (std::size_t k = 1; k < d1.size(); ++k) {
    lo = std::min(lo, d2[k] / d1[k]);
    hi = std::max(hi, d2[k] / d1[k]);
  }
  return hi / lo;
}

Matrix rebuildHessian(const Matrix& u, const Vector& d) {
  const std::size_t n = d.size();
  Matrix h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += u(i, k) * d[k] * u(j, k);
      h(i, j) = s;
      h(j, i) = s;
    }
  return h;
}

std::size_t componentsAbove(const Vector& v, double threshold) {
  return static_cast<std::size_t>(
      std::count_if(v.begin(), v.end(), [&](double x) { return std::abs(x) > threshold; }));
}

bool nearMultipleOfHalfPi(double alpha) {
  const double quarter = std::numbers::pi / 2.0;
  const double r = std::fmod(alpha, quarter);
  return r < 1e-4 || quarter - r < 1e-4;
}

}  // namespace

ProblemClass ProblemClass::parse(std::string_view name, int dimension, double kappa) {
  checkClassName(name);
  if (dimension < 2) {
    throw ValidationError("dimension must be >= 2, got " + std::to_string(dimension));
  }
  if (!(kappa > 1.0) || !std::isfinite(kappa)) {
    throw ValidationError("conditioning kappa must be a finite value > 1");
  }
  ProblemClass pc;
  pc.case_id = name[0] - '0';
  pc.aligned = name[1] == '|';
  pc.shape = name[2] == 'C'   ? FrontShape::Convex
             : name[2] == 'I' ? FrontShape::Linear
                              : FrontShape::Concave;
  pc.dimension = dimension;
  pc.kappa = kappa;
  if (pc.needsDuplicateEigenvalue() && dimension < 3) {
    throw ValidationError("class " + std::string(name) +
                          " duplicates an eigenvalue and needs dimension >= 3");
  }
  return pc;
}

std::string ProblemClass::name() const {
  std::string n;
  n += static_cast<char>('0' + case_id);
  n += aligned ? '|' : '/';
  n += shape == FrontShape::Convex ? 'C' : shape == FrontShape::Linear ? 'I' : 'J';
  return n;
}

double ProblemClass::power() const {
  switch (shape) {
    case FrontShape::Convex:
      return 2.0;
    case FrontShape::Linear:
      return 1.0;
    case FrontShape::Concave:
      return 0.5;
  }
  return 2.0;
}

std::vector<std::string> allClassNames() {
  std::vector<std::string> names;
  for (char c = '1'; c <= '9'; ++c)
    for (char a : {'|', '/'})
      for (char s : {'C', 'I', 'J'}) names.push_back(std::string{c, a, s});
  return names;
}

AffineParams sampleAffine(RandomStream& stream) {
  AffineParams p;
  p.a1 = std::pow(10.0, 6.0 * stream.nextUniform());
  p.a2 = std::pow(10.0, 6.0 * stream.nextUniform());
  p.b1 = p.a1 * (2.0 * stream.nextUniform() - 1.0);
  p.b2 = p.a2 * (2.0 * stream.nextUniform() - 1.0);
  return p;
}

void Instance::finalize() {
  const std::size_t d = x1_star.size();
  if (x2_star.size() != d || d1.size() != d || d2.size() != d || u1.rows() != d ||
      u2.rows() != d) {
    throw ValidationError("instance parameters have inconsistent dimensions");
  }
  h1 = rebuildHessian(u1, d1);
  h2 = rebuildHessian(u2, d2);
  delta.resize(d);
  for (std::size_t k = 0; k < d; ++k) delta[k] = x2_star[k] - x1_star[k];
  const double q1 = dot(delta, h1 * delta);
  const double q2 = dot(delta, h2 * delta);
  g_weight = q1 + q2 > 0.0 ? q2 / (q1 + q2) : 0.5;
}

Instance Instance::withAffine(const AffineParams& affine) const {
  Instance copy = *this;
  copy.a1 = affine.a1;
  copy.a2 = affine.a2;
  copy.b1 = affine.b1;
  copy.b2 = affine.b2;
  return copy;
}

Spectrum buildSpectrum(RandomStream& stream, std::size_t d, double kappa, bool duplicate) {
  if (d < 2 || (duplicate && d < 3)) {
    throw ValidationError("buildSpectrum: dimension " + std::to_string(d) + " too small" +
                          (duplicate ? " for a duplicated eigenvalue" : ""));
  }
  Spectrum out;
  if (!duplicate) {
    const Vector base = ellipsoidSpectrum(d, kappa);
    const auto perm = samplePermutation(stream, d);
    out.values.resize(d);
    for (std::size_t k = 0; k < d; ++k) out.values[k] = base[perm[k]];
    return out;
  }
  Vector base = ellipsoidSpectrum(d - 1, kappa);
  const std::size_t chosen = stream.nextIndex(d - 1);
  // Slot d-1 holds the copy; slots `chosen` and d-1 carry the same value.
  base.push_back(base[chosen]);
  const auto perm = samplePermutation(stream, d);
  out.values.resize(d);
  std::size_t first = d;
  std::size_t second = d;
  for (std::size_t k = 0; k < d; ++k) {
    out.values[k] = base[perm[k]];
    if (perm[k] == chosen || perm[k] == d - 1) (first == d ? first : second) = k;
  }
  out.duplicate_positions = std::make_pair(first, second);
  return out;
}

Spectrum buildSpectrumWithDuplicateAt(RandomStream& stream, std::size_t d, double kappa,
                                      std::size_t i, std::size_t j) {
  if (d < 3 || i == j || i >= d || j >= d) {
    throw ValidationError("buildSpectrumWithDuplicateAt: invalid positions or dimension");
  }
  Vector base = ellipsoidSpectrum(d - 1, kappa);
  const std::size_t chosen = stream.nextIndex(d - 1);
  const double repeated = base[chosen];
  base.erase(base.begin() + static_cast<std::ptrdiff_t>(chosen));
  const auto perm = samplePermutation(stream, d - 2);
  Spectrum out;
  out.values.assign(d, 0.0);
  out.values[i] = repeated;
  out.values[j] = repeated;
  std::size_t next = 0;
  for (std::size_t k = 0; k < d; ++k) {
    if (k == i || k == j) continue;
    out.values[k] = base[perm[next++]];
  }
  out.duplicate_positions = std::minmax(i, j);
  return out;
}

Matrix sampleConstrainedOrthogonal(RandomStream& stream, std::size_t d, std::size_t axis) {
  if (axis >= d) throw ValidationError("sampleConstrainedOrthogonal: axis out of range");
  for (int attempt = 0;; ++attempt) {
    Matrix raw(d, d);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) raw(r, c) = stream.nextGaussian();
    for (std::size_t k = 0; k < d; ++k) {
      raw(axis, k) = 0.0;
      raw(k, axis) = 0.0;
    }
    raw(axis, axis) = 1.0;
    try {
      return gramSchmidt(raw);
    } catch (const DegeneracyError&) {
      if (attempt >= 3) throw;
    }
  }
}

Realignment realignCase9(RandomStream& stream, const Matrix& u1, const Matrix& u2,
                         const Vector& delta) {
  const std::size_t d = delta.size();
  Matrix u;
  for (int attempt = 0;; ++attempt) {
    Matrix raw(d, d);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) raw(r, c) = c == 0 ? delta[r] : stream.nextGaussian();
    try {
      u = gramSchmidt(raw, /*fix_first_column=*/true);
      break;
    } catch (const DegeneracyError&) {
      if (attempt >= 3) throw;
    }
  }
  const std::size_t column = stream.nextIndex(d);
  u.swapColumns(0, column);
  const Matrix ut = u.transpose();
  return {ut * u1, ut * u2, ut * delta, column};
}

Instance sampleInstance(const ProblemClass& pc, std::uint64_t index) {
  // Re-validate so hand-built ProblemClass values get the same checks as parsed ones.
  const ProblemClass cls = ProblemClass::parse(pc.name(), pc.dimension, pc.kappa);
  const auto d = static_cast<std::size_t>(cls.dimension);
  const int c = cls.case_id;
  RandomStream geo(seedFromKey({cls.name(), cls.dimension, index, "geo"}));
  RandomStream aff(seedFromKey({cls.name(), cls.dimension, index, "aff"}));

  Instance inst;
  inst.problem_class = cls;
  inst.index = index;
  inst.u1 = Matrix::identity(d);
  inst.u2 = Matrix::identity(d);
  inst.d1 = ones(d);
  inst.d2 = ones(d);

  // (1) axis of an aligned Pareto set (case 9| is realigned afterwards instead)
  std::optional<std::size_t> axis;
  if (cls.aligned && c <= 8) axis = geo.nextIndex(d);

  // Rotations that land within 0.1 (max-entry) of the identity, or of each
  // other in case 9, are redrawn. With a fixed axis in d = 2 the free block is
  // 1x1 and there is nothing to redraw.
  const Matrix id = Matrix::identity(d);
  auto drawRotation = [&](const Matrix* other) {
    for (;;) {
      Matrix u = axis ? sampleConstrainedOrthogonal(geo, d, *axis) : sampleOrthogonal(geo, d);
      if (axis && d < 3) return u;
      if ((u - id).maxAbs() <= 0.1) continue;
      if (other && (other->transpose() * u - id).maxAbs() <= 0.1) continue;
      return u;
    }
  };

  // (2) shared or first rotation
  if (c >= 7) {
    inst.u1 = drawRotation(nullptr);
    if (c <= 8) inst.u2 = inst.u1;
  }
  // (3) second rotation
  if (c == 5 || c == 6 || c == 9) {
    inst.u2 = drawRotation(c == 9 ? &inst.u1 : nullptr);
  }

  // (4) spectra
  const bool duplicate = cls.needsDuplicateEigenvalue();
  std::optional<std::pair<std::size_t, std::size_t>> duplicate_positions;
  auto differentEnough = [&](const Vector& a, const Vector& b) {
    return a != b && ratioConditioning(a, b) >= 10.0;
  };
  switch (c) {
    case 1:
      break;
    case 2:
    case 5: {
      auto sp = buildSpectrum(geo, d, cls.kappa, duplicate);
      inst.d2 = sp.values;
      duplicate_positions = sp.duplicate_positions;
      break;
    }
    case 3:
    case 7: {
      auto sp = buildSpectrum(geo, d, cls.kappa, duplicate);
      inst.d1 = sp.values;
      inst.d2 = sp.values;
      duplicate_positions = sp.duplicate_positions;
      break;
    }
    case 4:
    case 8: {
      auto sp = buildSpectrum(geo, d, cls.kappa, duplicate);
      inst.d1 = sp.values;
      duplicate_positions = sp.duplicate_positions;
      do {
        inst.d2 = duplicate ? buildSpectrumWithDuplicateAt(geo, d, cls.kappa,
                                                           duplicate_positions->first,
                                                           duplicate_positions->second)
                                  .values
                            : buildSpectrum(geo, d, cls.kappa, false).values;
      } while (!differentEnough(inst.d1, inst.d2));
      break;
    }
    case 6:
    case 9:
      inst.d1 = buildSpectrum(geo, d, cls.kappa, false).values;
      inst.d2 = buildSpectrum(geo, d, cls.kappa, false).values;
      break;
    default:
      throw ValidationError("case id out of range");
  }

  // (5) Pareto-set direction
  Vector delta;
  if (axis) {
    delta = basisVector(d, *axis);
  } else if (c == 1) {
    do {
      delta.assign(d, 0.0);
      for (double& x : delta) x = geo.nextGaussian();
    } while (norm(delta) == 0.0 || componentsAbove(delta, 1e-6 * norm(delta)) < 2);
    const double len = norm(delta);
    for (double& x : delta) x /= len;
  } else if (c >= 2 && c <= 4) {
    double alpha;
    do {
      alpha = 2.0 * std::numbers::pi * geo.nextUniform();
    } while (nearMultipleOfHalfPi(alpha));
    delta.assign(d, 0.0);
    delta[duplicate_positions->first] = std::cos(alpha);
    delta[duplicate_positions->second] = std::sin(alpha);
  } else if (c == 7) {
    // H1 = H2: every direction is a generalized eigenvector; pick an
    // eigenvector of the shared Hessian.
    delta = inst.u1.column(geo.nextIndex(d));
  } else {
    const Matrix h1 = rebuildHessian(inst.u1, inst.d1);
    const Matrix h2 = rebuildHessian(inst.u2, inst.d2);
    const auto pairs = generalizedEigenpairs(h1, h2);
    delta = pairs[geo.nextIndex(d)].vector;
  }

  // (6) 9|: rotate the whole problem so that delta becomes a basis vector
  if (c == 9 && cls.aligned) {
    Realignment r;
    do {
      r = realignCase9(geo, inst.u1, inst.u2, delta);
    } while ((r.u1 - id).maxAbs() <= 0.1 || (r.u2 - id).maxAbs() <= 0.1);
    inst.u1 = r.u1;
    inst.u2 = r.u2;
    delta = basisVector(d, r.column);
  }

  // (7) midpoint of the Pareto set
  const Vector mid = sampleTruncatedGaussianVector(geo, d, 4.5);
  inst.x1_star.resize(d);
  inst.x2_star.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    inst.x1_star[k] = mid[k] - 0.5 * delta[k];
    inst.x2_star[k] = mid[k] + 0.5 * delta[k];
  }

  const AffineParams affine = sampleAffine(aff);
  inst.a1 = affine.a1;
  inst.a2 = affine.a2;
  inst.b1 = affine.b1;
  inst.b2 = affine.b2;
  inst.s = cls.power();
  inst.finalize();
  return inst;
}

double quadraticForm(const Matrix& u, const Vector& d, std::span<const double> x,
                     std::span<const double> center) {
  const std::size_t n = d.size();
  double q = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double proj = 0.0;
    for (std::size_t i = 0; i < n; ++i) proj += u(i, k) * (x[i] - center[i]);
    q += d[k] * proj * proj;
  }
  return q;
}

Objectives evaluate(const Instance& inst, std::span<const double> x) {
  if (x.size() != inst.dimension()) {
    throw ValidationError("evaluate: point has dimension " + std::to_string(x.size()) +
                          ", instance has " + std::to_string(inst.dimension()));
  }
  const double q1 = quadraticForm(inst.u1, inst.d1, x, inst.x1_star);
  const double q2 = quadraticForm(inst.u2, inst.d2, x, inst.x2_star);
  const double e = inst.s / 2.0;
  return {0.5 * inst.a1 * (e == 1.0 ? q1 : std::pow(q1, e)) + inst.b1,
          0.5 * inst.a2 * (e == 1.0 ? q2 : std::pow(q2, e)) + inst.b2};
}

namespace {

Vector objectiveGradient(const Matrix& u, const Vector& d, double a, double s,
                         std::span<const double> x, const Vector& center, const char* which) {
  const std::size_t n = d.size();
  Vector proj(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) proj[k] += u(i, k) * (x[i] - center[i]);
  double q = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    q += d[k] * proj[k] * proj[k];
    proj[k] *= d[k];
  }
  Vector g = u * proj;  // H (x - x*)
  if (s == 2.0) {
    for (double& v : g) v *= a;
    return g;
  }
  if (q == 0.0) {
    throw DomainError(std::string("gradient of ") + which +
                      " does not exist at its optimum for s < 2");
  }
  const double scale = a * s / 2.0 * std::pow(q, s / 2.0 - 1.0);
  for (double& v : g) v *= scale;
  return g;
}

}  // namespace

Gradients gradient(const Instance& inst, std::span<const double> x) {
  if (x.size() != inst.dimension()) {
    throw ValidationError("gradient: point has dimension " + std::to_string(x.size()) +
                          ", instance has " + std::to_string(inst.dimension()));
  }
  return {objectiveGradient(inst.u1, inst.d1, inst.a1, inst.s, x, inst.x1_star, "f1"),
          objectiveGradient(inst.u2, inst.d2, inst.a2, inst.s, x, inst.x2_star, "f2")};
}

bool InvariantReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::vector<std::string> InvariantReport::failedChecks() const {
  std::vector<std::string> names;
  for (const auto& c : checks)
    if (!c.passed) names.push_back(c.name);
  return names;
}

const InvariantCheck* InvariantReport::find(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

InvariantReport classInvariantReport(const Instance& inst) {
  InvariantReport report;
  auto add = [&](std::string name, bool passed, double value) {
    report.checks.push_back({std::move(name), passed, value});
  };
  const ProblemClass& cls = inst.problem_class;
  const std::size_t d = inst.dimension();
  const int c = cls.case_id;

  add("dimension", static_cast<int>(d) == cls.dimension && d >= 2, static_cast<double>(d));

  const double delta_norm = norm(inst.delta);
  add("delta_nonzero", delta_norm > 0.0, delta_norm);
  add("delta_unit_norm", std::abs(delta_norm - 1.0) <= 1e-12, std::abs(delta_norm - 1.0));

  {
    const Vector h1d = inst.h1 * inst.delta;
    const Vector h2d = inst.h2 * inst.delta;
    Vector r(d);
    for (std::size_t k = 0; k < d; ++k)
      r[k] = inst.g_weight * h1d[k] - (1.0 - inst.g_weight) * h2d[k];
    const double scale = norm(h1d) + norm(h2d);
    const double rel = scale > 0.0 ? norm(r) / scale : norm(r);
    add("generalized_eigen_residual", rel <= 1e-8, rel);
    add("g_weight_range", inst.g_weight > 0.0 && inst.g_weight < 1.0, inst.g_weight);
  }

  {
    double worst = 0.0;
    for (std::size_t k = 0; k < d; ++k)
      worst = std::max({worst, std::abs(inst.x1_star[k]), std::abs(inst.x2_star[k])});
    add("pareto_set_in_box", worst <= 5.0, worst);
  }

  {
    const double l1 = std::log10(inst.a1);
    const double l2 = std::log10(inst.a2);
    add("affine_scale_range", l1 >= 0.0 && l1 <= 6.0 && l2 >= 0.0 && l2 <= 6.0,
        std::max(l1, l2));
    add("affine_offset_range",
        std::abs(inst.b1) <= inst.a1 && std::abs(inst.b2) <= inst.a2,
        std::max(std::abs(inst.b1) / inst.a1, std::abs(inst.b2) / inst.a2));
  }
  add("power_matches_shape", inst.s == cls.power(), inst.s);

  const double orth1 = orthogonalityDefect(inst.u1);
  const double orth2 = orthogonalityDefect(inst.u2);
  add("u1_orthogonal", orth1 <= 1e-12, orth1);
  add("u2_orthogonal", orth2 <= 1e-12, orth2);

  const auto isOnes = [](const Vector& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 1.0; });
  };
  const Matrix id = Matrix::identity(d);
  const bool u1_identity = inst.u1 == id;
  const bool u2_identity = inst.u2 == id;
  const bool d1_identity = isOnes(inst.d1);
  const bool d2_identity = isOnes(inst.d2);

  auto conditioningCheck = [&](const char* name, const Matrix& h, bool identity) {
    if (identity) {
      add(name, h == id, (h - id).maxAbs());
      return;
    }
    const double rel = std::abs(conditionNumber(h) / cls.kappa - 1.0);
    add(name, rel <= 1e-9, rel);
  };
  conditioningCheck("condition_h1", inst.h1, d1_identity);
  conditioningCheck("condition_h2", inst.h2, d2_identity);

  const double rotation_gap = (inst.u1.transpose() * inst.u2 - id).maxAbs();
  const double u1_gap = (inst.u1 - id).maxAbs();
  const double u2_gap = (inst.u2 - id).maxAbs();
  const double ratio_cond = ratioConditioning(inst.d1, inst.d2);
  // An axis-fixing rotation in d = 2 is +-1 on the remaining coordinate.
  const bool rotation_free = !(cls.aligned && c >= 5 && c <= 8) || d >= 3;
  switch (c) {
    case 1:
      add("structure_case1", u1_identity && u2_identity && d1_identity && d2_identity &&
                                 inst.h1 == id && inst.h2 == id, 0.0);
      break;
    case 2:
      add("structure_case2", u1_identity && u2_identity && d1_identity && !d2_identity, 0.0);
      break;
    case 3:
      add("structure_case3", u1_identity && u2_identity && inst.d1 == inst.d2 && !d1_identity,
          0.0);
      break;
    case 4:
      add("structure_case4", u1_identity && u2_identity && !d1_identity && !d2_identity &&
                                 inst.d1 != inst.d2, 0.0);
      add("d1_d2_distinct", ratio_cond >= 10.0, ratio_cond);
      break;
    case 5:
      add("structure_case5", u1_identity && d1_identity && !d2_identity, 0.0);
      add("u2_not_identity", !rotation_free || u2_gap > 0.1, u2_gap);
      break;
    case 6:
      add("structure_case6", u1_identity && !d1_identity && !d2_identity, 0.0);
      add("u2_not_identity", !rotation_free || u2_gap > 0.1, u2_gap);
      break;
    case 7:
      add("structure_case7", inst.u1 == inst.u2 && inst.d1 == inst.d2 && !d1_identity &&
                                 inst.h1 == inst.h2, 0.0);
      add("u1_not_identity", !rotation_free || u1_gap > 0.1, u1_gap);
      break;
    case 8:
      add("structure_case8", inst.u1 == inst.u2 && !d1_identity && !d2_identity &&
                                 inst.d1 != inst.d2, 0.0);
      add("d1_d2_distinct", ratio_cond >= 10.0, ratio_cond);
      add("u1_not_identity", !rotation_free || u1_gap > 0.1, u1_gap);
      break;
    case 9:
      add("structure_case9", !d1_identity && !d2_identity, 0.0);
      add("u1_u2_distinct", rotation_gap > 0.1, rotation_gap);
      add("u1_not_identity", u1_gap > 0.1, u1_gap);
      add("u2_not_identity", u2_gap > 0.1, u2_gap);
      break;
    default:
      add("case_id", false, c);
  }

  if (cls.aligned) {
    std::size_t big = 0;
    double off = 0.0;
    for (double x : inst.delta) {
      if (std::abs(std::abs(x) - 1.0) <= 1e-12) {
        ++big;
      } else {
        off = std::max(off, std::abs(x));
      }
    }
    add("delta_axis_aligned", big == 1 && off <= 1e-12, off);
  } else {
    const auto n = componentsAbove(inst.delta, 1e-6);
    add("delta_not_aligned", n >= 2, static_cast<double>(n));
  }
  return report;
}

}  // namespace qbench
