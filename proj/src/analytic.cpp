#include "qbench/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "qbench/error.hpp"

namespace qbench {

namespace {

double powerOf(double t, double s) {
  if (s == 2.0) return t * t;
  if (s == 1.0) return t;
  return std::pow(t, s);
}

void checkUnitInterval(double t, const char* what) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ValidationError(std::string(what) + " must lie in [0, 1], got " + std::to_string(t));
  }
}

}  // namespace

Objectives FrontParam::point(double t) const {
  return {u1 + powerOf(t, s) * (n1 - u1), u2 + powerOf(1.0 - t, s) * (n2 - u2)};
}

Objectives FrontParam::normalize(const Objectives& f) const {
  return {(f.f1 - u1) / (n1 - u1), (f.f2 - u2) / (n2 - u2)};
}

FrontParam frontParam(const Instance& inst) {
  FrontParam fp;
  fp.u1 = inst.b1;
  fp.u2 = inst.b2;
  fp.n1 = evaluate(inst, inst.x2_star).f1;
  fp.n2 = evaluate(inst, inst.x1_star).f2;
  fp.s = inst.s;
  return fp;
}

NadirUtopianReference nadirUtopianReference(const Instance& inst) {
  const FrontParam fp = frontParam(inst);
  NadirUtopianReference r;
  r.nadir = {fp.n1, fp.n2};
  r.utopian = {fp.u1, fp.u2};
  r.reference = {(11.0 * fp.n1 - fp.u1) / 10.0, (11.0 * fp.n2 - fp.u2) / 10.0};
  return r;
}

Vector paretoSetPoint(const Instance& inst, double t) {
  checkUnitInterval(t, "paretoSetPoint: t");
  const std::size_t d = inst.dimension();
  Vector x(d);
  for (std::size_t k = 0; k < d; ++k) x[k] = (1.0 - t) * inst.x1_star[k] + t * inst.x2_star[k];
  return x;
}

Objectives frontPoint(const Instance& inst, double t) {
  checkUnitInterval(t, "frontPoint: t");
  return frontParam(inst).point(t);
}

Vector weightToPoint(const Instance& inst, double c) {
  checkUnitInterval(c, "weightToPoint: c");
  const std::size_t d = inst.dimension();
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = c * inst.h1(i, j) + (1.0 - c) * inst.h2(i, j);
  const Vector r1 = inst.h1 * inst.x1_star;
  const Vector r2 = inst.h2 * inst.x2_star;
  Vector rhs(d);
  for (std::size_t k = 0; k < d; ++k) rhs[k] = c * r1[k] + (1.0 - c) * r2[k];
  return solveSpd(m, rhs);
}

double weightFromT(double g, double t) {
  const double num = (1.0 - t) * g;
  return num / (num + t * (1.0 - g));
}

double tFromWeight(double g, double c) {
  const double num = (1.0 - c) * g;
  return num / (num + c * (1.0 - g));
}

double distanceToParetoSet(const Instance& inst, std::span<const double> x) {
  if (x.size() != inst.dimension()) {
    throw ValidationError("distanceToParetoSet: dimension mismatch");
  }
  const std::size_t d = x.size();
  Vector offset(d);
  for (std::size_t k = 0; k < d; ++k) offset[k] = x[k] - inst.x1_star[k];
  const double t = std::clamp(dot(offset, inst.delta) / dot(inst.delta, inst.delta), 0.0, 1.0);
  const Vector p = paretoSetPoint(inst, t);
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += (x[k] - p[k]) * (x[k] - p[k]);
  return std::sqrt(s);
}

double normalizedFrontDistance(double s, const Objectives& y) {
  auto dist2 = [&](double t) {
    const double a = powerOf(t, s) - y.f1;
    const double b = powerOf(1.0 - t, s) - y.f2;
    return a * a + b * b;
  };
  constexpr int kScan = 1024;
  int best = 0;
  double best_value = dist2(0.0);
  for (int k = 1; k <= kScan; ++k) {
    const double v = dist2(static_cast<double>(k) / kScan);
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }
  double lo = std::max(0, best - 1) / static_cast<double>(kScan);
  double hi = std::min(kScan, best + 1) / static_cast<double>(kScan);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - ratio * (hi - lo);
  double b = lo + ratio * (hi - lo);
  double fa = dist2(a);
  double fb = dist2(b);
  for (int it = 0; it < 100 && hi - lo > 1e-16; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - ratio * (hi - lo);
      fa = dist2(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + ratio * (hi - lo);
      fb = dist2(b);
    }
  }
  return std::sqrt(std::min({best_value, fa, fb}));
}

double normalizedChainHypervolume(double s, std::span<const double> t_values,
                                  const Objectives& ref) {
  // Points sorted by t are sorted by f1 ascending and f2 descending, so the
  // dominated region is a staircase of rectangles.
  double hv = 0.0;
  const std::size_t m = t_values.size();
  for (std::size_t k = 0; k < m; ++k) {
    const double f1 = powerOf(t_values[k], s);
    const double f2 = powerOf(1.0 - t_values[k], s);
    const double right = k + 1 < m ? std::min(powerOf(t_values[k + 1], s), ref.f1) : ref.f1;
    hv += std::max(0.0, right - f1) * std::max(0.0, ref.f2 - f2);
  }
  return hv;
}

MuDistribution optimalMuDistribution(const FrontParam& front, int mu,
                                     const Objectives& reference) {
  if (mu < 1) throw ValidationError("optimalMuDistribution: mu must be positive");
  const Objectives ref = front.normalize(reference);
  const double s = front.s;
  std::vector<double> t(static_cast<std::size_t>(mu));
  for (int k = 0; k < mu; ++k) t[static_cast<std::size_t>(k)] = (k + 0.5) / mu;

  double hv = normalizedChainHypervolume(s, t, ref);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  MuDistribution out;
  out.mu = mu;

  auto valueAt = [&](std::size_t k, double candidate) {
    const double saved = t[k];
    t[k] = candidate;
    const double v = normalizedChainHypervolume(s, t, ref);
    t[k] = saved;
    return v;
  };

  constexpr int kMaxSweeps = 10000;
  constexpr int kScan = 32;
  for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    const double before = hv;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double lo0 = k == 0 ? 0.0 : t[k - 1];
      const double hi0 = k + 1 == t.size() ? 1.0 : t[k + 1];
      if (!(hi0 > lo0)) continue;
      // Coarse scan picks the sub-bracket for golden-section search.
      int best = 0;
      double best_value = -1.0;
      for (int i = 0; i <= kScan; ++i) {
        const double v = valueAt(k, lo0 + (hi0 - lo0) * i / kScan);
        if (v > best_value) {
          best_value = v;
          best = i;
        }
      }
      double lo = lo0 + (hi0 - lo0) * std::max(0, best - 1) / kScan;
      double hi = lo0 + (hi0 - lo0) * std::min(kScan, best + 1) / kScan;
      double a = hi - ratio * (hi - lo);
      double b = lo + ratio * (hi - lo);
      double fa = valueAt(k, a);
      double fb = valueAt(k, b);
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        if (fa > fb) {
          hi = b;
          b = a;
          fb = fa;
          a = hi - ratio * (hi - lo);
          fa = valueAt(k, a);
        } else {
          lo = a;
          a = b;
          fa = fb;
          b = lo + ratio * (hi - lo);
          fb = valueAt(k, b);
        }
      }
      double candidate = fa > fb ? a : b;
      double candidate_value = std::max(fa, fb);
      if (best_value > candidate_value) {
        candidate = lo0 + (hi0 - lo0) * best / kScan;
        candidate_value = best_value;
      }
      if (candidate_value > hv) {
        t[k] = candidate;
        hv = candidate_value;
      }
    }
    out.sweeps = sweep;
    if (hv - before <= 1e-12) {
      out.converged = true;
      break;
    }
  }

  out.t_values = t;
  out.normalized_hypervolume = hv;
  out.hypervolume = hv * (front.n1 - front.u1) * (front.n2 - front.u2);
  out.reference = reference;
  return out;
}

MuDistribution optimalMuDistribution(const Instance& inst, int mu,
                                     std::optional<Objectives> reference) {
  const FrontParam fp = frontParam(inst);
  const Objectives ref =
      reference ? *reference : nadirUtopianReference(inst).reference;
  return optimalMuDistribution(fp, mu, ref);
}

std::vector<MuCacheEntry> loadMuCache(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    std::vector<MuCacheEntry> entries;
    for (const auto& e : j) {
      MuCacheEntry m;
      m.class_name = e.at("class_name").get<std::string>();
      m.dimension = e.at("dimension").get<int>();
      m.index = e.at("index").get<std::uint64_t>();
      m.mu = e.at("mu").get<int>();
      m.t_values = e.at("t_values").get<std::vector<double>>();
      m.hypervolume = e.at("hypervolume").get<double>();
      entries.push_back(std::move(m));
    }
    return entries;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("mu-distribution cache " + path.string() + ": " + e.what());
  }
}

void saveMuCache(const std::filesystem::path& path, const std::vector<MuCacheEntry>& entries) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& m : entries) {
    j.push_back({{"class_name", m.class_name},
                 {"dimension", m.dimension},
                 {"index", m.index},
                 {"mu", m.mu},
                 {"t_values", m.t_values},
                 {"hypervolume", m.hypervolume}});
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace qbench

namespace qbench {

std::vector<double> frontSecondDifferences(double s, int samples) {
  std::vector<double> f1(static_cast<std::size_t>(samples));
  std::vector<double> f2(f1.size());
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / (samples - 1);
    f1[static_cast<std::size_t>(k)] = powerOf(t, s);
    f2[static_cast<std::size_t>(k)] = powerOf(1.0 - t, s);
  }
  std::vector<double> gaps;
  for (std::size_t k = 1; k + 1 < f1.size(); ++k) {
    const double w = (f1[k] - f1[k - 1]) / (f1[k + 1] - f1[k - 1]);
    gaps.push_back(f2[k - 1] + w * (f2[k + 1] - f2[k - 1]) - f2[k]);
  }
  return gaps;
}

}  // namespace qbench
