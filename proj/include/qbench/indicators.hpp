#pragma once

#include <span>
#include <vector>

#include "qbench/problem.hpp"

namespace qbench {

using Point2 = Objectives;

// a weakly better in both objectives and strictly better in one.
inline bool dominates(const Point2& a, const Point2& b) {
  return a.f1 <= b.f1 && a.f2 <= b.f2 && (a.f1 < b.f1 || a.f2 < b.f2);
}

// Points not dominated by any other point, sorted by ascending f1;
// duplicates are kept once.
std::vector<Point2> nondominatedFilter(std::span<const Point2> points);

// Area dominated by `points` and bounded by `reference`. Points that are not
// strictly below the reference in both objectives contribute nothing.
double hypervolume2D(std::span<const Point2> points, const Point2& reference);

// Exclusive contribution of each point, in input order. Input must be
// mutually nondominated (exact duplicates allowed, they contribute zero);
// otherwise ValidationError.
std::vector<double> hypervolumeContributions(std::span<const Point2> points,
                                             const Point2& reference);

// hypervolume2D with reference (11 n - u) / 10 divided by (n1 - u1)(n2 - u2).
double normalizedHypervolume(const Instance& inst, std::span<const Point2> points);

struct NormalizationFrame {
  Point2 nadir;
  Point2 utopian;
  Point2 reference;

  static NormalizationFrame of(const Instance& inst);
  double normalizedHypervolume(std::span<const Point2> points) const;
};

}  // namespace qbench
