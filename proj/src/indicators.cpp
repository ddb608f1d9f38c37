#include "qbench/indicators.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "qbench/analytic.hpp"
#include "qbench/error.hpp"

namespace qbench {

std::vector<Point2> nondominatedFilter(std::span<const Point2> points) {
  std::vector<Point2> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const Point2& a, const Point2& b) {
    return a.f1 < b.f1 || (a.f1 == b.f1 && a.f2 < b.f2);
  });
  std::vector<Point2> front;
  for (const Point2& p : sorted) {
    // Sorted by (f1, f2): p is dominated iff an earlier point has f2 <= p.f2,
    // except for an exact duplicate of the last kept point.
    if (front.empty() || p.f2 < front.back().f2) front.push_back(p);
  }
  return front;
}

double hypervolume2D(std::span<const Point2> points, const Point2& reference) {
  std::vector<Point2> inside;
  inside.reserve(points.size());
  for (const Point2& p : points)
    if (p.f1 < reference.f1 && p.f2 < reference.f2) inside.push_back(p);
  const std::vector<Point2> front = nondominatedFilter(inside);
  double hv = 0.0;
  for (std::size_t k = 0; k < front.size(); ++k) {
    const double right = k + 1 < front.size() ? front[k + 1].f1 : reference.f1;
    hv += (right - front[k].f1) * (reference.f2 - front[k].f2);
  }
  return hv;
}

std::vector<double> hypervolumeContributions(std::span<const Point2> points,
                                             const Point2& reference) {
  const std::size_t n = points.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points[a].f1 < points[b].f1 ||
           (points[a].f1 == points[b].f1 && points[a].f2 < points[b].f2);
  });
  auto same = [&](std::size_t a, std::size_t b) {
    return points[a].f1 == points[b].f1 && points[a].f2 == points[b].f2;
  };
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Point2& a = points[order[k]];
    const Point2& b = points[order[k + 1]];
    if (!same(order[k], order[k + 1]) && a.f2 <= b.f2) {
      throw ValidationError("hypervolumeContributions: point " + std::to_string(order[k + 1]) +
                            " is dominated by point " + std::to_string(order[k]));
    }
  }

  std::vector<double> contribution(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    const Point2& p = points[i];
    if (!(p.f1 < reference.f1 && p.f2 < reference.f2)) continue;
    const bool duplicated = (k > 0 && same(order[k - 1], i)) || (k + 1 < n && same(order[k + 1], i));
    if (duplicated) continue;
    const double right = k + 1 < n ? std::min(points[order[k + 1]].f1, reference.f1) : reference.f1;
    const double top = k > 0 ? std::min(points[order[k - 1]].f2, reference.f2) : reference.f2;
    contribution[i] = (right - p.f1) * (top - p.f2);
  }
  return contribution;
}

NormalizationFrame NormalizationFrame::of(const Instance& inst) {
  const NadirUtopianReference nur = nadirUtopianReference(inst);
  return {nur.nadir, nur.utopian, nur.reference};
}

double NormalizationFrame::normalizedHypervolume(std::span<const Point2> points) const {
  return hypervolume2D(points, reference) /
         ((nadir.f1 - utopian.f1) * (nadir.f2 - utopian.f2));
}

double normalizedHypervolume(const Instance& inst, std::span<const Point2> points) {
  return NormalizationFrame::of(inst).normalizedHypervolume(points);
}

}  // namespace qbench
