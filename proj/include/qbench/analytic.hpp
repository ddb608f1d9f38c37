#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qbench/problem.hpp"

namespace qbench {

/// One-parameter description of the Pareto front:
///   t -> (u1 + t^s (n1 - u1), u2 + (1 - t)^s (n2 - u2)).
struct FrontParam {
  double u1 = 0.0, u2 = 0.0;  // utopian
  double n1 = 1.0, n2 = 1.0;  // nadir
  double s = 2.0;

  Objectives point(double t) const;
  // (f - u) / (n - u), componentwise
  Objectives normalize(const Objectives& f) const;
};

FrontParam frontParam(const Instance& inst);

struct NadirUtopianReference {
  Objectives nadir;
  Objectives utopian;
  Objectives reference;  // (11 n - u) / 10
};

NadirUtopianReference nadirUtopianReference(const Instance& inst);

// (1 - t) x1* + t x2*; t outside [0, 1] is a ValidationError.
Vector paretoSetPoint(const Instance& inst, double t);
Objectives frontPoint(const Instance& inst, double t);

// Minimizer of c f1 + (1 - c) f2 on the quadratic geometry:
//   (c H1 + (1-c) H2)^{-1} [c H1 x1* + (1-c) H2 x2*].
Vector weightToPoint(const Instance& inst, double c);

// Solutions of (1 - c)(1 - t) g = c t (1 - g); mutually inverse.
double weightFromT(double g, double t);
double tFromWeight(double g, double c);
inline double weightFromT(const Instance& inst, double t) { return weightFromT(inst.g_weight, t); }
inline double tFromWeight(const Instance& inst, double c) { return tFromWeight(inst.g_weight, c); }

// Euclidean distance to the Pareto segment.
double distanceToParetoSet(const Instance& inst, std::span<const double> x);

// Distance from a normalized objective vector to the normalized front
// {(t^s, (1-t)^s)}.
double normalizedFrontDistance(double s, const Objectives& normalized);

struct MuDistribution {
  int mu = 0;
  std::vector<double> t_values;  // ascending
  double hypervolume = 0.0;      // raw objective-space units
  double normalized_hypervolume = 0.0;
  Objectives reference{};
  bool converged = false;
  int sweeps = 0;
};

// Hypervolume of front points at the given (ascending) parameters, in
// normalized objective space with normalized reference `ref`.
double normalizedChainHypervolume(double s, std::span<const double> t_values,
                                  const Objectives& ref);

/// Hypervolume-optimal placement of mu points on the front. Cyclic
/// coordinate ascent from a uniform grid; each coordinate is maximized by a
/// coarse scan followed by golden-section search inside its bracket. Stops
/// when a sweep gains at most 1e-12 normalized hypervolume (at most 1e4
/// sweeps). The reference defaults to (11 n - u) / 10.
MuDistribution optimalMuDistribution(const FrontParam& front, int mu,
                                     const Objectives& reference);
MuDistribution optimalMuDistribution(const Instance& inst, int mu,
                                     std::optional<Objectives> reference = std::nullopt);

struct MuCacheEntry {
  std::string class_name;
  int dimension = 0;
  std::uint64_t index = 0;
  int mu = 0;
  std::vector<double> t_values;
  double hypervolume = 0.0;
};

// JSON array of {class_name, dimension, index, mu, t_values, hypervolume}.
std::vector<MuCacheEntry> loadMuCache(const std::filesystem::path& path);
void saveMuCache(const std::filesystem::path& path, const std::vector<MuCacheEntry>& entries);

}  // namespace qbench

namespace qbench {

// Chord gap of the normalized front on a uniform t-grid: for each interior
// sample, (chord through its neighbours at f1_k) - f2_k. Non-negative for a
// convex front, zero for a linear one, non-positive for a concave one.
std::vector<double> frontSecondDifferences(double s, int samples = 1001);

}  // namespace qbench
