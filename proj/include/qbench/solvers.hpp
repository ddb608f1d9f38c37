#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qbench/indicators.hpp"
#include "qbench/linalg.hpp"
#include "qbench/problem.hpp"

namespace qbench {

class RandomStream;

enum class TrajectoryMode { Population, Archive };

std::string toString(TrajectoryMode mode);
TrajectoryMode trajectoryModeFromString(const std::string& name);

struct SolverConfig {
  std::size_t population_size = 20;
  std::size_t budget = 100000;
  double lower_bound = -5.0;
  double upper_bound = 5.0;
  double initial_step_size = 3.0;

  // NSGA-II / SMS-EMOA variation
  double sbx_eta = 20.0;
  double crossover_probability = 0.9;
  double mutation_eta = 20.0;
  std::optional<double> mutation_rate;  // default 1/d

  // MO-CMA-ES, (1+1) success rule with lambda = 1
  double target_success = 0.1818;
  double success_threshold = 0.44;

  std::uint32_t seed = 1;
  // Evaluation counts at which the trajectory is sampled; empty means
  // defaultCheckpoints(budget).
  std::vector<std::size_t> checkpoints;

  void validate() const;
};

// `count` points log-spaced from `first` to `budget`, rounded, deduplicated.
std::vector<std::size_t> defaultCheckpoints(std::size_t budget, std::size_t count = 20,
                                            std::size_t first = 100);

struct TrajectoryPoint {
  std::size_t evaluations;
  double population_hv;  // nondominated subset of the current population
  double archive_hv;     // nondominated subset of every point evaluated so far
};

struct RunRecord {
  std::string class_name;
  int dimension = 0;
  std::uint64_t index = 0;
  std::string solver;
  std::uint32_t seed = 0;
  std::vector<TrajectoryPoint> trajectory;
  std::size_t evaluations_used = 0;
  std::size_t covariance_resets = 0;  // MO-CMA-ES only

  double finalHypervolume(TrajectoryMode mode) const;
};

struct Individual {
  Vector x;
  Point2 f{};
  // MO-CMA-ES strategy parameters
  double sigma = 0.0;
  double success = 0.0;  // smoothed success rate
  Vector path;           // evolution path p_c
  Matrix covariance;
  Matrix factor;  // lower Cholesky factor of covariance
};

// Fronts of indices by dominance depth.
std::vector<std::vector<std::size_t>> fastNondominatedSort(std::span<const Point2> points);

// Crowding distance of the points of one front, aligned with `front`.
std::vector<double> crowdingDistance(std::span<const Point2> points,
                                     std::span<const std::size_t> front);

// beta(u) of simulated binary crossover; u = 0.5 gives beta = 1.
double sbxSpreadFactor(double u, double eta);
// Children 0.5[(1 +- beta) p1 + (1 -+ beta) p2].
std::pair<double, double> sbxBlend(double p1, double p2, double beta);

// Per variable with probability 1/2, children drawn from the SBX
// distribution; children are clamped to the bounds and swapped with
// probability 1/2.
std::pair<Vector, Vector> sbxCrossover(const Vector& parent1, const Vector& parent2, double eta,
                                       double lower, double upper, RandomStream& stream);

// Polynomial mutation, each variable mutated with probability `rate`.
Vector polynomialMutation(const Vector& x, double eta, double rate, double lower, double upper,
                          RandomStream& stream);

/// Index of the point SMS-EMOA discards: the member of the worst front with
/// the smallest hypervolume contribution, with the reference at the
/// population's componentwise maximum plus one.
std::size_t smsSelectWorst(std::span<const Point2> points);

RunRecord runNSGA2(const Instance& inst, const SolverConfig& config);
RunRecord runSMSEMOA(const Instance& inst, const SolverConfig& config);
RunRecord runMOCMAES(const Instance& inst, const SolverConfig& config);

// "nsga2", "smsemoa" or "mocmaes".
RunRecord runSolver(const std::string& name, const Instance& inst, const SolverConfig& config);
const std::vector<std::string>& solverNames();

}  // namespace qbench
