#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qbench/problem.hpp"
#include "qbench/solvers.hpp"

namespace qbench {

// Shortest decimal that round-trips to the same double.
std::string formatNumber(double value);

// ---- class taxonomy -------------------------------------------------------

enum class Grouping { All, Shape, Alignment, Separability, Rotation, Taxonomy, Class };

Grouping groupingFromString(const std::string& name);
std::string toString(Grouping grouping);

// Named groups: "all", "C", "I", "J", "aligned", "non-aligned", "separable"
// (cases 1-4), "non-separable" (5-9), "rotated" (7-9) and
// "separable-aligned" (1-4 with '|').
std::vector<std::string> classesInGroup(const std::string& group);

// Groups a class belongs to under `grouping`. Taxonomy yields the eight
// panels C, I, J, aligned, non-aligned, separable, non-separable, rotated.
std::vector<std::string> groupsOf(const std::string& class_name, Grouping grouping);

// Expands class names and group names into canonical class order. Unknown
// entries raise ValidationError.
std::vector<std::string> resolveClasses(const std::vector<std::string>& filter);

// ---- experiments ----------------------------------------------------------

struct ExperimentSpec {
  std::vector<std::string> classes;
  int dimension = 10;
  double kappa = kDefaultKappa;
  std::uint64_t index_begin = 0;
  std::uint64_t index_count = 1;
  std::vector<std::string> solvers;
  SolverConfig config;
  std::vector<TrajectoryMode> modes{TrajectoryMode::Population};
  std::filesystem::path output_dir = ".";
  std::size_t workers = 0;  // 0: hardware concurrency

  void validate() const;
  static ExperimentSpec fromJson(const std::string& text);
  std::string toJson() const;
};

struct CsvRow {
  std::string class_name;
  int dimension = 0;
  std::uint64_t index = 0;
  std::string solver;
  std::uint32_t seed = 0;
  std::size_t evaluations = 0;
  double normalized_hv = 0.0;
  TrajectoryMode mode = TrajectoryMode::Population;
};

inline constexpr const char* kRunsCsvHeader =
    "class_name,dimension,index,solver,seed,evaluations,normalized_hv,mode";

// Every (class, index, solver) run, in that nesting order, regardless of
// which worker finished first.
std::vector<RunRecord> runRecords(const ExperimentSpec& spec);

std::vector<CsvRow> toRows(const std::vector<RunRecord>& records,
                           const std::vector<TrajectoryMode>& modes);
void writeRunsCsv(std::ostream& out, const std::vector<CsvRow>& rows);
std::vector<CsvRow> readRunsCsv(std::istream& in);

// Runs the spec and writes <output_dir>/runs.csv.
std::vector<CsvRow> runExperiment(const ExperimentSpec& spec);

// ---- aggregation ----------------------------------------------------------

struct AggregateRow {
  std::string group;
  std::string solver;
  TrajectoryMode mode = TrajectoryMode::Population;
  std::size_t evaluations = 0;
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  std::size_t count = 0;
};

// Lower interpolation: sorted[floor(q * (n - 1))].
double quantileLower(const std::vector<double>& sorted, double q);

// Per (group, solver, mode, checkpoint) quantiles over all matching rows.
// Rows whose runs disagree on the checkpoint schedule raise ValidationError.
std::vector<AggregateRow> aggregate(const std::vector<CsvRow>& rows, Grouping grouping);
void writeAggregateCsv(std::ostream& out, const std::vector<AggregateRow>& rows);

// ---- verification ---------------------------------------------------------

enum class VerifyLevel { Quick, Full };

struct FrontGridCheck {
  std::size_t nondominated_points = 0;
  double worst_ratio = 0.0;  // max distance / tolerance over nondominated grid points
  double coverage = 0.0;     // fraction of front samples near some nondominated grid point
  bool passed = false;
};

/// d = 2 brute force: evaluate a grid x grid lattice on [-5, 5]^2, keep the
/// nondominated lattice points and compare them with the analytic front in
/// normalized objective space. Tolerances are `cells` times the local image
/// of one lattice diagonal.
FrontGridCheck bruteForceFrontCheck(const Instance& inst, std::size_t grid = 600,
                                    double cells = 2.0, std::size_t front_samples = 1001);

InvariantReport verifyInstance(const Instance& inst, VerifyLevel level);
InvariantReport verifyInstance(const std::string& class_name, int dimension, std::uint64_t index,
                               VerifyLevel level, double kappa = kDefaultKappa);

}  // namespace qbench
